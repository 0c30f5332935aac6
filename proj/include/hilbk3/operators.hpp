#pragma once

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hilbk3/fock.hpp"

namespace hilbk3 {

/// Exact sparse matrix of an operator between the canonical bases of two
/// weight-graded pieces.
struct ConcreteOperator {
  int sourceWeight = 0;
  int weightShift = 0;
  std::vector<FockKey> source, target;
  std::map<std::pair<int, int>, Rat> entries;  // (row, col) -> value

  void add(int r, int c, const Rat& v) {
    if (v == 0) return;
    auto key = std::make_pair(r, c);
    auto it = entries.find(key);
    if (it == entries.end()) {
      entries.emplace(key, v);
    } else {
      it->second += v;
      if (it->second == 0) entries.erase(it);
    }
  }

  bool isZero() const { return entries.empty(); }

  friend bool operator==(const ConcreteOperator& a, const ConcreteOperator& b) {
    return a.sourceWeight == b.sourceWeight && a.weightShift == b.weightShift &&
           a.entries == b.entries;
  }

  ConcreteOperator& operator+=(const ConcreteOperator& o) {
    if (o.sourceWeight != sourceWeight || o.weightShift != weightShift)
      throw std::invalid_argument("incompatible gradings in operator sum");
    for (auto& [rc, v] : o.entries) add(rc.first, rc.second, v);
    return *this;
  }
  ConcreteOperator& operator-=(const ConcreteOperator& o) {
    if (o.sourceWeight != sourceWeight || o.weightShift != weightShift)
      throw std::invalid_argument("incompatible gradings in operator sum");
    for (auto& [rc, v] : o.entries) add(rc.first, rc.second, -v);
    return *this;
  }
  ConcreteOperator& operator*=(const Rat& s) {
    if (s == 0) { entries.clear(); return *this; }
    for (auto& [rc, v] : entries) v *= s;
    return *this;
  }
  friend ConcreteOperator operator+(ConcreteOperator a, const ConcreteOperator& b) { return a += b; }
  friend ConcreteOperator operator-(ConcreteOperator a, const ConcreteOperator& b) { return a -= b; }
  friend ConcreteOperator operator*(const Rat& s, ConcreteOperator a) { return a *= s; }
};

/// Matrix product A.B (apply B first). Source of A must be the target of B.
inline ConcreteOperator composeConcrete(const ConcreteOperator& a, const ConcreteOperator& b) {
  if (a.sourceWeight != b.sourceWeight + b.weightShift)
    throw std::invalid_argument("incompatible gradings in composition");
  ConcreteOperator out;
  out.sourceWeight = b.sourceWeight;
  out.weightShift = a.weightShift + b.weightShift;
  out.source = b.source;
  out.target = a.target;
  // index b's entries by column-major access
  std::map<int, std::vector<std::pair<int, Rat>>> bByCol;
  for (auto& [rc, v] : b.entries) bByCol[rc.second].emplace_back(rc.first, v);
  std::map<int, std::vector<std::pair<int, Rat>>> aByCol;
  for (auto& [rc, v] : a.entries) aByCol[rc.second].emplace_back(rc.first, v);
  for (auto& [col, bents] : bByCol)
    for (auto& [mid, bv] : bents) {
      auto it = aByCol.find(mid);
      if (it == aByCol.end()) continue;
      for (auto& [row, av] : it->second) out.add(row, col, av * bv);
    }
  return out;
}

/// A summand schema of an operator: an index-constrained family of Nakajima
/// words q_{x_1}...q_{x_k}(class) with Laurent-monomial coefficients in the
/// index variables, summed over all integer assignments with sum(x) = d.
struct Schema {
  enum class Sign { Positive, Negative, Free };
  struct ClassTerm {
    Rat coeff;
    std::vector<int> monomial;  // exponent per variable
    MptTerm term;
  };

  const SurfaceModel* model = nullptr;
  int nvars = 0;
  std::vector<Sign> signs;
  std::vector<std::optional<int>> fixedVal;  // fixed index values (Nakajima atoms)
  int weightShift = 0;                       // constraint sum(vars) = weightShift
  Rat coeff = Rat(1);
  std::vector<ClassTerm> classTemplate;
  bool normalOrdered = false;

  /// d - k + deg(class); requires a homogeneous class template.
  int degreeShift() const {
    int d = -1;
    for (auto& ct : classTemplate) {
      int td = ct.term.degree(*model);
      if (d < 0) d = td;
      else if (td != d) throw std::domain_error("inhomogeneous schema class");
    }
    return weightShift - nvars + (d < 0 ? 0 : d);
  }
};

/// Symbolic operator expression: atoms are schemas, closed under sum,
/// rational scalar, composition and bracket. Every node knows its weight
/// shift; `name` is a canonical structural key used for memoization and the
/// on-disk cache.
struct OperatorExpr {
  enum class Kind { Zero, Atom, Sum, Scalar, Compose, Bracket };

  Kind kind = Kind::Zero;
  Schema atom;
  Rat scalar = Rat(1);
  std::vector<OperatorExpr> children;
  int weightShift = 0;
  std::string name = "0";

  static OperatorExpr zero() { return {}; }

  static OperatorExpr makeAtom(Schema s, std::string name) {
    OperatorExpr e;
    e.kind = Kind::Atom;
    e.weightShift = s.weightShift;
    e.atom = std::move(s);
    e.name = std::move(name);
    return e;
  }

  static OperatorExpr sum(std::vector<OperatorExpr> parts) {
    std::vector<OperatorExpr> keep;
    for (auto& p : parts)
      if (p.kind != Kind::Zero) keep.push_back(std::move(p));
    if (keep.empty()) return zero();
    if (keep.size() == 1) return std::move(keep[0]);
    OperatorExpr e;
    e.kind = Kind::Sum;
    e.weightShift = keep[0].weightShift;
    for (auto& p : keep)
      if (p.weightShift != e.weightShift)
        throw std::invalid_argument("summands with different weight shifts");
    std::string n = "(" + keep[0].name;
    for (size_t i = 1; i < keep.size(); ++i) n += " + " + keep[i].name;
    n += ")";
    e.name = std::move(n);
    e.children = std::move(keep);
    return e;
  }

  static OperatorExpr scaled(const Rat& s, OperatorExpr inner) {
    if (s == 0 || inner.kind == Kind::Zero) return zero();
    if (s == 1) return inner;
    OperatorExpr e;
    e.kind = Kind::Scalar;
    e.scalar = s;
    e.weightShift = inner.weightShift;
    e.name = ratStr(s) + "*" + inner.name;
    e.children.push_back(std::move(inner));
    return e;
  }

  static OperatorExpr compose(OperatorExpr a, OperatorExpr b) {
    if (a.kind == Kind::Zero || b.kind == Kind::Zero) return zero();
    OperatorExpr e;
    e.kind = Kind::Compose;
    e.weightShift = a.weightShift + b.weightShift;
    e.name = "(" + a.name + " . " + b.name + ")";
    e.children.push_back(std::move(a));
    e.children.push_back(std::move(b));
    return e;
  }

  static OperatorExpr bracket(OperatorExpr a, OperatorExpr b) {
    if (a.kind == Kind::Zero || b.kind == Kind::Zero) return zero();
    OperatorExpr e;
    e.kind = Kind::Bracket;
    e.weightShift = a.weightShift + b.weightShift;
    e.name = "[" + a.name + ", " + b.name + "]";
    e.children.push_back(std::move(a));
    e.children.push_back(std::move(b));
    return e;
  }

  friend OperatorExpr operator+(OperatorExpr a, OperatorExpr b) {
    std::vector<OperatorExpr> v;
    v.push_back(std::move(a));
    v.push_back(std::move(b));
    return sum(std::move(v));
  }
  friend OperatorExpr operator-(OperatorExpr a, OperatorExpr b) {
    return a + scaled(Rat(-1), std::move(b));
  }
};

// -- operator constructors ----------------------------------------------------

namespace detail {

inline MultiPointClass surfaceToMpt(const SurfaceModel& m, const SurfaceClass& x) {
  MultiPointClass g(m, 1);
  for (int b = 0; b < m.basisSize(); ++b)
    if (x.coeff[b] != 0) {
      MptTerm t;
      t.deco = {b};
      g.add(t, x.coeff[b]);
    }
  return g;
}

inline std::vector<Schema::ClassTerm> plainTerms(const MultiPointClass& cls, int nvars) {
  std::vector<Schema::ClassTerm> out;
  for (auto& [t, c] : cls.terms) out.push_back({c, std::vector<int>(nvars, 0), t});
  return out;
}

}  // namespace detail

/// q_n(gamma); n = 0 yields the zero operator.
inline OperatorExpr nakajima(const SurfaceModel& m, int n, const SurfaceClass& gamma) {
  if (n == 0) return OperatorExpr::zero();
  MultiPointClass g = detail::surfaceToMpt(m, gamma);
  if (g.isZero()) return OperatorExpr::zero();
  Schema s;
  s.model = &m;
  s.nvars = 1;
  s.signs = {n > 0 ? Schema::Sign::Positive : Schema::Sign::Negative};
  s.fixedVal = {n};
  s.weightShift = n;
  s.classTemplate = detail::plainTerms(g, 1);
  std::string nm = "q(" + std::to_string(n) + "; " + classStr(g) + ")";
  return OperatorExpr::makeAtom(std::move(s), std::move(nm));
}

/// q_{n_1}...q_{n_k}(C) with fixed indices.
inline OperatorExpr nakajimaWord(const SurfaceModel& m, const std::vector<int>& indices,
                                 const MultiPointClass& cls) {
  if (cls.slots != static_cast<int>(indices.size()))
    throw std::invalid_argument("word/class arity mismatch");
  for (int i : indices)
    if (i == 0) return OperatorExpr::zero();
  if (cls.isZero()) return OperatorExpr::zero();
  Schema s;
  s.model = &m;
  s.nvars = static_cast<int>(indices.size());
  s.weightShift = 0;
  for (int i : indices) {
    s.signs.push_back(i > 0 ? Schema::Sign::Positive : Schema::Sign::Negative);
    s.fixedVal.emplace_back(i);
    s.weightShift += i;
  }
  s.classTemplate = detail::plainTerms(cls, s.nvars);
  std::ostringstream nm;
  nm << "q(";
  for (size_t i = 0; i < indices.size(); ++i) nm << (i ? "," : "") << indices[i];
  nm << "; " << classStr(cls) << ")";
  return OperatorExpr::makeAtom(std::move(s), nm.str());
}

/// Cup product with a divisor alpha: e_alpha = -sum_{n>0} q_n q_{-n}(Delta_* alpha).
inline OperatorExpr eDiv(const SurfaceModel& m, const SurfaceClass& alpha) {
  MultiPointClass pushed = reduce(m, 2, {RawFactor::diag(0, 1)});
  MultiPointClass cls(m, 2);
  for (int b = 1; b <= m.rank(); ++b) {
    if (alpha.coeff[b] == 0) continue;
    cls += alpha.coeff[b] * multiply(pushed, reduce(m, 2, {RawFactor::cls(0, b)}));
  }
  if (cls.isZero()) return OperatorExpr::zero();
  Schema s;
  s.model = &m;
  s.nvars = 2;
  s.signs = {Schema::Sign::Positive, Schema::Sign::Negative};
  s.fixedVal = {std::nullopt, std::nullopt};
  s.weightShift = 0;
  s.coeff = Rat(-1);
  s.classTemplate = detail::plainTerms(cls, 2);
  return OperatorExpr::makeAtom(std::move(s), "e(" + classStr(cls) + ")");
}

/// e_delta = -(1/6) sum_{i+j+k=0} :q_i q_j q_k(Delta_123): .
inline OperatorExpr eDelta(const SurfaceModel& m) {
  MultiPointClass small = reduce(m, 3, {RawFactor::diag(0, 1), RawFactor::diag(1, 2)});
  Schema s;
  s.model = &m;
  s.nvars = 3;
  s.signs.assign(3, Schema::Sign::Free);
  s.fixedVal.assign(3, std::nullopt);
  s.weightShift = 0;
  s.coeff = Rat(-1, 6);
  s.classTemplate = detail::plainTerms(small, 3);
  s.normalOrdered = true;
  return OperatorExpr::makeAtom(std::move(s), "e(delta)");
}

/// h = 2 sum_{n>0} (1/n) q_n q_{-n}(c_2 - c_1).
inline OperatorExpr hOp(const SurfaceModel& m) {
  Schema s;
  s.model = &m;
  s.nvars = 2;
  s.signs = {Schema::Sign::Positive, Schema::Sign::Negative};
  s.fixedVal = {std::nullopt, std::nullopt};
  s.weightShift = 0;
  s.coeff = Rat(2);
  MptTerm c2, c1;
  c2.deco = {0, m.cIdx()};
  c1.deco = {m.cIdx(), 0};
  s.classTemplate = {{Rat(1), {-1, 0}, c2}, {Rat(-1), {-1, 0}, c1}};
  return OperatorExpr::makeAtom(std::move(s), "h");
}

/// ft_alpha = -2 sum_{n>0} (1/n^2) q_n q_{-n}(alpha_1 + alpha_2).
inline OperatorExpr ftDiv(const SurfaceModel& m, const SurfaceClass& alpha) {
  Schema s;
  s.model = &m;
  s.nvars = 2;
  s.signs = {Schema::Sign::Positive, Schema::Sign::Negative};
  s.fixedVal = {std::nullopt, std::nullopt};
  s.weightShift = 0;
  s.coeff = Rat(-2);
  MultiPointClass cls(m, 2);
  for (int b = 1; b <= m.rank(); ++b) {
    if (alpha.coeff[b] == 0) continue;
    MptTerm a1, a2;
    a1.deco = {b, 0};
    a2.deco = {0, b};
    cls.add(a1, alpha.coeff[b]);
    cls.add(a2, alpha.coeff[b]);
  }
  if (cls.isZero()) return OperatorExpr::zero();
  for (auto& [t, c] : cls.terms) s.classTemplate.push_back({c, {-2, 0}, t});
  return OperatorExpr::makeAtom(std::move(s), "ft(" + classStr(cls) + ")");
}

/// ft_delta, the cubic Lefschetz-dual generator:
/// -(1/3) sum_{i+j+k=0} :q_i q_j q_k( Delta_12/k^2 + Delta_13/j^2 +
///   Delta_23/i^2 + 2 c_1/(jk) + 2 c_2/(ik) + 2 c_3/(ij) ): .
inline OperatorExpr ftDelta(const SurfaceModel& m) {
  Schema s;
  s.model = &m;
  s.nvars = 3;
  s.signs.assign(3, Schema::Sign::Free);
  s.fixedVal.assign(3, std::nullopt);
  s.weightShift = 0;
  s.coeff = Rat(-1, 3);
  s.normalOrdered = true;
  auto diag = [&](int i, int j) {
    MptTerm t;
    t.matching = {{i, j}};
    t.deco = {0, 0, 0};
    return t;
  };
  auto cAt = [&](int i) {
    MptTerm t;
    t.deco = {0, 0, 0};
    t.deco[i] = m.cIdx();
    return t;
  };
  // variables (i, j, k) = (0, 1, 2)
  s.classTemplate = {
      {Rat(1), {0, 0, -2}, diag(0, 1)}, {Rat(1), {0, -2, 0}, diag(0, 2)},
      {Rat(1), {-2, 0, 0}, diag(1, 2)}, {Rat(2), {0, -1, -1}, cAt(0)},
      {Rat(2), {-1, 0, -1}, cAt(1)},    {Rat(2), {-1, -1, 0}, cAt(2)},
  };
  return OperatorExpr::makeAtom(std::move(s), "ft(delta)");
}

/// T_Gamma = -sum_{n>0} n^{deg(Gamma)-3} q_n q_{-n}(Gamma') for a homogeneous
/// 2-slot correspondence.
inline OperatorExpr tGamma(const SurfaceModel& m, const MultiPointClass& gamma) {
  if (gamma.slots != 2) throw std::invalid_argument("T needs a 2-slot correspondence");
  if (gamma.isZero()) return OperatorExpr::zero();
  if (!gamma.isHomogeneous()) throw std::invalid_argument("T needs a homogeneous correspondence");
  int deg = gamma.degree();
  MultiPointClass tr = transpose(gamma);
  Schema s;
  s.model = &m;
  s.nvars = 2;
  s.signs = {Schema::Sign::Positive, Schema::Sign::Negative};
  s.fixedVal = {std::nullopt, std::nullopt};
  s.weightShift = 0;
  s.coeff = Rat(-1);
  for (auto& [t, c] : tr.terms) s.classTemplate.push_back({c, {deg - 3, 0}, t});
  return OperatorExpr::makeAtom(std::move(s), "T(" + classStr(gamma) + ")");
}

/// L_0 = sum_{k>0} q_k q_{-k}(Delta); acts by -n on weight n.
inline OperatorExpr l0Op(const SurfaceModel& m) {
  Schema s;
  s.model = &m;
  s.nvars = 2;
  s.signs = {Schema::Sign::Positive, Schema::Sign::Negative};
  s.fixedVal = {std::nullopt, std::nullopt};
  s.weightShift = 0;
  MptTerm d;
  d.matching = {{0, 1}};
  d.deco = {0, 0};
  s.classTemplate = {{Rat(1), {0, 0}, d}};
  return OperatorExpr::makeAtom(std::move(s), "L0");
}

/// A class a = alpha + m*delta in A^1(Hilb^n) = A^1(S) + Q delta, given by
/// coefficients over (v_1..v_r, delta).
struct HilbDivisor {
  std::vector<Rat> div;  // over v_1..v_r
  Rat delta = Rat(0);

  HilbDivisor() = default;
  explicit HilbDivisor(const SurfaceModel& m) : div(m.rank(), Rat(0)) {}
  static HilbDivisor divisor(const SurfaceModel& m, int i) {
    HilbDivisor a(m);
    a.div[i] = 1;
    return a;
  }
  static HilbDivisor deltaClass(const SurfaceModel& m) {
    HilbDivisor a(m);
    a.delta = 1;
    return a;
  }
  bool isZero() const {
    if (delta != 0) return false;
    for (auto& c : div)
      if (c != 0) return false;
    return true;
  }
  friend bool operator==(const HilbDivisor&, const HilbDivisor&) = default;
};

/// Beauville-Bogomolov pairing on A^1(Hilb^n); (delta,delta) = 2-2n.
inline Rat bbPairing(const SurfaceModel& m, const HilbDivisor& a, const HilbDivisor& b, int n) {
  Rat out = a.delta * b.delta * Rat(2 - 2 * n);
  for (int i = 0; i < m.rank(); ++i)
    for (int j = 0; j < m.rank(); ++j) out += a.div[i] * b.div[j] * m.divisors.pairing(i, j);
  return out;
}

inline SurfaceClass divisorPart(const SurfaceModel& m, const HilbDivisor& a) {
  SurfaceClass x(m);
  for (int i = 0; i < m.rank(); ++i) x.coeff[m.divisorIdx(i)] = a.div[i];
  return x;
}

inline OperatorExpr eGeneral(const SurfaceModel& m, const HilbDivisor& a) {
  OperatorExpr e = eDiv(m, divisorPart(m, a));
  if (a.delta != 0) e = std::move(e) + OperatorExpr::scaled(a.delta, eDelta(m));
  return e;
}

inline OperatorExpr ftGeneral(const SurfaceModel& m, const HilbDivisor& a) {
  OperatorExpr e = ftDiv(m, divisorPart(m, a));
  if (a.delta != 0) e = std::move(e) + OperatorExpr::scaled(a.delta, ftDelta(m));
  return e;
}

/// f_a = (1/(a,a)) ft_a; the square (a,a) depends on n through (delta,delta).
inline OperatorExpr fGeneral(const SurfaceModel& m, const HilbDivisor& a, int n) {
  Rat sq = bbPairing(m, a, a, n);
  if (sq == 0) throw std::domain_error("isotropic class");
  return OperatorExpr::scaled(1 / sq, ftGeneral(m, a));
}

/// kappa_{ab} = [e_a, ft_b].
inline OperatorExpr kappa(const SurfaceModel& m, const HilbDivisor& a, const HilbDivisor& b) {
  return OperatorExpr::bracket(eGeneral(m, a), ftGeneral(m, b));
}

// -- instantiation ------------------------------------------------------------

namespace detail {

inline void enumAssignments(const Schema& s, int n, int slack, int var, int partial,
                            std::vector<int>& vals, const std::vector<int>& minRest,
                            const std::vector<int>& maxRest, std::vector<std::vector<int>>& out) {
  if (var == s.nvars) {
    if (partial == s.weightShift) out.push_back(vals);
    return;
  }
  int lo = -(n + slack), hi = n + s.weightShift + slack;
  if (s.signs[var] == Schema::Sign::Positive) lo = 1;
  if (s.signs[var] == Schema::Sign::Negative) hi = -1;
  if (s.fixedVal[var]) lo = hi = *s.fixedVal[var];
  for (int v = lo; v <= hi; ++v) {
    if (v == 0) continue;
    // prune: remaining vars must be able to reach the constraint
    int rest = s.weightShift - partial - v;
    if (rest < minRest[var + 1] || rest > maxRest[var + 1]) continue;
    vals[var] = v;
    enumAssignments(s, n, slack, var + 1, partial + v, vals, minRest, maxRest, out);
  }
}

}  // namespace detail

/// All index assignments of a schema that can act on weight n (annihilators
/// bounded by n, creators by n + d). `slack` widens the window; the matrix
/// must not depend on it (truncation soundness).
inline std::vector<std::vector<int>> schemaAssignments(const Schema& s, int n, int slack = 0) {
  std::vector<int> minRest(s.nvars + 1, 0), maxRest(s.nvars + 1, 0);
  for (int v = s.nvars - 1; v >= 0; --v) {
    int lo = -(n + slack), hi = n + s.weightShift + slack;
    if (s.signs[v] == Schema::Sign::Positive) lo = 1;
    if (s.signs[v] == Schema::Sign::Negative) hi = -1;
    if (s.fixedVal[v]) lo = hi = *s.fixedVal[v];
    minRest[v] = minRest[v + 1] + lo;
    maxRest[v] = maxRest[v + 1] + hi;
  }
  std::vector<int> vals(s.nvars, 0);
  std::vector<std::vector<int>> out;
  detail::enumAssignments(s, n, slack, 0, 0, vals, minRest, maxRest, out);
  return out;
}

/// The instantiated Nakajima word of one assignment: indices (normal-ordered
/// if the schema says so) and the evaluated class.
inline std::pair<std::vector<int>, MultiPointClass> schemaWord(const Schema& s,
                                                               const std::vector<int>& vals) {
  const SurfaceModel& m = *s.model;
  MultiPointClass cls(m, s.nvars);
  for (auto& ct : s.classTemplate) {
    Rat c = s.coeff * ct.coeff;
    for (int v = 0; v < s.nvars; ++v)
      if (ct.monomial[v] != 0) c *= ratPow(vals[v], ct.monomial[v]);
    cls.add(ct.term, c);
  }
  std::vector<int> word = vals;
  if (s.normalOrdered) {
    std::vector<int> order(s.nvars);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] > vals[b]; });
    std::vector<int> sigma(s.nvars);
    for (int i = 0; i < s.nvars; ++i) sigma[order[i]] = i;
    std::sort(word.begin(), word.end(), std::greater<int>());
    cls = permute(cls, sigma);
  }
  return {std::move(word), std::move(cls)};
}

inline FockVector applySchema(const Schema& s, const FockVector& x, int n, int slack = 0) {
  FockVector out(*s.model);
  for (auto& vals : schemaAssignments(s, n, slack)) {
    auto [word, cls] = schemaWord(s, vals);
    if (cls.isZero()) continue;
    out += applyWord(word, cls, x);
  }
  return out;
}

/// Exact matrix of an operator expression on the weight-n piece.
class Instantiator {
 public:
  explicit Instantiator(const SurfaceModel& m, int slack = 0) : model_(&m), slack_(slack) {}

  const std::vector<FockKey>& basis(int n) {
    auto it = bases_.find(n);
    if (it == bases_.end()) it = bases_.emplace(n, weightBasis(*model_, n)).first;
    return it->second;
  }

  ConcreteOperator operator()(const OperatorExpr& e, int n) {
    auto key = std::make_pair(e.name, n);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    ConcreteOperator out = compute(e, n);
    memo_.emplace(std::move(key), out);
    return out;
  }

 private:
  ConcreteOperator compute(const OperatorExpr& e, int n) {
    switch (e.kind) {
      case OperatorExpr::Kind::Zero: {
        ConcreteOperator out;
        out.sourceWeight = n;
        out.weightShift = 0;
        out.source = out.target = basis(n);
        return out;
      }
      case OperatorExpr::Kind::Atom: {
        ConcreteOperator out;
        out.sourceWeight = n;
        out.weightShift = e.weightShift;
        out.source = basis(n);
        if (n + e.weightShift >= 0) out.target = basis(n + e.weightShift);
        std::map<FockKey, int> rowIndex;
        for (size_t r = 0; r < out.target.size(); ++r) rowIndex.emplace(out.target[r], r);
        for (size_t col = 0; col < out.source.size(); ++col) {
          FockVector img = applySchema(e.atom, basisVector(*model_, out.source[col]), n, slack_);
          for (size_t r = 0; r < out.target.size(); ++r) {
            Rat v = coordinate(img, out.target[r]);
            out.add(static_cast<int>(r), static_cast<int>(col), v);
          }
        }
        return out;
      }
      case OperatorExpr::Kind::Sum: {
        ConcreteOperator out = (*this)(e.children[0], n);
        for (size_t i = 1; i < e.children.size(); ++i) out += (*this)(e.children[i], n);
        return out;
      }
      case OperatorExpr::Kind::Scalar: {
        ConcreteOperator out = (*this)(e.children[0], n);
        out *= e.scalar;
        return out;
      }
      case OperatorExpr::Kind::Compose: {
        ConcreteOperator b = (*this)(e.children[1], n);
        ConcreteOperator a = (*this)(e.children[0], n + e.children[1].weightShift);
        return composeConcrete(a, b);
      }
      case OperatorExpr::Kind::Bracket: {
        const OperatorExpr& A = e.children[0];
        const OperatorExpr& B = e.children[1];
        ConcreteOperator ab = composeConcrete((*this)(A, n + B.weightShift), (*this)(B, n));
        ConcreteOperator ba = composeConcrete((*this)(B, n + A.weightShift), (*this)(A, n));
        return ab - ba;
      }
    }
    throw std::logic_error("unreachable");
  }

  const SurfaceModel* model_;
  int slack_;
  std::map<int, std::vector<FockKey>> bases_;
  std::map<std::pair<std::string, int>, ConcreteOperator> memo_;
};

inline ConcreteOperator instantiate(const SurfaceModel& m, const OperatorExpr& e, int n,
                                    int slack = 0) {
  Instantiator inst(m, slack);
  return inst(e, n);
}

inline ConcreteOperator identityOperator(const SurfaceModel& m, int n) {
  ConcreteOperator out;
  out.sourceWeight = n;
  out.weightShift = 0;
  out.source = out.target = weightBasis(m, n);
  for (size_t i = 0; i < out.source.size(); ++i)
    out.add(static_cast<int>(i), static_cast<int>(i), Rat(1));
  return out;
}

}  // namespace hilbk3
