#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hilbk3/surface.hpp"

namespace hilbk3 {

/// One normal-form monomial of the Beauville-Visin subring of A*(S^k):
/// a set of disjoint diagonal matchings plus a basis decoration on every
/// unmatched slot. Matched slots carry decoration u (index 0).
struct MptTerm {
  std::vector<std::pair<int, int>> matching;  // sorted pairs (i < j), disjoint
  std::vector<int> deco;                      // per slot, R(S) basis index

  friend auto operator<=>(const MptTerm&, const MptTerm&) = default;

  int slots() const { return static_cast<int>(deco.size()); }

  int degree(const SurfaceModel& m) const {
    int d = 2 * static_cast<int>(matching.size());
    for (int b : deco) d += m.degree(b);
    return d;
  }

  bool isMatched(int slot) const {
    for (auto& [i, j] : matching)
      if (i == slot || j == slot) return true;
    return false;
  }

  MptTerm permuted(const std::vector<int>& sigma) const {
    // sigma maps old slot -> new slot
    MptTerm t;
    t.deco.resize(deco.size());
    for (size_t s = 0; s < deco.size(); ++s) t.deco[sigma[s]] = deco[s];
    for (auto [i, j] : matching) {
      int a = sigma[i], b = sigma[j];
      t.matching.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(t.matching.begin(), t.matching.end());
    return t;
  }
};

/// Rational combination of normal-form terms of A*(S^k).
struct MultiPointClass {
  const SurfaceModel* model = nullptr;
  int slots = 0;
  std::map<MptTerm, Rat> terms;

  MultiPointClass() = default;
  MultiPointClass(const SurfaceModel& m, int k) : model(&m), slots(k) {}

  /// The unit 1 = u_1 ... u_k.
  static MultiPointClass one(const SurfaceModel& m, int k) {
    MultiPointClass x(m, k);
    MptTerm t;
    t.deco.assign(k, 0);
    x.terms.emplace(std::move(t), Rat(1));
    return x;
  }

  static MultiPointClass zero(const SurfaceModel& m, int k) { return MultiPointClass(m, k); }

  void add(const MptTerm& t, const Rat& c) {
    if (c == 0) return;
    auto it = terms.find(t);
    if (it == terms.end()) {
      terms.emplace(t, c);
    } else {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  bool isZero() const { return terms.empty(); }

  MultiPointClass& operator+=(const MultiPointClass& o) {
    if (slots != o.slots) throw std::invalid_argument("slot-count mismatch");
    for (auto& [t, c] : o.terms) add(t, c);
    return *this;
  }
  MultiPointClass& operator-=(const MultiPointClass& o) {
    if (slots != o.slots) throw std::invalid_argument("slot-count mismatch");
    for (auto& [t, c] : o.terms) add(t, -c);
    return *this;
  }
  MultiPointClass& operator*=(const Rat& s) {
    if (s == 0) { terms.clear(); return *this; }
    for (auto& [t, c] : terms) c *= s;
    return *this;
  }
  friend MultiPointClass operator+(MultiPointClass a, const MultiPointClass& b) { return a += b; }
  friend MultiPointClass operator-(MultiPointClass a, const MultiPointClass& b) { return a -= b; }
  friend MultiPointClass operator*(const Rat& s, MultiPointClass a) { return a *= s; }
  friend bool operator==(const MultiPointClass& a, const MultiPointClass& b) {
    return a.slots == b.slots && a.terms == b.terms;
  }

  /// -1 on the zero class, else the common degree; throws if inhomogeneous.
  int degree() const {
    int d = -1;
    for (auto& [t, c] : terms) {
      int td = t.degree(*model);
      if (d < 0) d = td;
      else if (d != td) throw std::domain_error("inhomogeneous multi-point class");
    }
    return d;
  }

  bool isHomogeneous() const {
    int d = -1;
    for (auto& [t, c] : terms) {
      int td = t.degree(*model);
      if (d >= 0 && td != d) return false;
      d = td;
    }
    return true;
  }
};

namespace detail {

/// Intermediate state of the rewrite: a scalar, a multiset of diagonal
/// edges (possibly repeated or overlapping) and one basis decoration per
/// slot. Slots touched by edges may be decorated here; the rewrite rules
/// clear this before a term is emitted.
struct RedItem {
  Rat coeff;
  std::vector<std::pair<int, int>> edges;  // kept sorted, multiset
  std::vector<int> deco;
};

inline void addEdge(RedItem& it, int i, int j) {
  std::pair<int, int> e{std::min(i, j), std::max(i, j)};
  it.edges.insert(std::upper_bound(it.edges.begin(), it.edges.end(), e), e);
}

/// Multiplies basis class b into the decoration of `slot`, branching over
/// the R(S) product. Appends the results to `out`.
inline void mulSlot(const SurfaceModel& m, RedItem it, int slot, int b,
                    std::vector<RedItem>& out) {
  auto prod = m.basisProduct(it.deco[slot], b);
  for (auto& [nb, pc] : prod) {
    RedItem branch = it;
    branch.deco[slot] = nb;
    branch.coeff *= pc;
    out.push_back(std::move(branch));
  }
}

/// Exhaustive rewrite of a worklist of raw items into normal form:
///   Delta_ij^2        -> 24 c_i c_j
///   Delta_ij Delta_jk -> small diagonal -> six-term expansion
///   Delta_ij . x_i    -> (c_i x_j + x_i c_j | c_i c_j | p_i p_j) by deg(x)
///   p_i p_j (same p)  -> c_i p_j + p_i c_j - c_i c_j
/// The last rule is forced by the others: cutting the six-term expansion of
/// the small diagonal with p_1 and pushing forward gives (p - c) x (p - c) = 0.
/// Without it two slots could hold the same point and normal forms would not
/// be unique. The first three rules strictly decrease the edge count and the
/// fourth the number of point decorations, so this terminates.
inline void reduceInto(const SurfaceModel& m, std::vector<RedItem> work,
                       std::map<MptTerm, Rat>& out) {
  while (!work.empty()) {
    RedItem it = std::move(work.back());
    work.pop_back();
    if (it.coeff == 0) continue;

    // duplicate edge
    {
      int dup = -1;
      for (size_t e = 0; e + 1 < it.edges.size(); ++e)
        if (it.edges[e] == it.edges[e + 1]) { dup = static_cast<int>(e); break; }
      if (dup >= 0) {
        auto [i, j] = it.edges[dup];
        it.edges.erase(it.edges.begin() + dup, it.edges.begin() + dup + 2);
        it.coeff *= SurfaceModel::euler;
        std::vector<RedItem> tmp;
        mulSlot(m, std::move(it), i, m.cIdx(), tmp);
        for (auto& t : tmp) mulSlot(m, std::move(t), j, m.cIdx(), work);
        continue;
      }
    }

    // two distinct edges sharing a vertex: small-diagonal expansion
    {
      int e1 = -1, e2 = -1;
      for (size_t a = 0; a + 1 < it.edges.size() && e1 < 0; ++a)
        for (size_t b = a + 1; b < it.edges.size(); ++b) {
          auto [i1, j1] = it.edges[a];
          auto [i2, j2] = it.edges[b];
          if (i1 == i2 || i1 == j2 || j1 == i2 || j1 == j2) {
            e1 = static_cast<int>(a);
            e2 = static_cast<int>(b);
            break;
          }
        }
      if (e1 >= 0) {
        auto [i1, j1] = it.edges[e1];
        auto [i2, j2] = it.edges[e2];
        std::vector<int> tri{i1, j1, i2, j2};
        std::sort(tri.begin(), tri.end());
        tri.erase(std::unique(tri.begin(), tri.end()), tri.end());
        int x = tri[0], y = tri[1], z = tri[2];
        RedItem base = it;
        base.edges.erase(base.edges.begin() + e2);
        base.edges.erase(base.edges.begin() + e1);
        // Delta_xyz = Dxy c_z + Dxz c_y + Dyz c_x - c_x c_y - c_x c_z - c_y c_z
        const int triples[3][3] = {{x, y, z}, {x, z, y}, {y, z, x}};
        for (auto& tr : triples) {
          RedItem b = base;
          addEdge(b, tr[0], tr[1]);
          mulSlot(m, std::move(b), tr[2], m.cIdx(), work);
        }
        const int pairs[3][2] = {{x, y}, {x, z}, {y, z}};
        for (auto& pr : pairs) {
          RedItem b = base;
          b.coeff = -b.coeff;
          std::vector<RedItem> tmp;
          mulSlot(m, std::move(b), pr[0], m.cIdx(), tmp);
          for (auto& t : tmp) mulSlot(m, std::move(t), pr[1], m.cIdx(), work);
        }
        continue;
      }
    }

    // edge with a decorated endpoint
    {
      int hit = -1, s = -1, t = -1;
      for (size_t e = 0; e < it.edges.size(); ++e) {
        auto [i, j] = it.edges[e];
        if (it.deco[i] != 0) { hit = static_cast<int>(e); s = i; t = j; break; }
        if (it.deco[j] != 0) { hit = static_cast<int>(e); s = j; t = i; break; }
      }
      if (hit >= 0) {
        int x = it.deco[s];
        it.edges.erase(it.edges.begin() + hit);
        if (m.isDivisor(x)) {
          // Delta . v_s -> c_s v_t + v_s c_t
          RedItem b1 = it;
          b1.deco[s] = m.cIdx();
          mulSlot(m, std::move(b1), t, x, work);
          mulSlot(m, std::move(it), t, m.cIdx(), work);
        } else if (m.isC(x)) {
          mulSlot(m, std::move(it), t, m.cIdx(), work);
        } else {  // point symbol: Delta . p_s -> p_s p_t
          mulSlot(m, std::move(it), t, x, work);
        }
        continue;
      }
    }

    // one point symbol on two slots
    {
      int s = -1, t = -1;
      int k = static_cast<int>(it.deco.size());
      for (int a = 0; a < k && s < 0; ++a) {
        if (!m.isPoint(it.deco[a])) continue;
        for (int b = a + 1; b < k; ++b)
          if (it.deco[b] == it.deco[a]) { s = a; t = b; break; }
      }
      if (s >= 0) {
        RedItem b1 = it, b2 = it;
        b1.deco[s] = m.cIdx();
        b2.deco[t] = m.cIdx();
        it.deco[s] = it.deco[t] = m.cIdx();
        it.coeff = -it.coeff;
        work.push_back(std::move(b1));
        work.push_back(std::move(b2));
        work.push_back(std::move(it));
        continue;
      }
    }

    // normal form reached: edges are a disjoint matching of undecorated slots
    MptTerm term;
    term.matching = std::move(it.edges);
    term.deco = std::move(it.deco);
    auto pos = out.find(term);
    if (pos == out.end()) out.emplace(std::move(term), std::move(it.coeff));
    else {
      pos->second += it.coeff;
      if (pos->second == 0) out.erase(pos);
    }
  }
}

}  // namespace detail

/// One factor of a raw product: either a diagonal symbol Delta_ij or a basis
/// decoration on a single slot.
struct RawFactor {
  bool diagonal = false;
  int i = 0, j = 0;   // diagonal slots (diagonal = true)
  int slot = 0;       // decorated slot (diagonal = false)
  int basis = 0;      // R(S) basis index

  static RawFactor diag(int i, int j) {
    if (i == j) throw std::invalid_argument("diagonal needs two distinct slots");
    return {true, std::min(i, j), std::max(i, j), 0, 0};
  }
  static RawFactor cls(int slot, int basis) { return {false, 0, 0, slot, basis}; }
};

/// Normal form of a formal product of diagonal symbols and slot decorations.
inline MultiPointClass reduce(const SurfaceModel& m, int k, const std::vector<RawFactor>& raw,
                              const Rat& coeff = Rat(1)) {
  MultiPointClass result(m, k);
  detail::RedItem start{coeff, {}, std::vector<int>(k, 0)};
  std::vector<detail::RedItem> work{std::move(start)};
  for (const auto& f : raw) {
    std::vector<detail::RedItem> next;
    for (auto& it : work) {
      if (f.diagonal) {
        if (f.i >= k || f.j >= k) throw std::invalid_argument("slot out of range");
        detail::addEdge(it, f.i, f.j);
        next.push_back(std::move(it));
      } else {
        if (f.slot >= k) throw std::invalid_argument("slot out of range");
        detail::mulSlot(m, std::move(it), f.slot, f.basis, next);
      }
    }
    work = std::move(next);
  }
  detail::reduceInto(m, std::move(work), result.terms);
  return result;
}

inline MultiPointClass multiply(const MultiPointClass& a, const MultiPointClass& b) {
  if (a.slots != b.slots) throw std::invalid_argument("slot-count mismatch");
  const SurfaceModel& m = *a.model;
  MultiPointClass result(m, a.slots);
  for (auto& [ta, ca] : a.terms)
    for (auto& [tb, cb] : b.terms) {
      detail::RedItem it{ca * cb, ta.matching, ta.deco};
      for (auto [i, j] : tb.matching) detail::addEdge(it, i, j);
      std::vector<detail::RedItem> work{std::move(it)};
      for (int s = 0; s < a.slots; ++s) {
        if (tb.deco[s] == 0) continue;
        std::vector<detail::RedItem> next;
        for (auto& w : work) detail::mulSlot(m, std::move(w), s, tb.deco[s], next);
        work = std::move(next);
      }
      detail::reduceInto(m, std::move(work), result.terms);
    }
  return result;
}

/// Integrates out slot `s` (0-based): projection pushforward along
/// forgetting one factor. Degree drops by exactly 2.
inline MultiPointClass pushforwardForget(const MultiPointClass& a, int s) {
  if (s < 0 || s >= a.slots) throw std::invalid_argument("slot out of range");
  MultiPointClass result(*a.model, a.slots - 1);
  auto shift = [s](int i) { return i > s ? i - 1 : i; };
  for (auto& [t, c] : a.terms) {
    MptTerm nt;
    Rat nc = c;
    int partner = -1;
    for (auto [i, j] : t.matching) {
      if (i == s) partner = j;
      else if (j == s) partner = i;
      else nt.matching.emplace_back(shift(i), shift(j));
    }
    if (partner < 0) {
      nc *= a.model->integral(t.deco[s]);
      if (nc == 0) continue;
    }
    for (int i = 0; i < t.slots(); ++i)
      if (i != s) nt.deco.push_back(t.deco[i]);
    // a matched partner becomes an undecorated free slot (deco already u)
    std::sort(nt.matching.begin(), nt.matching.end());
    result.add(nt, nc);
  }
  return result;
}

/// Inserts a fresh slot decorated u at `pos` (0-based): projection pullback.
inline MultiPointClass pullbackInsert(const MultiPointClass& a, int pos) {
  if (pos < 0 || pos > a.slots) throw std::invalid_argument("position out of range");
  MultiPointClass result(*a.model, a.slots + 1);
  auto shift = [pos](int i) { return i >= pos ? i + 1 : i; };
  for (auto& [t, c] : a.terms) {
    MptTerm nt;
    for (auto [i, j] : t.matching) nt.matching.emplace_back(shift(i), shift(j));
    std::sort(nt.matching.begin(), nt.matching.end());
    nt.deco = t.deco;
    nt.deco.insert(nt.deco.begin() + pos, 0);
    result.add(nt, c);
  }
  return result;
}

inline MultiPointClass permute(const MultiPointClass& a, const std::vector<int>& sigma) {
  if (static_cast<int>(sigma.size()) != a.slots) throw std::invalid_argument("bad permutation");
  MultiPointClass result(*a.model, a.slots);
  for (auto& [t, c] : a.terms) result.add(t.permuted(sigma), c);
  return result;
}

inline MultiPointClass transpose(const MultiPointClass& g) {
  if (g.slots != 2) throw std::invalid_argument("transpose needs a 2-slot correspondence");
  return permute(g, {1, 0});
}

/// Composition of correspondences as operators: G ∘ Gt = pi_13*(Gt_12 . G_23).
inline MultiPointClass composeCorrespondences(const MultiPointClass& g, const MultiPointClass& gt) {
  if (g.slots != 2 || gt.slots != 2) throw std::invalid_argument("compose needs 2-slot classes");
  MultiPointClass a = pullbackInsert(gt, 2);  // Gt on slots (0,1) of S^3
  MultiPointClass b = pullbackInsert(g, 0);   // G  on slots (1,2) of S^3
  return pushforwardForget(multiply(a, b), 1);
}

/// Action of a correspondence on R(S): G(x) = pi_2*(pi_1^*(x) . G).
inline SurfaceClass applyCorrespondence(const MultiPointClass& g, const SurfaceClass& x) {
  if (g.slots != 2) throw std::invalid_argument("apply needs a 2-slot class");
  const SurfaceModel& m = *g.model;
  MultiPointClass xs(m, 2);
  for (int b = 0; b < m.basisSize(); ++b) {
    if (x.coeff[b] == 0) continue;
    MptTerm t;
    t.deco = {b, 0};
    xs.add(t, x.coeff[b]);
  }
  MultiPointClass res = pushforwardForget(multiply(xs, g), 0);
  SurfaceClass out(m);
  for (auto& [t, c] : res.terms) out.coeff[t.deco[0]] += c;
  return out;
}

/// Replaces every diagonal by its Kuenneth expansion
///   Delta_ij -> u_i c_j + c_i u_j + sum_ab (G^-1)_ab v_a(i) v_b(j)
/// and collapses formal point symbols to c. Cohomology mode only.
inline MultiPointClass kunnethExpand(const MultiPointClass& a) {
  const SurfaceModel& m = *a.model;
  if (m.mode != Mode::Cohomology)
    throw std::domain_error("kunneth_expand requires cohomology mode");
  auto ginv = m.divisors.inverse();
  int r = m.rank();
  MultiPointClass result(m, a.slots);
  for (auto& [t, c] : a.terms) {
    // point symbols -> c
    MptTerm base;
    base.deco = t.deco;
    for (auto& d : base.deco)
      if (m.isPoint(d)) d = m.cIdx();
    std::vector<std::pair<MptTerm, Rat>> parts{{base, c}};
    for (auto [i, j] : t.matching) {
      std::vector<std::pair<MptTerm, Rat>> next;
      for (auto& [pt, pc] : parts) {
        MptTerm t1 = pt;
        t1.deco[i] = 0;
        t1.deco[j] = m.cIdx();
        next.emplace_back(std::move(t1), pc);
        MptTerm t2 = pt;
        t2.deco[i] = m.cIdx();
        t2.deco[j] = 0;
        next.emplace_back(std::move(t2), pc);
        for (int va = 0; va < r; ++va)
          for (int vb = 0; vb < r; ++vb) {
            if (ginv[va][vb] == 0) continue;
            MptTerm t3 = pt;
            t3.deco[i] = m.divisorIdx(va);
            t3.deco[j] = m.divisorIdx(vb);
            next.emplace_back(std::move(t3), pc * ginv[va][vb]);
          }
      }
      parts = std::move(next);
    }
    for (auto& [pt, pc] : parts) result.add(pt, pc);
  }
  return result;
}

/// Canonical text form of a term, e.g. "D12*c3*v1_4"; slots are 1-based.
inline std::string termStr(const SurfaceModel& m, const MptTerm& t) {
  std::ostringstream os;
  bool first = true;
  auto sep = [&] { if (!first) os << "*"; first = false; };
  for (auto [i, j] : t.matching) {
    sep();
    os << "D" << (i + 1) << (j + 1);
  }
  for (int s = 0; s < t.slots(); ++s) {
    if (t.isMatched(s)) continue;
    sep();
    int b = t.deco[s];
    if (m.isUnit(b) || m.isC(b)) os << m.label(b) << (s + 1);
    else os << m.label(b) << "_" << (s + 1);
  }
  if (first) os << "1";
  return os.str();
}

inline std::string classStr(const MultiPointClass& a) {
  if (a.terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [t, c] : a.terms) {
    Rat ac = abs(c);
    os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
    first = false;
    if (ac != 1) os << ratStr(ac) << "*";
    os << termStr(*a.model, t);
  }
  return os.str();
}

}  // namespace hilbk3
