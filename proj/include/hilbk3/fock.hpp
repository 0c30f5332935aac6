#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hilbk3/multipoint.hpp"

namespace hilbk3 {

/// One canonical Fock basis label: a descending weight vector (the Nakajima
/// creation word) and one normal-form class term bound to its slots.
struct FockKey {
  std::vector<int> weights;  // positive, descending
  MptTerm term;

  friend auto operator<=>(const FockKey&, const FockKey&) = default;

  int weight() const { return std::accumulate(weights.begin(), weights.end(), 0); }
  int chowDegree(const SurfaceModel& m) const {
    int d = t_degreeShift();
    return d + term.degree(m);
  }

 private:
  int t_degreeShift() const {
    int d = 0;
    for (int w : weights) d += w - 1;
    return d;
  }
};

/// All permutations of slot positions preserving the (descending) weight
/// vector, as old-slot -> new-slot maps.
inline std::vector<std::vector<int>> weightStabilizer(const std::vector<int>& weights) {
  int k = static_cast<int>(weights.size());
  std::vector<std::vector<int>> perms;
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < k && ok; ++i) ok = weights[p[i]] == weights[i];
    if (ok) {
      // p maps new position i to old position p[i]; invert to old -> new
      std::vector<int> sigma(k);
      for (int i = 0; i < k; ++i) sigma[p[i]] = i;
      perms.push_back(std::move(sigma));
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return perms;
}

/// Element of the Fock-space model of ⊕_n A*(Hilb^n S). Terms are kept
/// canonical: weights descending, class symmetrized over the weight
/// stabilizer (so coefficients are constant on stabilizer orbits), and in
/// cohomology mode diagonals Kuenneth-expanded and points collapsed to c.
struct FockVector {
  const SurfaceModel* model = nullptr;
  std::map<FockKey, Rat> terms;

  FockVector() = default;
  explicit FockVector(const SurfaceModel& m) : model(&m) {}

  bool isZero() const { return terms.empty(); }

  void addKey(const FockKey& k, const Rat& c) {
    if (c == 0) return;
    auto it = terms.find(k);
    if (it == terms.end()) {
      terms.emplace(k, c);
    } else {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  /// Adds coeff * q_{w_1}...q_{w_k}(cls)|0> after canonicalization.
  void addState(std::vector<int> weights, MultiPointClass cls, const Rat& coeff) {
    if (coeff == 0 || cls.isZero()) return;
    int k = static_cast<int>(weights.size());
    if (cls.slots != k) throw std::invalid_argument("class/weight arity mismatch");
    for (int w : weights)
      if (w <= 0) throw std::invalid_argument("creation weights must be positive");
    // sort weights descending, dragging slots along
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return weights[a] > weights[b]; });
    std::vector<int> sigma(k);
    for (int i = 0; i < k; ++i) sigma[order[i]] = i;
    std::sort(weights.begin(), weights.end(), std::greater<int>());
    cls = permute(cls, sigma);
    if (model->mode == Mode::Cohomology) cls = kunnethExpand(cls);
    auto stab = weightStabilizer(weights);
    Rat inv(1, static_cast<long>(stab.size()));
    inv.canonicalize();
    for (auto& p : stab) {
      MultiPointClass img = permute(cls, p);
      for (auto& [t, c] : img.terms) addKey({weights, t}, coeff * inv * c);
    }
  }

  FockVector& operator+=(const FockVector& o) {
    for (auto& [k, c] : o.terms) addKey(k, c);
    return *this;
  }
  FockVector& operator-=(const FockVector& o) {
    for (auto& [k, c] : o.terms) addKey(k, -c);
    return *this;
  }
  FockVector& operator*=(const Rat& s) {
    if (s == 0) { terms.clear(); return *this; }
    for (auto& [k, c] : terms) c *= s;
    return *this;
  }
  friend FockVector operator+(FockVector a, const FockVector& b) { return a += b; }
  friend FockVector operator-(FockVector a, const FockVector& b) { return a -= b; }
  friend FockVector operator*(const Rat& s, FockVector a) { return a *= s; }
  friend bool operator==(const FockVector& a, const FockVector& b) { return a.terms == b.terms; }
};

inline FockVector vacuum(const SurfaceModel& m) {
  FockVector v(m);
  v.addKey(FockKey{{}, MptTerm{}}, Rat(1));
  return v;
}

/// (1/n!) q_1(u)^n |0>, the fundamental class of Hilb^n.
inline FockVector unitClass(const SurfaceModel& m, int n) {
  if (n < 0) throw std::invalid_argument("negative weight");
  FockVector v(m);
  Rat c(1);
  for (int i = 2; i <= n; ++i) c /= i;
  MptTerm t;
  t.deco.assign(n, 0);
  v.addKey(FockKey{std::vector<int>(n, 1), t}, c);
  return v;
}

/// Splits into bigraded (weight, chowDegree) components.
inline std::map<std::pair<int, int>, FockVector> grade(const FockVector& x) {
  std::map<std::pair<int, int>, FockVector> out;
  for (auto& [k, c] : x.terms) {
    auto key = std::make_pair(k.weight(), k.chowDegree(*x.model));
    auto it = out.find(key);
    if (it == out.end()) it = out.emplace(key, FockVector(*x.model)).first;
    it->second.addKey(k, c);
  }
  return out;
}

namespace detail {

struct WickItem {
  Rat coeff;
  std::vector<int> word;  // signed indices; position p <-> class slot p
  MultiPointClass cls;
};

}  // namespace detail

/// Applies the Nakajima word q_{i_1}...q_{i_m}(Gamma) to x by Wick
/// contraction. Annihilators move rightward; passing q_{i}(.) over q_{n}(.)
/// with i + n = 0 contracts with factor i (the commutation relation
/// [q_m, q_n] = m delta_{m+n,0} id x Delta), merging the two class slots via
/// the diagonal and integrating them out. A negative index reaching the
/// vacuum kills the term. Indices equal to zero contribute nothing (q_0 = 0).
inline FockVector applyWord(const std::vector<int>& indices, const MultiPointClass& gamma,
                            const FockVector& x) {
  const SurfaceModel& m = *x.model;
  int mw = static_cast<int>(indices.size());
  if (gamma.slots != mw) throw std::invalid_argument("operator class arity mismatch");
  FockVector result(m);
  for (int i : indices)
    if (i == 0) return result;
  if (gamma.isZero()) return result;

  for (auto& [key, xc] : x.terms) {
    int k = static_cast<int>(key.weights.size());
    std::vector<int> word = indices;
    word.insert(word.end(), key.weights.begin(), key.weights.end());
    // tensor gamma with the state term on disjoint slots; the pieces can
    // still interact (the same point symbol on both sides), so reduce
    MultiPointClass cls(m, mw + k);
    {
      std::vector<detail::RedItem> raw;
      for (auto& [gt, gc] : gamma.terms) {
        detail::RedItem it{gc, gt.matching, gt.deco};
        it.deco.insert(it.deco.end(), key.term.deco.begin(), key.term.deco.end());
        for (auto [i, j] : key.term.matching) detail::addEdge(it, i + mw, j + mw);
        raw.push_back(std::move(it));
      }
      detail::reduceInto(m, std::move(raw), cls.terms);
    }
    std::vector<detail::WickItem> work{{xc, std::move(word), std::move(cls)}};
    while (!work.empty()) {
      detail::WickItem it = std::move(work.back());
      work.pop_back();
      if (it.coeff == 0 || it.cls.isZero()) continue;
      int n = static_cast<int>(it.word.size());
      int p = -1;
      for (int q = n - 1; q >= 0; --q)
        if (it.word[q] < 0) { p = q; break; }
      if (p < 0) {
        result.addState(it.word, it.cls, it.coeff);
        continue;
      }
      if (p == n - 1) continue;  // annihilator hits the vacuum
      // contraction branch
      if (it.word[p] + it.word[p + 1] == 0) {
        MultiPointClass diag(m, n);
        MptTerm dt;
        dt.matching = {{p, p + 1}};
        dt.deco.assign(n, 0);
        diag.add(dt, Rat(1));
        MultiPointClass merged =
            pushforwardForget(pushforwardForget(multiply(it.cls, diag), p + 1), p);
        std::vector<int> w2 = it.word;
        w2.erase(w2.begin() + p, w2.begin() + p + 2);
        work.push_back({it.coeff * it.word[p], std::move(w2), std::move(merged)});
      }
      // commute branch
      std::vector<int> sigma(n);
      std::iota(sigma.begin(), sigma.end(), 0);
      std::swap(sigma[p], sigma[p + 1]);
      std::swap(it.word[p], it.word[p + 1]);
      work.push_back({std::move(it.coeff), std::move(it.word), permute(it.cls, sigma)});
    }
  }
  return result;
}

inline FockVector applyWord(const std::vector<int>& indices, const SurfaceClass& gamma,
                            const FockVector& x) {
  const SurfaceModel& m = *x.model;
  if (indices.size() != 1) throw std::invalid_argument("single-index overload");
  MultiPointClass g(m, 1);
  for (int b = 0; b < m.basisSize(); ++b)
    if (gamma.coeff[b] != 0) {
      MptTerm t;
      t.deco = {b};
      g.add(t, gamma.coeff[b]);
    }
  return applyWord(indices, g, x);
}

// -- canonical basis enumeration ---------------------------------------------

inline std::vector<std::vector<int>> partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int rest, int maxPart) -> void {
    if (rest == 0) { out.push_back(cur); return; }
    for (int p = std::min(rest, maxPart); p >= 1; --p) {
      cur.push_back(p);
      self(self, rest - p, p);
      cur.pop_back();
    }
  };
  rec(rec, n, n);
  return out;
}

namespace detail {

inline void enumMatchings(int k, std::vector<bool>& used, std::vector<std::pair<int, int>>& cur,
                          std::vector<std::vector<std::pair<int, int>>>& out) {
  int i = 0;
  while (i < k && used[i]) ++i;
  if (i == k) { out.push_back(cur); return; }
  used[i] = true;
  // slot i unmatched
  enumMatchings(k, used, cur, out);
  // slot i matched to some j > i
  for (int j = i + 1; j < k; ++j) {
    if (used[j]) continue;
    used[j] = true;
    cur.emplace_back(i, j);
    enumMatchings(k, used, cur, out);
    cur.pop_back();
    used[j] = false;
  }
  used[i] = false;
}

}  // namespace detail

/// All normal-form terms on k slots, ordered. In cohomology mode the basis is
/// matching-free and point-free (diagonals expand, points collapse to c).
inline std::vector<MptTerm> enumTerms(const SurfaceModel& m, int k) {
  std::vector<std::vector<std::pair<int, int>>> matchings;
  if (m.mode == Mode::Cohomology) {
    matchings.push_back({});
  } else {
    std::vector<bool> used(k, false);
    std::vector<std::pair<int, int>> cur;
    detail::enumMatchings(k, used, cur, matchings);
  }
  std::vector<int> decoChoices;
  for (int b = 0; b < m.basisSize(); ++b)
    if (m.mode != Mode::Cohomology || !m.isPoint(b)) decoChoices.push_back(b);

  std::vector<MptTerm> out;
  for (auto& match : matchings) {
    std::vector<bool> matched(k, false);
    for (auto [i, j] : match) matched[i] = matched[j] = true;
    std::vector<int> freeSlots;
    for (int s = 0; s < k; ++s)
      if (!matched[s]) freeSlots.push_back(s);
    std::vector<int> pick(freeSlots.size(), 0);
    while (true) {
      MptTerm t;
      t.matching = match;
      std::sort(t.matching.begin(), t.matching.end());
      t.deco.assign(k, 0);
      bool normal = true;
      for (size_t i = 0; i < freeSlots.size(); ++i) {
        int b = decoChoices[pick[i]];
        // a point symbol may decorate at most one slot
        for (size_t j = 0; j < i && normal; ++j)
          if (m.isPoint(b) && decoChoices[pick[j]] == b) normal = false;
        t.deco[freeSlots[i]] = b;
      }
      if (normal) out.push_back(std::move(t));
      int pos = static_cast<int>(pick.size()) - 1;
      while (pos >= 0 && pick[pos] + 1 == static_cast<int>(decoChoices.size())) pick[pos--] = 0;
      if (pos < 0) break;
      ++pick[pos];
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Canonical basis of the weight-n graded piece: per partition (descending
/// lex), the lexicographically minimal representative of each stabilizer
/// orbit of normal-form terms.
inline std::vector<FockKey> weightBasis(const SurfaceModel& m, int n) {
  std::vector<FockKey> out;
  for (auto& lambda : partitions(n)) {
    auto stab = weightStabilizer(lambda);
    for (auto& t : enumTerms(m, static_cast<int>(lambda.size()))) {
      bool minimal = true;
      for (auto& p : stab)
        if (t.permuted(p) < t) { minimal = false; break; }
      if (minimal) out.push_back({lambda, t});
    }
  }
  return out;
}

/// The basis vector for a canonical key: coefficient 1 on every key in its
/// stabilizer orbit (the symmetrization of the representative, scaled so the
/// representative's coefficient is 1).
inline FockVector basisVector(const SurfaceModel& m, const FockKey& key) {
  FockVector v(m);
  std::set<MptTerm> orbit;
  for (auto& p : weightStabilizer(key.weights)) orbit.insert(key.term.permuted(p));
  for (auto& t : orbit) v.addKey({key.weights, t}, Rat(1));
  return v;
}

/// Coordinates of a canonical vector with respect to weightBasis keys:
/// simply the coefficient at each representative.
inline Rat coordinate(const FockVector& v, const FockKey& key) {
  auto it = v.terms.find(key);
  return it == v.terms.end() ? Rat(0) : it->second;
}

inline std::string stateStr(const SurfaceModel& m, const FockKey& k) {
  std::ostringstream os;
  for (int w : k.weights) os << "q" << w;
  if (k.weights.empty()) os << "vac";
  os << "[" << termStr(m, k.term) << "]";
  return os.str();
}

inline std::string fockStr(const FockVector& v) {
  if (v.terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [k, c] : v.terms) {
    if (!first) os << " + ";
    first = false;
    os << ratStr(c) << " * " << stateStr(*v.model, k);
  }
  return os.str();
}

}  // namespace hilbk3
