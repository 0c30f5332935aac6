#pragma once

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hilbk3/operators.hpp"

namespace hilbk3 {

/// The quadratic space W = A^1(Hilb^n) + U with fixed basis
/// (v_1..v_r, delta, e, f): divisors with the surface Gram form,
/// (delta,delta) = 2-2n, and the hyperbolic plane (e,f) = 1.
struct WedgeAmbient {
  const SurfaceModel* model = nullptr;
  int n = 0;

  WedgeAmbient() = default;
  WedgeAmbient(const SurfaceModel& m, int weight) : model(&m), n(weight) {}

  int dim() const { return model->rank() + 3; }
  int deltaIdx() const { return model->rank(); }
  int eIdx() const { return model->rank() + 1; }
  int fIdx() const { return model->rank() + 2; }

  Rat pairing(int a, int b) const {
    int r = model->rank();
    if (a < r && b < r) return model->divisors.pairing(a, b);
    if (a == deltaIdx() && b == deltaIdx()) return Rat(2 - 2 * n);
    if ((a == eIdx() && b == fIdx()) || (a == fIdx() && b == eIdx())) return Rat(1);
    return Rat(0);
  }

  std::string label(int a) const {
    int r = model->rank();
    if (a < r) return model->divisors.labels[a];
    if (a == deltaIdx()) return "delta";
    return a == eIdx() ? "e" : "f";
  }

  friend bool operator==(const WedgeAmbient& x, const WedgeAmbient& y) {
    return x.model == y.model && x.n == y.n;
  }
};

/// Element of the Lie algebra wedge^2(W); coords over basis pairs (i < j).
struct WedgeElement {
  WedgeAmbient ambient;
  std::map<std::pair<int, int>, Rat> coords;

  WedgeElement() = default;
  explicit WedgeElement(WedgeAmbient a) : ambient(std::move(a)) {}

  /// coeff * b_i ^ b_j (antisymmetry normalizes to i < j).
  void add(int i, int j, const Rat& c) {
    if (i == j || c == 0) return;
    Rat v = c;
    if (i > j) { std::swap(i, j); v = -v; }
    auto key = std::make_pair(i, j);
    auto it = coords.find(key);
    if (it == coords.end()) {
      coords.emplace(key, v);
    } else {
      it->second += v;
      if (it->second == 0) coords.erase(it);
    }
  }

  static WedgeElement wedge(WedgeAmbient a, int i, int j, const Rat& c = Rat(1)) {
    WedgeElement x(std::move(a));
    x.add(i, j, c);
    return x;
  }

  bool isZero() const { return coords.empty(); }

  WedgeElement& operator+=(const WedgeElement& o) {
    if (!(ambient == o.ambient)) throw std::invalid_argument("ambient mismatch");
    for (auto& [ij, c] : o.coords) add(ij.first, ij.second, c);
    return *this;
  }
  WedgeElement& operator*=(const Rat& s) {
    if (s == 0) { coords.clear(); return *this; }
    for (auto& [ij, c] : coords) c *= s;
    return *this;
  }
  friend WedgeElement operator+(WedgeElement a, const WedgeElement& b) { return a += b; }
  friend WedgeElement operator-(WedgeElement a, const WedgeElement& b) {
    WedgeElement nb = b;
    nb *= Rat(-1);
    return a += nb;
  }
  friend WedgeElement operator*(const Rat& s, WedgeElement a) { return a *= s; }
  friend bool operator==(const WedgeElement& a, const WedgeElement& b) {
    return a.ambient == b.ambient && a.coords == b.coords;
  }
};

/// [a^b, c^d] = (a,d) b^c - (a,c) b^d - (b,d) a^c + (b,c) a^d, bilinearly.
inline WedgeElement wedgeBracket(const WedgeElement& x, const WedgeElement& y) {
  if (!(x.ambient == y.ambient)) throw std::invalid_argument("ambient mismatch");
  const WedgeAmbient& W = x.ambient;
  WedgeElement out(W);
  for (auto& [ab, xc] : x.coords)
    for (auto& [cd, yc] : y.coords) {
      auto [a, b] = ab;
      auto [c, d] = cd;
      Rat s = xc * yc;
      out.add(b, c, s * W.pairing(a, d));
      out.add(b, d, -s * W.pairing(a, c));
      out.add(a, c, -s * W.pairing(b, d));
      out.add(a, d, s * W.pairing(b, c));
    }
  return out;
}

/// so(W)-action: (a^b) v = (b,v) a - (a,v) b, as a coordinate vector over W.
inline std::vector<Rat> soAction(const WedgeElement& x, const std::vector<Rat>& v) {
  const WedgeAmbient& W = x.ambient;
  if (static_cast<int>(v.size()) != W.dim()) throw std::invalid_argument("vector dim mismatch");
  std::vector<Rat> out(W.dim(), Rat(0));
  for (auto& [ab, c] : x.coords) {
    auto [a, b] = ab;
    Rat bv(0), av(0);
    for (int i = 0; i < W.dim(); ++i) {
      bv += W.pairing(b, i) * v[i];
      av += W.pairing(a, i) * v[i];
    }
    out[a] += c * bv;
    out[b] -= c * av;
  }
  return out;
}

/// The representation map into Nakajima operator expressions:
///   e ^ a   -> e_a
///   f ^ a   -> -1/2 ft_a          (from ft_a = -2 f^a)
///   e ^ f   -> 1/2 h              (from h = 2 e^f)
///   a ^ b   -> 1/2 kappa_{ab} - 1/2 (a,b) h   for a, b in A^1(Hilb^n)
/// extended linearly.
inline OperatorExpr rho(const WedgeElement& x) {
  const WedgeAmbient& W = x.ambient;
  const SurfaceModel& m = *W.model;
  auto divClass = [&](int i) {
    return i == W.deltaIdx() ? HilbDivisor::deltaClass(m) : HilbDivisor::divisor(m, i);
  };
  std::vector<OperatorExpr> parts;
  for (auto& [ab, c] : x.coords) {
    auto [a, b] = ab;
    bool aDiv = a <= W.deltaIdx(), bDiv = b <= W.deltaIdx();
    if (aDiv && bDiv) {
      HilbDivisor A = divClass(a), B = divClass(b);
      parts.push_back(OperatorExpr::scaled(c / 2, kappa(m, A, B)));
      Rat pair = bbPairing(m, A, B, W.n);
      if (pair != 0) parts.push_back(OperatorExpr::scaled(-c * pair / 2, hOp(m)));
    } else if (aDiv || bDiv) {
      int u = aDiv ? b : a;              // the U-side factor
      int cl = aDiv ? a : b;             // the divisor-side factor
      Rat sign = aDiv ? -c : c;          // normalize to (u-basis ^ class)
      if (u == W.eIdx()) {
        parts.push_back(OperatorExpr::scaled(sign, eGeneral(m, divClass(cl))));
      } else {
        parts.push_back(OperatorExpr::scaled(-sign / 2, ftGeneral(m, divClass(cl))));
      }
    } else {
      // e ^ f (or f ^ e, already normalized to e < f with sign in c)
      parts.push_back(OperatorExpr::scaled(c / 2, hOp(m)));
    }
  }
  return OperatorExpr::sum(std::move(parts));
}

}  // namespace hilbk3
