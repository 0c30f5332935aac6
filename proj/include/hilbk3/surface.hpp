#pragma once

#include <cassert>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hilbk3/rational.hpp"

namespace hilbk3 {

/// A finite-rank lattice with a symmetric bilinear form, given by its Gram
/// matrix. Invertibility is only required (and checked) when a Kuenneth
/// expansion or a dual basis is requested.
struct QuadraticSpace {
  int rank = 0;
  std::vector<std::vector<Rat>> gram;    // rank x rank, symmetric
  std::vector<std::string> labels;

  QuadraticSpace() = default;
  QuadraticSpace(std::vector<std::vector<Rat>> g, std::vector<std::string> names = {})
      : rank(static_cast<int>(g.size())), gram(std::move(g)), labels(std::move(names)) {
    for (int i = 0; i < rank; ++i) {
      if (static_cast<int>(gram[i].size()) != rank)
        throw std::invalid_argument("gram matrix not square");
      for (int j = 0; j < i; ++j)
        if (gram[i][j] != gram[j][i]) throw std::invalid_argument("gram matrix not symmetric");
    }
    if (labels.empty())
      for (int i = 0; i < rank; ++i) labels.push_back("v" + std::to_string(i + 1));
  }

  const Rat& pairing(int i, int j) const { return gram[i][j]; }

  /// Exact inverse by Gauss-Jordan. Throws on singular Gram.
  std::vector<std::vector<Rat>> inverse() const {
    int n = rank;
    std::vector<std::vector<Rat>> a = gram, inv(n, std::vector<Rat>(n, Rat(0)));
    for (int i = 0; i < n; ++i) inv[i][i] = 1;
    for (int col = 0; col < n; ++col) {
      int piv = -1;
      for (int r = col; r < n; ++r)
        if (a[r][col] != 0) { piv = r; break; }
      if (piv < 0) throw std::domain_error("singular Gram matrix");
      std::swap(a[piv], a[col]);
      std::swap(inv[piv], inv[col]);
      Rat d = a[col][col];
      for (int j = 0; j < n; ++j) { a[col][j] /= d; inv[col][j] /= d; }
      for (int r = 0; r < n; ++r) {
        if (r == col || a[r][col] == 0) continue;
        Rat f = a[r][col];
        for (int j = 0; j < n; ++j) { a[r][j] -= f * a[col][j]; inv[r][j] -= f * inv[col][j]; }
      }
    }
    return inv;
  }
};

enum class Mode { Chow, Cohomology };

/// Model of the even Chow ring R(S) of a K3 surface: basis
///   u (unit, deg 0), v_1..v_r (divisors, deg 1), c (Beauville-Voisin
///   class, deg 2), p_1..p_s (formal point classes, deg 2).
/// Ring law: u is the unit, v_i v_j = G_ij c, and every other product of
/// positive-degree basis elements vanishes. Integrals: c and p_i integrate
/// to 1, u and v to 0. K3 is hard-wired: e(S) = 24.
struct SurfaceModel {
  QuadraticSpace divisors;
  int points = 0;            // number of formal point symbols p_1..p_s
  Mode mode = Mode::Chow;
  static constexpr int euler = 24;

  SurfaceModel() = default;
  SurfaceModel(QuadraticSpace div, int pts = 0, Mode m = Mode::Chow)
      : divisors(std::move(div)), points(pts), mode(m) {
    if (points < 0) throw std::invalid_argument("negative point count");
  }

  int rank() const { return divisors.rank; }
  int basisSize() const { return 2 + rank() + points; }

  // basis indexing: 0 = u, 1..r = v_i, r+1 = c, r+2.. = p_i
  static constexpr int unitIdx = 0;
  int cIdx() const { return rank() + 1; }
  int divisorIdx(int i) const { return 1 + i; }        // i in [0, r)
  int pointIdx(int i) const { return rank() + 2 + i; } // i in [0, s)

  bool isUnit(int b) const { return b == 0; }
  bool isDivisor(int b) const { return b >= 1 && b <= rank(); }
  bool isC(int b) const { return b == cIdx(); }
  bool isPoint(int b) const { return b > cIdx(); }

  int degree(int b) const { return isUnit(b) ? 0 : (isDivisor(b) ? 1 : 2); }

  std::string label(int b) const {
    if (isUnit(b)) return "u";
    if (isDivisor(b)) return divisors.labels[b - 1];
    if (isC(b)) return "c";
    return "p" + std::to_string(b - cIdx());
  }

  int labelToBasis(const std::string& name) const {
    for (int b = 0; b < basisSize(); ++b)
      if (label(b) == name) return b;
    throw std::invalid_argument("unknown basis label: " + name);
  }

  /// Integral over S of a basis class.
  Rat integral(int b) const { return degree(b) == 2 ? Rat(1) : Rat(0); }

  /// Product of two basis classes as a list of (basis, coeff) pairs.
  std::vector<std::pair<int, Rat>> basisProduct(int a, int b) const {
    if (isUnit(a)) return {{b, Rat(1)}};
    if (isUnit(b)) return {{a, Rat(1)}};
    if (isDivisor(a) && isDivisor(b)) {
      Rat g = divisors.pairing(a - 1, b - 1);
      if (g == 0) return {};
      return {{cIdx(), g}};
    }
    return {};  // degree > 2 vanishes
  }
};

/// Element of R(S): dense coefficient vector over the model basis.
struct SurfaceClass {
  std::vector<Rat> coeff;

  SurfaceClass() = default;
  explicit SurfaceClass(const SurfaceModel& m) : coeff(m.basisSize(), Rat(0)) {}
  static SurfaceClass basis(const SurfaceModel& m, int b) {
    SurfaceClass x(m);
    x.coeff[b] = 1;
    return x;
  }

  bool isZero() const {
    for (auto& c : coeff)
      if (c != 0) return false;
    return true;
  }

  SurfaceClass& operator+=(const SurfaceClass& o) {
    for (size_t i = 0; i < coeff.size(); ++i) coeff[i] += o.coeff[i];
    return *this;
  }
  SurfaceClass& operator*=(const Rat& s) {
    for (auto& c : coeff) c *= s;
    return *this;
  }
  friend bool operator==(const SurfaceClass&, const SurfaceClass&) = default;
};

/// Intersection pairing <x,y> = \int_{S^2} Delta . (x tensor y); nonzero only
/// between complementary degrees (u with c/p, divisor with divisor).
inline Rat surfacePairing(const SurfaceModel& m, int a, int b) {
  if (m.isUnit(a)) return m.integral(b);
  if (m.isUnit(b)) return m.integral(a);
  if (m.isDivisor(a) && m.isDivisor(b)) return m.divisors.pairing(a - 1, b - 1);
  return Rat(0);
}

}  // namespace hilbk3
