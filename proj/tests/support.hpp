#pragma once

#include <random>
#include <vector>

#include "hilbk3/operators.hpp"

namespace support {

using namespace hilbk3;

/// id x Gamma x id acting in slot i of a k-slot class.
inline MultiPointClass applyInSlot(const MultiPointClass& g, const MultiPointClass& c, int i) {
  int k = c.slots;
  MultiPointClass lifted = pullbackInsert(c, i + 1);  // old slot i feeds Gamma
  MultiPointClass corr = g;
  for (int t = 0; t < i; ++t) corr = pullbackInsert(corr, 0);
  while (corr.slots < k + 1) corr = pullbackInsert(corr, corr.slots);
  return pushforwardForget(multiply(lifted, corr), i);
}

/// Right side of the commutator formula for [T_Gamma, q_{n_1}..q_{n_k}(C)].
inline OperatorExpr tBracketRhs(const SurfaceModel& m, const MultiPointClass& g,
                                const std::vector<int>& indices, const MultiPointClass& c) {
  int deg = g.degree();
  MultiPointClass gt = transpose(g);
  std::vector<OperatorExpr> parts;
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] > 0) {
      parts.push_back(OperatorExpr::scaled(
          ratPow(indices[i], deg - 2),
          nakajimaWord(m, indices, applyInSlot(g, c, static_cast<int>(i)))));
    } else {
      Rat sign = (deg - 3) % 2 == 0 ? Rat(1) : Rat(-1);
      parts.push_back(OperatorExpr::scaled(
          sign * ratPow(indices[i], deg - 2),
          nakajimaWord(m, indices, applyInSlot(gt, c, static_cast<int>(i)))));
    }
  }
  return OperatorExpr::sum(std::move(parts));
}

inline SurfaceModel k3Rank1(int points = 0, Mode mode = Mode::Chow) {
  return SurfaceModel(QuadraticSpace({{Rat(2)}}), points, mode);
}

inline SurfaceModel k3Rank2(int points = 0, Mode mode = Mode::Chow) {
  return SurfaceModel(QuadraticSpace({{Rat(2), Rat(1)}, {Rat(1), Rat(-2)}}), points, mode);
}

inline SurfaceModel k3Rank3(int points = 0, Mode mode = Mode::Chow) {
  return SurfaceModel(
      QuadraticSpace({{Rat(2), Rat(1), Rat(0)}, {Rat(1), Rat(-2), Rat(3)}, {Rat(0), Rat(3), Rat(4)}}),
      points, mode);
}

inline Rat randomRat(std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-6, 6), den(1, 4);
  int n = num(rng);
  if (n == 0) n = 1;
  return rat(n, den(rng));
}

inline RawFactor randomFactor(std::mt19937& rng, const SurfaceModel& m, int k) {
  std::uniform_int_distribution<int> slot(0, k - 1), basis(0, m.basisSize() - 1);
  if (k >= 2 && std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
    int i = slot(rng), j = slot(rng);
    while (j == i) j = slot(rng);
    return RawFactor::diag(i, j);
  }
  return RawFactor::cls(slot(rng), basis(rng));
}

inline std::vector<RawFactor> randomFactors(std::mt19937& rng, const SurfaceModel& m, int k,
                                            int count) {
  std::vector<RawFactor> out;
  for (int i = 0; i < count; ++i) out.push_back(randomFactor(rng, m, k));
  return out;
}

/// Random already-reduced class on k slots with few terms.
inline MultiPointClass randomClass(std::mt19937& rng, const SurfaceModel& m, int k, int maxFactors) {
  std::uniform_int_distribution<int> nterm(1, 3), nfac(0, maxFactors);
  MultiPointClass out(m, k);
  int terms = nterm(rng);
  for (int t = 0; t < terms; ++t)
    out += reduce(m, k, randomFactors(rng, m, k, nfac(rng)), randomRat(rng));
  return out;
}

/// Random homogeneous reduced class: a single random monomial rescaled.
inline MultiPointClass randomHomogeneous(std::mt19937& rng, const SurfaceModel& m, int k,
                                         int maxFactors) {
  for (int tries = 0; tries < 64; ++tries) {
    std::uniform_int_distribution<int> nfac(0, maxFactors);
    MultiPointClass c = reduce(m, k, randomFactors(rng, m, k, nfac(rng)), randomRat(rng));
    if (!c.isZero()) return c;
  }
  return MultiPointClass::one(m, k);
}

/// The grouping and order of a product must not matter: reducing all factors
/// at once, reducing a shuffle, and multiplying separately reduced halves all
/// give the same normal form.
inline bool confluenceTrial(std::mt19937& rng, const SurfaceModel& m) {
  std::uniform_int_distribution<int> slots(1, 4), nfac(1, 6);
  int k = slots(rng);
  auto factors = randomFactors(rng, m, k, nfac(rng));
  MultiPointClass a = reduce(m, k, factors);

  auto shuffled = factors;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  if (!(reduce(m, k, shuffled) == a)) return false;

  std::uniform_int_distribution<int> cut(0, static_cast<int>(factors.size()));
  int mid = cut(rng);
  std::vector<RawFactor> left(factors.begin(), factors.begin() + mid);
  std::vector<RawFactor> right(factors.begin() + mid, factors.end());
  if (!(multiply(reduce(m, k, left), reduce(m, k, right)) == a)) return false;

  // reducing a normal form must be the identity
  return multiply(a, MultiPointClass::one(m, k)) == a;
}

}  // namespace support
