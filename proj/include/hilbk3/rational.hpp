#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hilbk3 {

/// Exact rational numbers. All arithmetic in the library is exact; no
/// floating point anywhere.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

/// Parses "p", "-p" or "p/q". Throws std::invalid_argument on malformed input.
inline Rat parseRat(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty rational");
  mpq_class r;
  if (r.set_str(std::string(s), 10) != 0)
    throw std::invalid_argument("malformed rational: " + std::string(s));
  if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + std::string(s));
  r.canonicalize();
  return r;
}

inline std::string ratStr(const Rat& r) { return r.get_str(); }

/// base^e for nonzero base, e may be negative.
inline Rat ratPow(long base, int e) {
  if (base == 0) throw std::domain_error("ratPow: zero base");
  Rat b = e < 0 ? Rat(1, base) : Rat(base);
  b.canonicalize();
  Rat acc(1);
  for (int i = std::abs(e); i > 0; --i) acc *= b;
  return acc;
}

}  // namespace hilbk3
