#pragma once

#include <gmpxx.h>

#include <string>

#include "rforest/error.hpp"

namespace rforest {

// All core arithmetic is exact; Rat values are always kept canonicalized.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// Accepts "p/q" or "p" with optional sign. Rejects zero denominators.
inline Rat parse_rat(const std::string& s) {
  mpq_class r;
  if (s.empty() || r.set_str(s, 10) != 0) throw Error(ErrorCode::BadInput, "bad rational: '" + s + "'");
  if (r.get_den() == 0) throw Error(ErrorCode::BadInput, "zero denominator: '" + s + "'");
  r.canonicalize();
  return r;
}

// Doubles are binary fractions, so this conversion is exact.
inline Rat rat_from_double(double x) { return mpq_class(x); }

inline std::string rat_str(const Rat& r) { return r.get_str(); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

// Clamp to [0,1]; predicate values live there.
inline Rat clamp01(const Rat& x) {
  if (x < 0) return Rat(0);
  if (x > 1) return Rat(1);
  return x;
}

}  // namespace rforest
