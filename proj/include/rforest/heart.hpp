#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rforest/metric.hpp"

namespace rforest {

// A finite pointed max-metric structure: points carry radii in [0,1],
// d(x,y) = max(radius x, radius y) for distinct points, and the basepoint is
// a point of radius zero. Density of the radius multiset in [0,1] is tracked
// at granularity delta.
struct HeartStructure {
  std::vector<Rat> radii;  // includes the basepoint's 0
  Rat delta;

  Ext dist(size_t i, size_t j) const;
  FiniteExtendedMetric metric() const;
  // Index of the basepoint: the first zero radius.
  std::optional<size_t> star() const;
};

struct HeartReport {
  bool valid = true;
  bool radii_in_range = true;
  bool has_star = true;
  bool max_metric_ok = true;   // the induced matrix passes check_metric
  bool ultrametric_ok = true;  // d(x,z) <= max(d(x,y), d(y,z))
  bool density_ok = true;
  Rat density_achieved;  // smallest delta' for which the radii are delta'-dense
  std::vector<std::string> notes;
};

HeartReport validate_heart(const HeartStructure& m);

// The quantifier-free data of a tuple with parameters: radii, pairwise
// distances, distances to parameters, canonically ordered.
struct HeartFingerprint {
  std::vector<Rat> radii;                 // d(x_i, *)
  std::vector<std::vector<Rat>> pairs;    // d(x_i, x_j), i < j
  std::vector<std::vector<Rat>> to_params;  // d(x_i, a) per parameter

  friend bool operator==(const HeartFingerprint&, const HeartFingerprint&) = default;
};

HeartFingerprint qf_fingerprint(const HeartStructure& m, std::span<const size_t> tuple,
                                std::span<const size_t> params);

struct OrbitReport {
  bool pass = true;
  size_t swaps_checked = 0;
  std::vector<std::pair<size_t, size_t>> violations;
};

// Every transposition of two equal-radius non-parameter points must preserve
// all pairwise distances and the fingerprint of the parameter tuple.
OrbitReport orbit_check(const HeartStructure& m, std::span<const size_t> params);

// Multiplies all radii by s in (0,1]; preserves the zero-distance pattern.
HeartStructure scale_structure(const HeartStructure& m, const Rat& s);

}  // namespace rforest
