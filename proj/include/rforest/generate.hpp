#pragma once

#include <cstdint>
#include <random>

#include "rforest/hull.hpp"

namespace rforest {

class AnchorPredicate;
struct RFRStructure;
struct HeartStructure;

// All randomness flows through this wrapper. Values are derived from raw
// mt19937_64 output with explicit arithmetic, so a seed pins every byte of
// generated data independent of the standard library's distribution choices.
class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  uint64_t bits() { return eng_(); }
  // Uniform in [0, n).
  uint64_t below(uint64_t n) { return n == 0 ? 0 : bits() % n; }
  // Uniform rational k/den with k in [lo_num, hi_num].
  Rat ratio(uint64_t lo_num, uint64_t hi_num, uint64_t den) {
    return rat(static_cast<long>(lo_num + below(hi_num - lo_num + 1)), static_cast<long>(den));
  }
  bool chance(uint64_t num, uint64_t den) { return below(den) < num; }

private:
  std::mt19937_64 eng_;
};

struct RandomForest {
  FiniteExtendedMetric metric;
  HullPtr hull;
};

// Deterministic per seed; the metric is read off an explicitly built weighted
// tree, so it always passes is_tree_embeddable. Edge lengths are multiples of
// scale/16 between scale/16 and 2*scale.
RandomForest random_forest(uint64_t seed, size_t n_generators, size_t n_components, const Rat& scale);

// A random point of the hull: a vertex or a position at a multiple of 1/16
// along an edge.
PointRef random_point(Rng& rng, const ForestHull& h);

// A random structure: random forest plus a canonicalized random anchor set
// and tuple = all generators.
RFRStructure random_structure(uint64_t seed, size_t n_generators, size_t n_components, size_t n_anchors,
                              const Rat& scale);

HeartStructure random_heart(uint64_t seed, size_t n_points, const Rat& delta);

}  // namespace rforest
