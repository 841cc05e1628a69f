#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "rforest/predicate.hpp"

namespace rforest {

// A finite sample of a pointed structure: points on a hull with cached
// pairwise distances and predicate values, plus the sample indices of the
// pinned tuple (in tuple order).
class SampledStructure {
public:
  SampledStructure(HullPtr hull, std::optional<AnchorPredicate> pred, std::vector<PointRef> pts,
                   std::vector<size_t> pinned);

  size_t size() const { return pts_.size(); }
  const std::vector<PointRef>& points() const { return pts_; }
  const std::vector<size_t>& pinned() const { return pinned_; }
  const Ext& dist(size_t i, size_t j) const { return d_[i][j]; }
  const Rat& rel(size_t i, size_t j) const { return r_[i][j]; }
  bool has_predicate() const { return pred_.has_value(); }
  const HullPtr& hull() const { return hull_; }

private:
  HullPtr hull_;
  std::optional<AnchorPredicate> pred_;
  std::vector<PointRef> pts_;
  std::vector<size_t> pinned_;
  std::vector<std::vector<Ext>> d_;
  std::vector<std::vector<Rat>> r_;
};

// Samples `domain` of the structure's hull at the given subdivision level and
// appends the tuple points (which become the pins). `extra` points are forced
// into the sample.
SampledStructure sample_structure(const RFRStructure& s, const SubHull& domain, int subdivisions,
                                  std::span<const PointRef> extra = {});

// A total, surjective relation between samples, optionally pinned. Pairs are
// kept sorted; the pair set is the identity of the correlation.
struct Correlation {
  size_t nA = 0, nB = 0;
  std::vector<std::pair<uint32_t, uint32_t>> pairs;

  void canonicalize();
  bool is_valid(std::span<const std::pair<uint32_t, uint32_t>> pins) const;
};

struct DistortionReport {
  Rat dis_metric;
  Rat dis_pred;
  Rat dis;  // max of the two
  // The pair-of-pairs attaining dis, as indices into Correlation::pairs.
  std::pair<size_t, size_t> witness;
};

// sup over pair-pairs of |K-clamped distance difference|; infinite distances
// clamp to K.
Rat dis_metric_K(const SampledStructure& A, const SampledStructure& B, const Correlation& O, const Rat& K);

// The full truncated distortion; predicate term unclamped (values in [0,1]).
DistortionReport dis_K(const SampledStructure& A, const SampledStructure& B, const Correlation& O,
                       const Rat& K);

// Enumerates every total surjective pinned relation exactly once. Enforces
// nA*nB <= 20.
void for_each_correlation(size_t nA, size_t nB, std::span<const std::pair<uint32_t, uint32_t>> pins,
                          const std::function<void(const std::vector<std::pair<uint32_t, uint32_t>>&)>& fn);

size_t count_correlations(size_t nA, size_t nB, std::span<const std::pair<uint32_t, uint32_t>> pins);

struct MinDistortionOptions {
  int subdivisions = 1;
  size_t max_cells = 1200;      // resource limit on nA*nB
  size_t lex_refine_cells = 30; // run the lexicographic argmin refinement up to this size
};

struct MinDistortionResult {
  Rat rho;
  Correlation argmin;
  Rat certificate;  // additive bound: 4 * worst half-spacing of the sample mesh
  std::vector<std::string> warnings;
  size_t nodes = 0;  // search nodes, for diagnostics
};

// Exact minimum of dis^K over pinned correlations between the two samples,
// by branch and bound over minimal correlations (pins plus a function each
// way). Among optimal correlations the reported argmin is the
// lexicographically least pair set when the instance is small enough for the
// refinement pass; otherwise the deterministic first optimum of the search.
MinDistortionResult min_distortion(const SampledStructure& A, const SampledStructure& B, const Rat& K,
                                   const MinDistortionOptions& opts = {});

// Convenience form: samples the full hulls of both structures (vertices,
// edge mesh, tuple points) and runs the search.
MinDistortionResult min_distortion(const RFRStructure& A, const RFRStructure& B, const Rat& K,
                                   const MinDistortionOptions& opts = {});

// Exhaustive oracle: enumerates all correlations (within the size bound) and
// reports the exact minimum. Independent of the branch-and-bound path.
Rat exhaustive_min_distortion(const SampledStructure& A, const SampledStructure& B, const Rat& K);

}  // namespace rforest
