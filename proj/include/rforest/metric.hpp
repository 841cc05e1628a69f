#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rforest/extended.hpp"

namespace rforest {

// A finite extended metric space: point labels plus a symmetric matrix of
// [0,inf] distances with zero diagonal. The constructor enforces shape only;
// semantic invariants are the business of check_metric.
class FiniteExtendedMetric {
public:
  FiniteExtendedMetric() = default;
  FiniteExtendedMetric(std::vector<std::string> labels, std::vector<std::vector<Ext>> matrix);

  size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Ext& dist(size_t i, size_t j) const { return matrix_[i][j]; }
  void set_dist(size_t i, size_t j, Ext d);

  size_t index_of(const std::string& label) const;

private:
  std::vector<std::string> labels_;
  std::vector<std::vector<Ext>> matrix_;
};

struct MetricViolation {
  enum class Kind {
    Structural,        // negative entry, duplicate label
    Diagonal,          // d(x,x) != 0
    Identity,          // d(x,y) == 0 for distinct x,y
    Symmetry,          // d(x,y) != d(y,x)
    Triangle,          // d(x,z) > d(x,y) + d(y,z) within a finite class
    FinitenessClass,   // finiteness fails to be an equivalence relation
  };
  Kind kind;
  std::array<size_t, 3> witness;  // indices; unused slots repeat the first
  std::string detail;
};

struct ValidationReport {
  bool valid = true;
  std::vector<MetricViolation> violations;
  bool has_structural() const;
};

ValidationReport check_metric(const FiniteExtendedMetric& m);

// The four-point condition d(x,y)+d(z,w) <= max(d(x,z)+d(y,w), d(y,z)+d(x,w)),
// checked exactly. Vacuously true unless all four points sit in one finite
// class.
bool four_point(const FiniteExtendedMetric& m, size_t x, size_t y, size_t z, size_t w);

struct TreeEmbeddability {
  bool embeddable = true;
  std::optional<std::array<size_t, 4>> witness;  // a quadruple where four_point fails
};

// Requires check_metric to pass. Scans every quadruple inside each finite class.
TreeEmbeddability is_tree_embeddable(const FiniteExtendedMetric& m);

// Blocks of the finiteness equivalence relation, each sorted, ordered by
// smallest member.
std::vector<std::vector<size_t>> finite_components(const FiniteExtendedMetric& m);

// (d(z,x) + d(z,y) - d(x,y)) / 2; all three points must be pairwise finite.
Rat gromov_product(const FiniteExtendedMetric& m, size_t x, size_t y, size_t base);

}  // namespace rforest
