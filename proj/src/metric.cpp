#include "rforest/metric.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace rforest {

FiniteExtendedMetric::FiniteExtendedMetric(std::vector<std::string> labels,
                                           std::vector<std::vector<Ext>> matrix)
    : labels_(std::move(labels)), matrix_(std::move(matrix)) {
  if (matrix_.size() != labels_.size())
    throw Error(ErrorCode::BadInput, "metric matrix row count does not match label count");
  for (const auto& row : matrix_)
    if (row.size() != labels_.size()) throw Error(ErrorCode::BadInput, "metric matrix is not square");
}

void FiniteExtendedMetric::set_dist(size_t i, size_t j, Ext d) {
  matrix_[i][j] = d;
  matrix_[j][i] = std::move(d);
}

size_t FiniteExtendedMetric::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error(ErrorCode::BadInput, "unknown point label: " + label);
  return static_cast<size_t>(it - labels_.begin());
}

bool ValidationReport::has_structural() const {
  return std::any_of(violations.begin(), violations.end(),
                     [](const MetricViolation& v) { return v.kind == MetricViolation::Kind::Structural; });
}

ValidationReport check_metric(const FiniteExtendedMetric& m) {
  ValidationReport rep;
  const size_t n = m.size();
  auto add = [&](MetricViolation::Kind k, std::array<size_t, 3> w, std::string d) {
    rep.violations.push_back({k, w, std::move(d)});
    rep.valid = false;
  };

  std::map<std::string, size_t> seen;
  for (size_t i = 0; i < n; ++i) {
    auto [it, fresh] = seen.emplace(m.labels()[i], i);
    if (!fresh)
      add(MetricViolation::Kind::Structural, {it->second, i, it->second},
          "duplicate label '" + m.labels()[i] + "'");
  }

  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const Ext& d = m.dist(i, j);
      if (d.is_finite() && d.value() < 0)
        add(MetricViolation::Kind::Structural, {i, j, i}, "negative distance");
    }
  if (rep.has_structural()) return rep;  // semantic checks assume sane entries

  for (size_t i = 0; i < n; ++i)
    if (!(m.dist(i, i) == Ext(Rat(0)))) add(MetricViolation::Kind::Diagonal, {i, i, i}, "nonzero diagonal");
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      if (!(m.dist(i, j) == m.dist(j, i))) add(MetricViolation::Kind::Symmetry, {i, j, i}, "asymmetric entry");
      if (m.dist(i, j) == Ext(Rat(0))) add(MetricViolation::Kind::Identity, {i, j, i}, "distinct points at distance 0");
    }

  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (j == i || m.dist(i, j).is_inf()) continue;
      for (size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (m.dist(j, k).is_inf()) continue;
        // i~j and j~k finite: the class structure demands i~k finite too.
        if (m.dist(i, k).is_inf()) {
          add(MetricViolation::Kind::FinitenessClass, {i, k, j},
              "finiteness is not transitive through " + m.labels()[j]);
        } else if (m.dist(i, k) > m.dist(i, j) + m.dist(j, k)) {
          add(MetricViolation::Kind::Triangle, {i, k, j},
              "triangle inequality fails via " + m.labels()[j]);
        }
      }
    }
  return rep;
}

bool four_point(const FiniteExtendedMetric& m, size_t x, size_t y, size_t z, size_t w) {
  const size_t n = m.size();
  if (x >= n || y >= n || z >= n || w >= n) throw Error(ErrorCode::BadInput, "four_point: index out of range");
  const std::array<size_t, 4> q{x, y, z, w};
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = i + 1; j < 4; ++j)
      if (m.dist(q[i], q[j]).is_inf()) return true;  // truncated axiom: vacuous across classes
  Ext lhs = m.dist(x, y) + m.dist(z, w);
  Ext rhs = ext_max(m.dist(x, z) + m.dist(y, w), m.dist(y, z) + m.dist(x, w));
  return lhs <= rhs;
}

TreeEmbeddability is_tree_embeddable(const FiniteExtendedMetric& m) {
  TreeEmbeddability out;
  const size_t n = m.size();
  for (size_t x = 0; x < n && out.embeddable; ++x)
    for (size_t y = x + 1; y < n && out.embeddable; ++y)
      for (size_t z = y + 1; z < n && out.embeddable; ++z)
        for (size_t w = z + 1; w < n && out.embeddable; ++w) {
          // Each unordered quadruple has three pairings; four_point checks one
          // split, so test all three rotations.
          if (!four_point(m, x, y, z, w)) out = {false, {{x, y, z, w}}};
          else if (!four_point(m, x, z, y, w)) out = {false, {{x, z, y, w}}};
          else if (!four_point(m, x, w, y, z)) out = {false, {{x, w, y, z}}};
        }
  return out;
}

std::vector<std::vector<size_t>> finite_components(const FiniteExtendedMetric& m) {
  const size_t n = m.size();
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (m.dist(i, j).is_finite()) parent[find(i)] = find(j);
  std::map<size_t, std::vector<size_t>> blocks;
  for (size_t i = 0; i < n; ++i) blocks[find(i)].push_back(i);
  std::vector<std::vector<size_t>> out;
  for (auto& [root, pts] : blocks) out.push_back(std::move(pts));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

Rat gromov_product(const FiniteExtendedMetric& m, size_t x, size_t y, size_t base) {
  if (m.dist(base, x).is_inf() || m.dist(base, y).is_inf() || m.dist(x, y).is_inf())
    throw Error(ErrorCode::InfiniteDistance, "gromov_product requires pairwise finite points");
  return (m.dist(base, x).value() + m.dist(base, y).value() - m.dist(x, y).value()) / 2;
}

}  // namespace rforest
