#include "rforest/heart.hpp"

#include <algorithm>

namespace rforest {

Ext HeartStructure::dist(size_t i, size_t j) const {
  if (i == j) return Ext(Rat(0));
  return Ext(rat_max(radii[i], radii[j]));
}

FiniteExtendedMetric HeartStructure::metric() const {
  const size_t n = radii.size();
  std::vector<std::string> labels(n);
  for (size_t i = 0; i < n; ++i) labels[i] = "h" + std::to_string(i);
  std::vector<std::vector<Ext>> mat(n, std::vector<Ext>(n, Ext(Rat(0))));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) mat[i][j] = dist(i, j);
  return FiniteExtendedMetric(std::move(labels), std::move(mat));
}

std::optional<size_t> HeartStructure::star() const {
  for (size_t i = 0; i < radii.size(); ++i)
    if (radii[i] == 0) return i;
  return std::nullopt;
}

HeartReport validate_heart(const HeartStructure& m) {
  HeartReport rep;
  rep.density_achieved = Rat(1);
  const size_t n = m.radii.size();
  for (const auto& r : m.radii)
    if (r < 0 || r > 1) rep.radii_in_range = false;
  rep.has_star = m.star().has_value();
  if (n == 0) rep.has_star = false;

  if (rep.radii_in_range && n > 0) {
    ValidationReport mr = check_metric(m.metric());
    rep.max_metric_ok = mr.valid;
    for (size_t i = 0; i < n && rep.ultrametric_ok; ++i)
      for (size_t j = 0; j < n && rep.ultrametric_ok; ++j)
        for (size_t k = 0; k < n; ++k)
          if (m.dist(i, k) > ext_max(m.dist(i, j), m.dist(j, k))) {
            rep.ultrametric_ok = false;
            rep.notes.push_back("ultrametric inequality fails");
            break;
          }
    // Smallest delta' for which every point of [0,1] is within delta' of a
    // radius: endpoint gaps plus half of each interior gap.
    std::vector<Rat> sorted = m.radii;
    std::sort(sorted.begin(), sorted.end());
    Rat worst = sorted.front();  // distance of 0 to the smallest radius
    worst = rat_max(worst, Rat(1) - sorted.back());
    for (size_t i = 0; i + 1 < sorted.size(); ++i)
      worst = rat_max(worst, (sorted[i + 1] - sorted[i]) / 2);
    rep.density_achieved = worst;
    rep.density_ok = worst <= m.delta;
    if (!rep.density_ok) rep.notes.push_back("radius set is only " + rat_str(worst) + "-dense");
  } else {
    rep.max_metric_ok = rep.ultrametric_ok = rep.density_ok = false;
  }
  rep.valid = rep.radii_in_range && rep.has_star && rep.max_metric_ok && rep.ultrametric_ok && rep.density_ok;
  return rep;
}

HeartFingerprint qf_fingerprint(const HeartStructure& m, std::span<const size_t> tuple,
                                std::span<const size_t> params) {
  HeartFingerprint fp;
  for (size_t i : tuple) fp.radii.push_back(m.radii[i]);
  for (size_t a = 0; a < tuple.size(); ++a) {
    std::vector<Rat> row;
    for (size_t b = a + 1; b < tuple.size(); ++b) {
      Ext d = m.dist(tuple[a], tuple[b]);
      row.push_back(d.value());
    }
    fp.pairs.push_back(std::move(row));
  }
  for (size_t a = 0; a < tuple.size(); ++a) {
    std::vector<Rat> row;
    for (size_t p : params) row.push_back(m.dist(tuple[a], p).value());
    fp.to_params.push_back(std::move(row));
  }
  return fp;
}

OrbitReport orbit_check(const HeartStructure& m, std::span<const size_t> params) {
  OrbitReport rep;
  const size_t n = m.radii.size();
  std::vector<char> is_param(n, 0);
  for (size_t p : params) is_param[p] = 1;
  std::vector<size_t> param_tuple(params.begin(), params.end());
  HeartFingerprint before = qf_fingerprint(m, param_tuple, params);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      if (is_param[i] || is_param[j] || !(m.radii[i] == m.radii[j])) continue;
      ++rep.swaps_checked;
      // The transposition acts on indices; distances must be unchanged.
      std::vector<size_t> perm(n);
      for (size_t k = 0; k < n; ++k) perm[k] = k;
      std::swap(perm[i], perm[j]);
      bool ok = true;
      for (size_t a = 0; a < n && ok; ++a)
        for (size_t b = 0; b < n; ++b)
          if (!(m.dist(a, b) == m.dist(perm[a], perm[b]))) {
            ok = false;
            break;
          }
      if (ok) {
        HeartStructure permuted = m;
        for (size_t k = 0; k < n; ++k) permuted.radii[k] = m.radii[perm[k]];
        ok = qf_fingerprint(permuted, param_tuple, params) == before;
      }
      if (!ok) {
        rep.pass = false;
        rep.violations.push_back({i, j});
      }
    }
  return rep;
}

HeartStructure scale_structure(const HeartStructure& m, const Rat& s) {
  if (!(s > 0) || s > 1) throw Error(ErrorCode::BadInput, "scale factor outside (0,1]");
  HeartStructure out = m;
  for (auto& r : out.radii) r *= s;
  return out;
}

}  // namespace rforest
