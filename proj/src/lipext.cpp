#include "rforest/lipext.hpp"

namespace rforest {

McShaneResult mcshane_unary(HullPtr target, std::span<const PointRef> target_points,
                            const ForestHull& source, std::span<const std::pair<PointRef, Rat>> domain,
                            const Correlation& O, const Rat& K) {
  for (auto& [p, v] : domain)
    if (v < 0 || v > 1) throw Error(ErrorCode::BadInput, "mcshane: value outside [0,1]");
  for (size_t i = 0; i < domain.size(); ++i)
    for (size_t j = i + 1; j < domain.size(); ++j) {
      Ext d = source.distance(domain[i].first, domain[j].first);
      if (d.is_finite() && rat_abs(domain[i].second - domain[j].second) > d.value())
        throw Error(ErrorCode::BadInput, "mcshane: domain values are not 1-Lipschitz");
    }
  McShaneResult out{UnaryLip(target), Rat(0)};
  std::vector<std::pair<PointRef, Rat>> anchors;
  for (auto& [ai, bi] : O.pairs) {
    if (ai >= target_points.size() || bi >= domain.size())
      throw Error(ErrorCode::BadInput, "mcshane: correlation index out of range");
    anchors.push_back({target_points[ai], domain[bi].second});
  }
  // dis^K_d of O between the two point families.
  for (auto& [a1, b1] : O.pairs)
    for (auto& [a2, b2] : O.pairs) {
      Rat da = target->distance(target_points[a1], target_points[a2]).clamp(K);
      Rat db = source.distance(domain[b1].first, domain[b2].first).clamp(K);
      out.dis_used = rat_max(out.dis_used, rat_abs(da - db));
    }
  out.g = UnaryLip::from_raw(target, std::move(anchors));
  return out;
}

BoundedExtensionResult bounded_extension(std::span<const std::pair<PointRef, Rat>> f_on_A0,
                                         const UnaryLip& g) {
  const ForestHull& h = *g.host();
  for (auto& [p, v] : f_on_A0)
    if (v < 0 || v > 1) throw Error(ErrorCode::BadInput, "bounded_extension: value outside [0,1]");
  for (size_t i = 0; i < f_on_A0.size(); ++i)
    for (size_t j = i + 1; j < f_on_A0.size(); ++j) {
      Ext d = h.distance(f_on_A0[i].first, f_on_A0[j].first);
      if (d.is_finite() && rat_abs(f_on_A0[i].second - f_on_A0[j].second) > d.value())
        throw Error(ErrorCode::BadInput, "bounded_extension: f is not 1-Lipschitz on A0");
    }
  if (f_on_A0.empty()) return {g, Rat(0)};
  Rat r(0);
  for (auto& [p, v] : f_on_A0) r = rat_max(r, rat_abs(v - g.eval(p)));
  // h = min(g + r, inf-extension of f): raise g's anchors by r (clamped) and
  // add the f anchors; the combined inf-extension is exactly that minimum.
  std::vector<std::pair<PointRef, Rat>> anchors;
  for (auto& [p, v] : g.anchors()) anchors.push_back({p, clamp01(v + r)});
  for (auto& [p, v] : f_on_A0) anchors.push_back({p, v});
  return {UnaryLip::from_raw(g.host(), std::move(anchors)), r};
}

ProductDistortion product_metric_distortion(const SampledStructure& A, const SampledStructure& B,
                                            const Correlation& O, const Rat& K) {
  ProductDistortion out{dis_metric_K(A, B, O, K), Rat(0)};
  for (auto& [i1, j1] : O.pairs)
    for (auto& [i1p, j1p] : O.pairs)
      for (auto& [i2, j2] : O.pairs)
        for (auto& [i2p, j2p] : O.pairs) {
          Rat da = (A.dist(i1, i2) + A.dist(i1p, i2p)).clamp(K);
          Rat db = (B.dist(j1, j2) + B.dist(j1p, j2p)).clamp(K);
          out.dis_product = rat_max(out.dis_product, rat_abs(da - db));
        }
  if (out.dis_product > Rat(2) * out.dis_base)
    throw Error(ErrorCode::BadInput, "product distortion exceeded twice the base distortion");
  return out;
}

}  // namespace rforest
