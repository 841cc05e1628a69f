#pragma once

#include "rforest/distortion.hpp"

namespace rforest {

struct McShaneResult {
  UnaryLip g;
  Rat dis_used;  // dis^K_d of the correlation the transfer ran over
};

// Transfers a 1-Lipschitz [0,1]-valued function along a correlation:
// given values f(b) on points of a source hull and a correlation O between
// target sample points and domain indices, returns
//   g(x) = min(1, inf over (a,b) in O of d(x, a) + f(b))
// on the target hull, with |g(a) - f(b)| <= dis^K_d(O) on every pair of O.
// Empty O yields the constant 1.
McShaneResult mcshane_unary(HullPtr target, std::span<const PointRef> target_points,
                            const ForestHull& source, std::span<const std::pair<PointRef, Rat>> domain,
                            const Correlation& O, const Rat& K);

struct BoundedExtensionResult {
  UnaryLip h;
  Rat deviation;  // r = sup over A0 of |f - g|, attained on A0
};

// Extends f (given on finitely many points A0) to the whole hull while moving
// as little as possible from g: h agrees with f exactly on A0, is 1-Lipschitz
// and [0,1]-valued, and sup |h - g| equals the sup over A0 of |f - g|.
// Empty A0 returns g unchanged. f must be 1-Lipschitz on A0 (validated).
BoundedExtensionResult bounded_extension(std::span<const std::pair<PointRef, Rat>> f_on_A0,
                                         const UnaryLip& g);

struct ProductDistortion {
  Rat dis_base;     // dis^K_d(O)
  Rat dis_product;  // dis^K over the sum metric of the induced pair correlation
};

// The induced correlation on pairs O^(2) = {((a,a'),(b,b'))} with the sum
// metric d(xy,zw) = d(x,z) + d(y,w); its truncated metric distortion is at
// most twice the base distortion (checked, returned).
ProductDistortion product_metric_distortion(const SampledStructure& A, const SampledStructure& B,
                                            const Correlation& O, const Rat& K);

}  // namespace rforest
