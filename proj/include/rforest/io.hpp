#pragma once

#include <json.hpp>

#include "rforest/heart.hpp"
#include "rforest/predicate.hpp"

namespace rforest {

using Json = nlohmann::json;

// Rationals travel as "p/q" strings; plain JSON numbers are accepted on input
// and converted exactly (doubles are binary fractions). Infinite distances
// are null.
Json rat_to_json(const Rat& r);
Rat rat_from_json(const Json& j);
Json ext_to_json(const Ext& e);
Ext ext_from_json(const Json& j);

Json metric_to_json(const FiniteExtendedMetric& m);
FiniteExtendedMetric metric_from_json(const Json& j);

Json pointref_to_json(const PointRef& p);
PointRef pointref_from_json(const Json& j, const ForestHull& h);

// {vertices:[{id,kind}], edges:[{a,b,len}]}; generator vertices are those
// with id below the generator count, in label order.
Json hull_to_json(const ForestHull& h);

Json anchors_to_json(const AnchorPredicate& p);
Json structure_to_json(const RFRStructure& s);

Json heart_to_json(const HeartStructure& m);
HeartStructure heart_from_json(const Json& j);

// An instance file holds exactly one of a bare metric, a structure (metric
// plus anchors/tuple), or a heart block. Unknown keys are rejected.
struct Instance {
  std::optional<FiniteExtendedMetric> metric;
  std::optional<Json> anchors;  // raw; resolved against the hull once built
  std::optional<Json> tuple;
  std::optional<HeartStructure> heart;
};

Instance parse_instance(const Json& j);

// Builds the structure of an instance: canonical hull of the metric, anchors
// validated against it, tuple defaulting to all generators.
RFRStructure build_structure(const Instance& inst);

}  // namespace rforest
