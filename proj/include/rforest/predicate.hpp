#pragma once

#include <optional>
#include <span>

#include "rforest/hull.hpp"

namespace rforest {

struct Anchor {
  PointRef p, q;
  Rat v;  // in [0,1]
};

// A binary [0,1]-valued predicate represented by finitely many anchors with
// canonical inf-extension
//   eval(x,y) = min(1, inf_i v_i + d(x,p_i) + d(y,q_i)),
// which is 1-1-Lipschitz by construction and equals 1 where no anchor is
// reachable. Anchor values always agree with eval (class invariant), so two
// predicates are equal as functions iff their canonical anchor sets coincide.
class AnchorPredicate {
public:
  explicit AnchorPredicate(HullPtr host);

  // Validating constructor: rejects out-of-range values and anchor pairs that
  // violate |v - v'| <= d(p,p') + d(q,q').
  static AnchorPredicate checked(HullPtr host, std::vector<Anchor> anchors);

  // Canonicalizing constructor: replaces each value by the inf-extension of
  // the whole set at its own pair (never increases values), then prunes
  // anchors dominated by others. Used by every operation whose formulas
  // produce raw anchor data.
  static AnchorPredicate from_raw(HullPtr host, std::vector<Anchor> anchors);

  const HullPtr& host() const { return host_; }
  const std::vector<Anchor>& anchors() const { return anchors_; }

  Rat eval(const PointRef& x, const PointRef& y) const;

  // Anchors restated on another hull via transported points.
  AnchorPredicate transported(HullPtr to, std::span<const size_t> gen_map) const;

private:
  HullPtr host_;
  std::vector<Anchor> anchors_;  // canonical order, values consistent with eval
};

// A unary 1-Lipschitz [0,1]-valued function in the same representation.
class UnaryLip {
public:
  explicit UnaryLip(HullPtr host);
  static UnaryLip from_raw(HullPtr host, std::vector<std::pair<PointRef, Rat>> anchors);
  const std::vector<std::pair<PointRef, Rat>>& anchors() const { return anchors_; }
  const HullPtr& host() const { return host_; }
  Rat eval(const PointRef& x) const;

private:
  HullPtr host_;
  std::vector<std::pair<PointRef, Rat>> anchors_;
};

// A pointed structure: hull, predicate, distinguished tuple.
struct RFRStructure {
  HullPtr hull;
  AnchorPredicate pred;
  std::vector<PointRef> tuple;

  RFRStructure(HullPtr h, AnchorPredicate p, std::vector<PointRef> t);
  Rat rel(const PointRef& x, const PointRef& y) const { return pred.eval(x, y); }
};

struct LipschitzReport {
  bool pass = true;
  // Worst slack min over checked pairs of d(x,x') + d(y,y') - |eval difference|;
  // negative slack is a violation (impossible for inf-extensions, reported for
  // completeness).
  std::optional<Rat> worst_slack;
  size_t pairs_checked = 0;
};

// Verifies |eval(x,y) - eval(x',y')| <= d(x,x') + d(y,y') over all pairs of
// mesh-point pairs.
LipschitzReport check_one_one_lipschitz(const RFRStructure& s, int subdivisions);

struct GlueReport {
  bool pass = true;
  bool covers = true;  // B trunk-union C equals the parent
  std::optional<Rat> worst_slack;
  std::vector<std::pair<PointRef, PointRef>> violations;
};

// Checks that a mesh-sampled unary function that is 1-Lipschitz on B and on C
// separately is 1-Lipschitz across B x C; cross distances pass through the
// projection onto B intersect C. Errors if B union C is not the whole parent.
GlueReport glue_check(HullPtr parent, const SubHull& B, const SubHull& C,
                      std::span<const std::pair<PointRef, Rat>> f);

// Predicate amalgamation over free_amalgam: the union of both sides' anchors
// on the amalgamated hull. Demands that the two predicates agree exactly at
// the projections of every anchor endpoint pair onto the base, which makes
// the union restrict to each side exactly.
RFRStructure predicate_amalgam(const RFRStructure& side0, const RFRStructure& side1,
                               std::span<const std::pair<PointRef, PointRef>> base);

}  // namespace rforest
