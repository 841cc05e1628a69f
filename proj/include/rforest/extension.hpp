#pragma once

#include "rforest/lipext.hpp"

namespace rforest {

enum class ExtensionCase { InfiniteDistance, Graft };

struct ExtensionOptions {
  int subdivisions = 2;     // mesh level for sampling domains and the grafted segment
  size_t max_cells = 1200;  // min_distortion resource limit
  size_t lex_refine_cells = 0;  // argmin refinement is pointless here; off by default
};

struct ExtensionResult {
  RFRStructure extended;  // tuple = source tuple followed by the new point
  Rat rho_in;             // measured distortion of the optimal input correlation
  Rat achieved_dis;       // exact dis^K of the constructed correlation
  ExtensionCase tag;
  Correlation correlation;          // the constructed correlation O'
  std::vector<PointRef> sample_a;   // O' row points, on the extended hull
  std::vector<PointRef> sample_b;   // O' column points, on the target hull
};

// One-point extension: the source carries an n-tuple, the target an
// (n+1)-tuple whose last entry is the new point. Produces an extension of the
// source by one point e with d(e, source hull of the tuple) infinite iff the
// target's new point is at infinite distance from its own base hull, and with
//   achieved_dis <= 4 * rho_in + eps,
// verified exactly before returning. Requires K >= 1 large for the target
// tuple and eps > 0.
ExtensionResult extend_one_point(const RFRStructure& source, const RFRStructure& target, const Rat& K,
                                 const Rat& eps, const ExtensionOptions& opts = {});

struct TupleExtensionResult {
  RFRStructure extended;
  std::vector<Rat> step_rho;
  std::vector<Rat> step_achieved;
  Rat final_rho;    // measured against the full target after the last step
  Rat bound;        // 5^m * initial rho + eps
};

// Iterates extend_one_point once per extra target tuple entry, splitting the
// eps budget so the telescoped distortion stays within 5^m * rho + eps.
TupleExtensionResult extend_tuple(const RFRStructure& source, const RFRStructure& target, const Rat& K,
                                  const Rat& eps, const ExtensionOptions& opts = {});

}  // namespace rforest
