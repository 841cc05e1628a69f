#pragma once

#include "rforest/distortion.hpp"

namespace rforest {

// The finite data determining a pointed type: the tuple's distance matrix and
// the predicate sampled on the family of segment interpolation points between
// tuple entries. Exact rationals; refining the mesh never changes the values
// on the coarser grid.
struct TypeFingerprint {
  size_t n = 0;
  int mesh = 0;
  std::vector<std::vector<Ext>> dist;
  // rvals[(j*n+k)*(mesh+1)+s][(l*n+m)*(mesh+1)+t]; cells for infinite (j,k)
  // hold no points and are skipped symmetrically on both sides.
  std::vector<std::vector<std::optional<Rat>>> rvals;

  friend bool operator==(const TypeFingerprint&, const TypeFingerprint&) = default;
};

TypeFingerprint fingerprint(const RFRStructure& s, int mesh);

struct IsoReport {
  bool iso = false;
  bool dist_equal = false;
  Rat worst_pred_dev;  // max |r - r'| over the shared mesh
  std::string detail;
};

// Pointed isomorphism at fingerprint level: distance matrices must agree
// exactly, predicate mesh values within tol (use 2 * mesh spacing).
IsoReport pointed_iso_check(const RFRStructure& a, const RFRStructure& b, int mesh, const Rat& tol);

// <AB> intersect <AC> equals <A>, all hulls taken inside `parent`.
bool independent(HullPtr parent, std::span<const PointRef> A, std::span<const PointRef> B,
                 std::span<const PointRef> C);

struct IndependenceInput {
  RFRStructure ambient;  // tuple = M ++ B0 ++ B1
  size_t n_m = 0, n_b0 = 0, n_b1 = 0;
  RFRStructure ext0;  // tuple = M ++ B0 ++ C0
  RFRStructure ext1;  // tuple = M ++ B1 ++ C1
  size_t n_c = 0;
  int mesh = 2;  // fingerprint mesh for the type-equality precondition
};

// The independence-theorem amalgam: joins the two extensions over a common
// copy of <M C>, freely over the ambient <M B0 B1>. Result tuple is
// M ++ B0 ++ B1 ++ C.
RFRStructure independence_amalgam(const IndependenceInput& in);

struct PathResult {
  std::vector<RFRStructure> steps;  // m + 1 entries
  std::vector<Rat> consecutive_rho;
  bool constant = false;
};

// Path from tp(b c / A) to an independent pair, shrinking the shared stem of
// b and c over A in m steps. The structure's tuple is A ++ [b, c]. Requires b
// and c to have the same distance to <A> and the same projection point.
PathResult unzip_path(const RFRStructure& s, size_t m, const Rat& K, int grid,
                      const MinDistortionOptions& dopts = {});

// Path between two independent-pair types over A by convex combination of the
// predicates on the interpolation mesh. Tuples of q0 and q1 are A ++ [b, c]
// with matching metric data.
PathResult interpolate_path(const RFRStructure& q0, const RFRStructure& q1, size_t m, const Rat& K,
                            int grid, const MinDistortionOptions& dopts = {});

// The induced distance between tp(b0/A) and tp(b1/A):
//   |d(b0,A) - d(b1,A)|                          when both project to one point,
//   d(b0,A) + d(pi(b0), pi(b1)) + d(b1,A)        when the projections differ,
//   0 when both distances are infinite, infinite when exactly one is.
Ext type_distance(HullPtr hull, std::span<const PointRef> A, const PointRef& b0, const PointRef& b1);

// The order configuration: 2n points in singleton components with
// R(a_i, b_j) = 1 iff i >= j and 0 otherwise, R = 0 within each family.
RFRStructure order_witness(size_t n);

}  // namespace rforest
