#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rforest/metric.hpp"

namespace rforest {

class ForestHull;
using HullPtr = std::shared_ptr<const ForestHull>;

struct Vertex {
  enum class Kind { Generator, Steiner };
  Kind kind;
  size_t generator = SIZE_MAX;  // index into generator labels when kind == Generator
  bool is_generator() const { return kind == Kind::Generator; }
};

struct HullEdge {
  size_t a, b;  // vertex ids, a ordered before b
  Rat len;      // > 0
};

// A point of a hull: a vertex, or a strictly interior position on an edge
// (offset measured from the edge's `a` end). Endpoint offsets normalize to
// the vertex form.
struct PointRef {
  size_t vertex = SIZE_MAX;
  size_t edge = SIZE_MAX;
  Rat offset;

  static PointRef at_vertex(size_t v) {
    PointRef p;
    p.vertex = v;
    return p;
  }
  static PointRef on_edge(size_t e, Rat off) {
    PointRef p;
    p.edge = e;
    p.offset = std::move(off);
    return p;
  }
  bool is_vertex() const { return vertex != SIZE_MAX; }

  friend bool operator==(const PointRef& x, const PointRef& y) {
    if (x.is_vertex() != y.is_vertex()) return false;
    return x.is_vertex() ? x.vertex == y.vertex : (x.edge == y.edge && x.offset == y.offset);
  }
  // Deterministic total order: vertices first by id, then edge points.
  friend bool operator<(const PointRef& x, const PointRef& y) {
    if (x.is_vertex() != y.is_vertex()) return x.is_vertex();
    if (x.is_vertex()) return x.vertex < y.vertex;
    if (x.edge != y.edge) return x.edge < y.edge;
    return x.offset < y.offset;
  }
};

// An explicit finite weighted forest realizing a tree-embeddable metric on its
// generators. Immutable and canonical: no degree-2 steiner vertices, vertices
// and edges in a deterministic order, exact rational edge lengths.
class ForestHull {
public:
  static ForestHull from_parts(std::vector<Vertex> vertices, std::vector<HullEdge> edges,
                               std::vector<std::string> generator_labels);

  size_t vertex_count() const { return vertices_.size(); }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<HullEdge>& edges() const { return edges_; }
  const std::vector<std::string>& generator_labels() const { return labels_; }
  size_t generator_count() const { return labels_.size(); }
  size_t generator_vertex(size_t gen) const { return gen_vertex_.at(gen); }
  size_t component_of(size_t vertex) const { return component_[vertex]; }
  size_t component_count() const { return n_components_; }
  size_t degree(size_t vertex) const { return adj_[vertex].size(); }
  const std::vector<std::pair<size_t, size_t>>& neighbors(size_t v) const { return adj_[v]; }

  bool valid_point(const PointRef& p) const;
  PointRef normalize(PointRef p) const;
  size_t component_of_point(const PointRef& p) const;

  Ext vertex_distance(size_t u, size_t v) const;
  Ext distance(const PointRef& p, const PointRef& q) const;

  // The point of [a,b] at distance r*d(a,b) from a; requires finite d and
  // r in [0,1].
  PointRef interp(const PointRef& a, const Rat& r, const PointRef& b) const;

  // Oriented traversal of the unique arc from a to b as per-edge offset spans.
  struct Seg {
    size_t edge;
    Rat t0, t1;  // travel from offset t0 to t1 (may be equal only for degenerate arcs)
  };
  std::vector<Seg> walk(const PointRef& a, const PointRef& b) const;

  // All vertices plus `subdivisions` evenly spaced interior points per edge,
  // in deterministic order.
  std::vector<PointRef> sample_points(int subdivisions) const;

  FiniteExtendedMetric generator_metric() const;

  // Canonical pointed encoding; two hulls have equal signatures iff there is a
  // label-respecting isometry between them.
  std::string signature() const;

private:
  std::vector<Vertex> vertices_;
  std::vector<HullEdge> edges_;
  std::vector<std::string> labels_;
  std::vector<size_t> gen_vertex_;
  std::vector<size_t> component_;
  size_t n_components_ = 0;
  std::vector<std::vector<std::pair<size_t, size_t>>> adj_;  // (neighbor, edge id)
  std::vector<std::vector<Ext>> vdist_;

  std::vector<size_t> vertex_path(size_t u, size_t v) const;
};

// Builds the canonical minimal hull of a valid tree-embeddable metric by
// attaching each generator at its Gromov-product point on the hull of the
// previous ones. Throws NotTreeEmbeddableError with a witness quadruple.
HullPtr build_hull(const FiniteExtendedMetric& m);

// A closed sub-forest of a host hull: per-edge closed offset intervals
// (possibly degenerate) plus a vertex membership set, kept normalized.
class SubHull {
public:
  explicit SubHull(HullPtr host);

  const HullPtr& host() const { return host_; }
  void add_vertex(size_t v);
  void add_interval(size_t edge, Rat lo, Rat hi);
  void add_point(const PointRef& p);
  void add_segment(const PointRef& a, const PointRef& b);
  void normalize();

  bool empty() const;
  bool contains(const PointRef& p) const;
  bool vertex_in(size_t v) const { return vertex_in_[v]; }
  const std::vector<std::vector<std::pair<Rat, Rat>>>& intervals() const { return intervals_; }

  // Sample points: member vertices, interval endpoints, and `subdivisions`
  // interior points per interval.
  std::vector<PointRef> mesh(int subdivisions) const;

  friend bool operator==(const SubHull& x, const SubHull& y);

private:
  HullPtr host_;
  std::vector<std::vector<std::pair<Rat, Rat>>> intervals_;
  std::vector<char> vertex_in_;
  bool dirty_ = false;
};

SubHull full_subhull(HullPtr h);
SubHull segment_subhull(HullPtr h, const PointRef& a, const PointRef& b);

// Union of segments [t_i, t_j] over tuple pairs at distance < K (including
// i == j, so every tuple point is present). K may be Ext::inf().
SubHull truncated_hull(HullPtr h, std::span<const PointRef> tuple, const Ext& K);

SubHull hull_intersection(const SubHull& s0, const SubHull& s1);

Ext distance_to_subhull(const ForestHull& h, const PointRef& p, const SubHull& sub);

// The nearest point of `sub` to p. Unique when sub is connected within p's
// component; ties (possible only for disconnected subs) resolve to the least
// PointRef. Throws Unreachable when no member of sub is at finite distance.
PointRef project(const ForestHull& h, const PointRef& p, const SubHull& sub);

bool is_large(const Rat& K, const FiniteExtendedMetric& m, std::span<const size_t> tuple);
bool is_large(const Rat& K, const ForestHull& h, std::span<const PointRef> tuple);

// Decomposes p as a point of [g_i, g_j] for the least generator pair (i, j)
// and reproduces it in `to` via gen_map (from-generator -> to-generator).
// Caller guarantees the mapped generators have matching distances.
PointRef transport_point(const ForestHull& from, const PointRef& p, const ForestHull& to,
                         std::span<const size_t> gen_map);

// Same decomposition over an explicit list of matched reference points.
PointRef transport_via_pairs(const ForestHull& from, const PointRef& p, const ForestHull& to,
                             std::span<const std::pair<PointRef, PointRef>> pairs);

struct AmalgamResult {
  HullPtr hull;
  FiniteExtendedMetric metric;     // the combined generator metric
  std::vector<size_t> gen0_map;    // Y0 generator index -> result generator index
  std::vector<size_t> gen1_map;    // Y1 generator index -> result generator index
};

// Free amalgamation of Y0 and Y1 over a common base given as matched point
// pairs (isometric by requirement; validated). Cross distances follow the
// projection identity through the base; empty base gives the disjoint union
// with all cross distances infinite.
AmalgamResult free_amalgam(const ForestHull& y0, const ForestHull& y1,
                           std::span<const std::pair<PointRef, PointRef>> base);

}  // namespace rforest
