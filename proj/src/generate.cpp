#include "rforest/generate.hpp"

#include "rforest/heart.hpp"
#include "rforest/predicate.hpp"

namespace rforest {

RandomForest random_forest(uint64_t seed, size_t n_generators, size_t n_components, const Rat& scale) {
  Rng rng(seed);
  if (n_components == 0) n_components = 1;
  if (n_components > n_generators) n_components = n_generators;

  // Grow an explicit weighted tree per component: each new generator hangs
  // from a random existing point (vertex or split of an edge).
  std::vector<Vertex> vertices;
  std::vector<HullEdge> edges;
  std::vector<std::vector<size_t>> comp_vertices;
  std::vector<std::vector<size_t>> comp_edges;
  std::vector<std::string> labels;

  auto rand_len = [&]() { return scale * rng.ratio(1, 32, 16); };

  for (size_t g = 0; g < n_generators; ++g) {
    labels.push_back("p" + std::to_string(g));
    size_t c = g < n_components ? g : rng.below(n_components);
    if (c >= comp_vertices.size()) {
      comp_vertices.push_back({});
      comp_edges.push_back({});
    }
    size_t vid = vertices.size();
    vertices.push_back({Vertex::Kind::Generator, g});
    if (comp_vertices[c].empty()) {
      comp_vertices[c].push_back(vid);
      continue;
    }
    // Attach at a vertex or at an interior split of an edge of component c.
    bool split = !comp_edges[c].empty() && rng.chance(1, 2);
    size_t attach;
    if (split) {
      size_t e = comp_edges[c][rng.below(comp_edges[c].size())];
      Rat len = edges[e].len;
      Rat at = len * rng.ratio(1, 15, 16);
      size_t s = vertices.size();
      vertices.push_back({Vertex::Kind::Steiner, SIZE_MAX});
      comp_vertices[c].push_back(s);
      size_t vb = edges[e].b;
      edges[e].b = s;
      Rat keep = at;
      Rat rest = len - at;
      edges[e].len = keep;
      edges.push_back({s, vb, rest});
      comp_edges[c].push_back(edges.size() - 1);
      attach = s;
    } else {
      attach = comp_vertices[c][rng.below(comp_vertices[c].size())];
    }
    edges.push_back({attach, vid, rand_len()});
    comp_edges[c].push_back(edges.size() - 1);
    comp_vertices[c].push_back(vid);
  }

  RandomForest out;
  if (n_generators == 0) {
    out.hull = std::make_shared<ForestHull>(ForestHull::from_parts({}, {}, {}));
    out.metric = out.hull->generator_metric();
    return out;
  }
  ForestHull raw = ForestHull::from_parts(vertices, edges, labels);
  out.metric = raw.generator_metric();
  out.hull = build_hull(out.metric);
  return out;
}

PointRef random_point(Rng& rng, const ForestHull& h) {
  size_t nv = h.vertex_count(), ne = h.edges().size();
  if (nv == 0) throw Error(ErrorCode::BadInput, "random_point: empty hull");
  if (ne == 0 || rng.chance(1, 3)) return PointRef::at_vertex(rng.below(nv));
  size_t e = rng.below(ne);
  Rat off = h.edges()[e].len * rng.ratio(1, 15, 16);
  return h.normalize(PointRef::on_edge(e, off));
}

RFRStructure random_structure(uint64_t seed, size_t n_generators, size_t n_components, size_t n_anchors,
                              const Rat& scale) {
  RandomForest rf = random_forest(seed, n_generators, n_components, scale);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<Anchor> anchors;
  for (size_t k = 0; k < n_anchors && n_generators > 0; ++k)
    anchors.push_back({random_point(rng, *rf.hull), random_point(rng, *rf.hull), rng.ratio(0, 32, 32)});
  std::vector<PointRef> tuple;
  for (size_t g = 0; g < rf.hull->generator_count(); ++g)
    tuple.push_back(PointRef::at_vertex(rf.hull->generator_vertex(g)));
  return RFRStructure(rf.hull, AnchorPredicate::from_raw(rf.hull, std::move(anchors)), std::move(tuple));
}

HeartStructure random_heart(uint64_t seed, size_t n_points, const Rat& delta) {
  Rng rng(seed);
  HeartStructure out;
  out.delta = delta;
  out.radii.push_back(Rat(0));  // basepoint
  out.radii.push_back(Rat(1));  // keep the top of the interval covered
  // Fill on a grid fine enough for delta, plus random extras.
  Rat step = delta;  // consecutive grid radii differ by delta, so gaps pass
  for (Rat r = step; r < 1; r += step) out.radii.push_back(r);
  for (size_t k = out.radii.size(); k < n_points; ++k) out.radii.push_back(rng.ratio(0, 64, 64));
  return out;
}

}  // namespace rforest
