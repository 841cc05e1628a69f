#include "rforest/hull.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace rforest {

namespace {

// Canonical rooted encoding; children sort by their own encodings.
std::string encode_subtree(const std::vector<Vertex>& vs,
                           const std::vector<std::vector<std::pair<size_t, size_t>>>& adj,
                           const std::vector<HullEdge>& es, const std::vector<std::string>& labels,
                           size_t v, size_t parent) {
  std::vector<std::string> kids;
  for (auto [w, e] : adj[v]) {
    if (w == parent) continue;
    kids.push_back("[" + rat_str(es[e].len) + ":" + encode_subtree(vs, adj, es, labels, w, v) + "]");
  }
  std::sort(kids.begin(), kids.end());
  std::string out = vs[v].is_generator() ? "G<" + labels[vs[v].generator] + ">" : "S";
  for (auto& k : kids) out += k;
  return out;
}

}  // namespace

ForestHull ForestHull::from_parts(std::vector<Vertex> vertices, std::vector<HullEdge> edges,
                                  std::vector<std::string> generator_labels) {
  const size_t nv = vertices.size();
  std::vector<size_t> genseen(generator_labels.size(), SIZE_MAX);
  for (size_t v = 0; v < nv; ++v) {
    if (!vertices[v].is_generator()) continue;
    size_t g = vertices[v].generator;
    if (g >= generator_labels.size() || genseen[g] != SIZE_MAX)
      throw Error(ErrorCode::BadInput, "hull: bad generator tagging");
    genseen[g] = v;
  }
  for (size_t g = 0; g < generator_labels.size(); ++g)
    if (genseen[g] == SIZE_MAX) throw Error(ErrorCode::BadInput, "hull: generator without vertex");
  for (const auto& e : edges) {
    if (e.a >= nv || e.b >= nv || e.a == e.b) throw Error(ErrorCode::BadInput, "hull: bad edge endpoints");
    if (!(e.len > 0)) throw Error(ErrorCode::BadInput, "hull: non-positive edge length");
  }

  // Suppress degree-2 steiner vertices by merging their incident edges.
  std::vector<std::vector<std::pair<size_t, size_t>>> adj(nv);
  std::vector<char> edge_dead(edges.size(), 0), vertex_dead(nv, 0);
  auto rebuild_adj = [&]() {
    adj.assign(nv, {});
    for (size_t e = 0; e < edges.size(); ++e) {
      if (edge_dead[e]) continue;
      adj[edges[e].a].push_back({edges[e].b, e});
      adj[edges[e].b].push_back({edges[e].a, e});
    }
  };
  rebuild_adj();
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t v = 0; v < nv && !changed; ++v) {
      if (vertex_dead[v] || vertices[v].is_generator()) continue;
      if (adj[v].size() == 2) {
        auto [u, e1] = adj[v][0];
        auto [w, e2] = adj[v][1];
        if (u == w) throw Error(ErrorCode::BadInput, "hull: parallel edges form a cycle");
        edges.push_back({u, w, edges[e1].len + edges[e2].len});
        edge_dead.push_back(0);
        edge_dead[e1] = edge_dead[e2] = 1;
        vertex_dead[v] = 1;
        rebuild_adj();
        changed = true;
      } else if (adj[v].size() <= 1) {
        throw Error(ErrorCode::BadInput, "hull: dangling steiner vertex");
      }
    }
  }

  // Components and the forest condition V = E + C.
  std::vector<size_t> comp(nv, SIZE_MAX);
  size_t ncomp = 0;
  for (size_t s = 0; s < nv; ++s) {
    if (vertex_dead[s] || comp[s] != SIZE_MAX) continue;
    comp[s] = ncomp;
    std::queue<size_t> bfs;
    bfs.push(s);
    while (!bfs.empty()) {
      size_t v = bfs.front();
      bfs.pop();
      for (auto [w, e] : adj[v])
        if (comp[w] == SIZE_MAX) {
          comp[w] = ncomp;
          bfs.push(w);
        }
    }
    ++ncomp;
  }
  size_t live_edges = 0, live_vertices = 0;
  for (size_t e = 0; e < edges.size(); ++e)
    if (!edge_dead[e]) ++live_edges;
  for (size_t v = 0; v < nv; ++v)
    if (!vertex_dead[v]) ++live_vertices;
  if (live_edges + ncomp != live_vertices) throw Error(ErrorCode::BadInput, "hull: component is not a tree");

  ForestHull h;
  h.labels_ = std::move(generator_labels);

  // Canonical order: generators by index, then steiners in a deterministic DFS
  // (components by smallest generator, children by subtree encoding).
  std::vector<size_t> order(nv, SIZE_MAX);
  size_t next = 0;
  for (size_t g = 0; g < h.labels_.size(); ++g) order[genseen[g]] = next++;
  {
    std::vector<size_t> comp_min_gen(ncomp, SIZE_MAX);
    for (size_t g = 0; g < h.labels_.size(); ++g) {
      size_t c = comp[genseen[g]];
      if (comp_min_gen[c] == SIZE_MAX) comp_min_gen[c] = g;
    }
    std::vector<std::pair<size_t, size_t>> roots;  // (smallest generator, root vertex)
    for (size_t c = 0; c < ncomp; ++c) {
      if (comp_min_gen[c] == SIZE_MAX) throw Error(ErrorCode::BadInput, "hull: component without generator");
      roots.push_back({comp_min_gen[c], genseen[comp_min_gen[c]]});
    }
    std::sort(roots.begin(), roots.end());
    std::vector<size_t> steiner_seq;
    for (auto [mg, root] : roots) {
      std::vector<std::pair<size_t, size_t>> dfs{{root, SIZE_MAX}};
      while (!dfs.empty()) {
        auto [v, parent] = dfs.back();
        dfs.pop_back();
        if (!vertices[v].is_generator() && order[v] == SIZE_MAX) order[v] = next++;
        std::vector<std::pair<std::string, size_t>> kids;
        for (auto [w, e] : adj[v]) {
          if (w == parent) continue;
          kids.push_back({"[" + rat_str(edges[e].len) + ":" +
                              encode_subtree(vertices, adj, edges, h.labels_, w, v) + "]",
                          w});
        }
        std::sort(kids.begin(), kids.end());
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) dfs.push_back({it->second, v});
      }
    }
  }

  h.vertices_.resize(live_vertices);
  std::vector<size_t> inv(live_vertices, SIZE_MAX);
  for (size_t v = 0; v < nv; ++v) {
    if (vertex_dead[v]) continue;
    h.vertices_[order[v]] = vertices[v];
    inv[order[v]] = v;
  }
  h.gen_vertex_.resize(h.labels_.size());
  for (size_t g = 0; g < h.labels_.size(); ++g) h.gen_vertex_[g] = order[genseen[g]];
  for (size_t e = 0; e < edges.size(); ++e) {
    if (edge_dead[e]) continue;
    size_t a = order[edges[e].a], b = order[edges[e].b];
    Rat len = edges[e].len;
    if (a > b) std::swap(a, b);
    h.edges_.push_back({a, b, std::move(len)});
  }
  std::sort(h.edges_.begin(), h.edges_.end(),
            [](const HullEdge& x, const HullEdge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });

  h.component_.resize(live_vertices);
  for (size_t v = 0; v < live_vertices; ++v) h.component_[v] = comp[inv[v]];
  {
    std::map<size_t, size_t> remap;
    for (auto& c : h.component_) {
      auto [it, fresh] = remap.emplace(c, remap.size());
      c = it->second;
    }
    h.n_components_ = remap.size();
  }

  h.adj_.assign(live_vertices, {});
  for (size_t e = 0; e < h.edges_.size(); ++e) {
    h.adj_[h.edges_[e].a].push_back({h.edges_[e].b, e});
    h.adj_[h.edges_[e].b].push_back({h.edges_[e].a, e});
  }

  // Exact all-pairs vertex distances, one BFS per vertex.
  h.vdist_.assign(live_vertices, std::vector<Ext>(live_vertices, Ext::inf()));
  for (size_t s = 0; s < live_vertices; ++s) {
    h.vdist_[s][s] = Ext(Rat(0));
    std::queue<size_t> bfs;
    bfs.push(s);
    std::vector<char> seen(live_vertices, 0);
    seen[s] = 1;
    while (!bfs.empty()) {
      size_t v = bfs.front();
      bfs.pop();
      for (auto [w, e] : h.adj_[v]) {
        if (seen[w]) continue;
        seen[w] = 1;
        h.vdist_[s][w] = h.vdist_[s][v] + Ext(h.edges_[e].len);
        bfs.push(w);
      }
    }
  }
  return h;
}

bool ForestHull::valid_point(const PointRef& p) const {
  if (p.is_vertex()) return p.vertex < vertices_.size();
  return p.edge < edges_.size() && p.offset >= 0 && p.offset <= edges_[p.edge].len;
}

PointRef ForestHull::normalize(PointRef p) const {
  if (!valid_point(p)) throw Error(ErrorCode::BadInput, "dangling point reference");
  if (p.is_vertex()) return p;
  if (p.offset == 0) return PointRef::at_vertex(edges_[p.edge].a);
  if (p.offset == edges_[p.edge].len) return PointRef::at_vertex(edges_[p.edge].b);
  return p;
}

size_t ForestHull::component_of_point(const PointRef& p) const {
  PointRef q = normalize(p);
  return component_[q.is_vertex() ? q.vertex : edges_[q.edge].a];
}

Ext ForestHull::vertex_distance(size_t u, size_t v) const { return vdist_[u][v]; }

Ext ForestHull::distance(const PointRef& pa, const PointRef& pb) const {
  PointRef a = normalize(pa), b = normalize(pb);
  if (a.is_vertex() && b.is_vertex()) return vdist_[a.vertex][b.vertex];
  if (a.is_vertex()) std::swap(a, b);
  const HullEdge& ea = edges_[a.edge];
  if (!b.is_vertex() && b.edge == a.edge) return Ext(rat_abs(a.offset - b.offset));
  auto via = [&](size_t end, const Rat& leg) -> Ext {
    Ext base = b.is_vertex() ? vdist_[end][b.vertex]
                             : ext_min(vdist_[end][edges_[b.edge].a] + Ext(b.offset),
                                       vdist_[end][edges_[b.edge].b] + Ext(edges_[b.edge].len - b.offset));
    return base + Ext(leg);
  };
  return ext_min(via(ea.a, a.offset), via(ea.b, ea.len - a.offset));
}

std::vector<size_t> ForestHull::vertex_path(size_t u, size_t v) const {
  std::vector<size_t> parent(vertices_.size(), SIZE_MAX);
  std::queue<size_t> bfs;
  bfs.push(u);
  parent[u] = u;
  while (!bfs.empty()) {
    size_t x = bfs.front();
    bfs.pop();
    if (x == v) break;
    for (auto [w, e] : adj_[x])
      if (parent[w] == SIZE_MAX) {
        parent[w] = x;
        bfs.push(w);
      }
  }
  if (parent[v] == SIZE_MAX) throw Error(ErrorCode::InfiniteDistance, "no path between components");
  std::vector<size_t> path{v};
  while (path.back() != u) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<ForestHull::Seg> ForestHull::walk(const PointRef& pa, const PointRef& pb) const {
  PointRef a = normalize(pa), b = normalize(pb);
  std::vector<Seg> segs;
  if (a == b) return segs;
  if (!a.is_vertex() && !b.is_vertex() && a.edge == b.edge) {
    segs.push_back({a.edge, a.offset, b.offset});
    return segs;
  }
  // An interior endpoint enters the vertex skeleton through exactly one end of
  // its edge (the tree has no alternative route).
  auto entry = [&](const PointRef& p, const PointRef& other) -> size_t {
    if (p.is_vertex()) return p.vertex;
    const HullEdge& e = edges_[p.edge];
    Ext da = distance(PointRef::at_vertex(e.a), other) + Ext(p.offset);
    Ext db = distance(PointRef::at_vertex(e.b), other) + Ext(e.len - p.offset);
    if (da.is_inf() && db.is_inf()) throw Error(ErrorCode::InfiniteDistance, "walk across components");
    return da <= db ? e.a : e.b;
  };
  size_t va = entry(a, b), vb = entry(b, a);
  if (!a.is_vertex())
    segs.push_back({a.edge, a.offset, va == edges_[a.edge].a ? Rat(0) : edges_[a.edge].len});
  std::vector<size_t> path = vertex_path(va, vb);
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    size_t eid = SIZE_MAX;
    for (auto [w, e] : adj_[path[i]])
      if (w == path[i + 1]) eid = e;
    segs.push_back({eid, edges_[eid].a == path[i] ? Rat(0) : edges_[eid].len,
                    edges_[eid].a == path[i] ? edges_[eid].len : Rat(0)});
  }
  if (!b.is_vertex())
    segs.push_back({b.edge, vb == edges_[b.edge].a ? Rat(0) : edges_[b.edge].len, b.offset});
  std::erase_if(segs, [](const Seg& s) { return s.t0 == s.t1; });
  return segs;
}

PointRef ForestHull::interp(const PointRef& a, const Rat& r, const PointRef& b) const {
  if (r < 0 || r > 1) throw Error(ErrorCode::BadInput, "interp parameter outside [0,1]");
  Ext D = distance(a, b);
  if (D.is_inf()) throw Error(ErrorCode::InfiniteDistance, "interp across components");
  if (D.value() == 0 || r == 0) return normalize(a);
  if (r == 1) return normalize(b);
  Rat target = r * D.value();
  for (const Seg& s : walk(a, b)) {
    Rat len = rat_abs(s.t1 - s.t0);
    if (target <= len) {
      Rat off = s.t0 + (s.t1 > s.t0 ? target : -target);
      return normalize(PointRef::on_edge(s.edge, off));
    }
    target -= len;
  }
  return normalize(b);
}

std::vector<PointRef> ForestHull::sample_points(int subdivisions) const {
  std::vector<PointRef> out;
  for (size_t v = 0; v < vertices_.size(); ++v) out.push_back(PointRef::at_vertex(v));
  for (size_t e = 0; e < edges_.size(); ++e)
    for (int k = 1; k <= subdivisions; ++k)
      out.push_back(PointRef::on_edge(e, edges_[e].len * Rat(k) / Rat(subdivisions + 1)));
  return out;
}

FiniteExtendedMetric ForestHull::generator_metric() const {
  const size_t n = labels_.size();
  std::vector<std::vector<Ext>> mat(n, std::vector<Ext>(n, Ext(Rat(0))));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) mat[i][j] = vdist_[gen_vertex_[i]][gen_vertex_[j]];
  return FiniteExtendedMetric(labels_, std::move(mat));
}

std::string ForestHull::signature() const {
  std::vector<size_t> root(n_components_, SIZE_MAX);
  std::vector<std::string> root_label(n_components_);
  for (size_t g = 0; g < labels_.size(); ++g) {
    size_t c = component_[gen_vertex_[g]];
    if (root[c] == SIZE_MAX || labels_[g] < root_label[c]) {
      root[c] = gen_vertex_[g];
      root_label[c] = labels_[g];
    }
  }
  std::vector<std::string> comps;
  for (size_t c = 0; c < n_components_; ++c)
    comps.push_back(encode_subtree(vertices_, adj_, edges_, labels_, root[c], SIZE_MAX));
  std::sort(comps.begin(), comps.end());
  std::string out;
  for (auto& c : comps) out += "{" + c + "}";
  return out;
}

HullPtr build_hull(const FiniteExtendedMetric& m) {
  ValidationReport rep = check_metric(m);
  if (!rep.valid)
    throw Error(ErrorCode::BadInput,
                "build_hull: metric invalid (" +
                    (rep.violations.empty() ? std::string("?") : rep.violations[0].detail) + ")");
  TreeEmbeddability emb = is_tree_embeddable(m);
  if (!emb.embeddable)
    throw NotTreeEmbeddableError(*emb.witness, "build_hull: metric violates the four-point condition");

  const size_t n = m.size();
  std::vector<Vertex> vertices;
  std::vector<HullEdge> edges;
  std::vector<size_t> gen_at(n, SIZE_MAX);
  std::vector<std::vector<std::pair<size_t, size_t>>> adj;

  auto add_vertex = [&](Vertex v) {
    vertices.push_back(v);
    adj.push_back({});
    return vertices.size() - 1;
  };
  auto add_edge = [&](size_t a, size_t b, Rat len) {
    edges.push_back({a, b, std::move(len)});
    adj[a].push_back({b, edges.size() - 1});
    adj[b].push_back({a, edges.size() - 1});
  };
  auto drop_edge = [&](size_t e) {
    auto scrub = [&](size_t v) { std::erase_if(adj[v], [&](auto pr) { return pr.second == e; }); };
    scrub(edges[e].a);
    scrub(edges[e].b);
    edges[e].len = 0;  // tombstone, filtered out below
  };
  // Next vertex from u on the unique path to target.
  auto step_toward = [&](size_t u, size_t target) -> std::pair<size_t, size_t> {
    std::vector<size_t> par(vertices.size(), SIZE_MAX), pare(vertices.size(), SIZE_MAX);
    std::queue<size_t> q;
    q.push(target);
    par[target] = target;
    while (!q.empty()) {
      size_t x = q.front();
      q.pop();
      for (auto [w, e] : adj[x])
        if (par[w] == SIZE_MAX) {
          par[w] = x;
          pare[w] = e;
          q.push(w);
        }
    }
    if (par[u] == SIZE_MAX || par[u] == u)
      throw Error(ErrorCode::BadInput, "build_hull: internal path failure");
    return {par[u], pare[u]};
  };

  for (const auto& block : finite_components(m)) {
    size_t b0 = block[0];
    gen_at[b0] = add_vertex({Vertex::Kind::Generator, b0});
    std::vector<size_t> placed{b0};
    for (size_t bi = 1; bi < block.size(); ++bi) {
      size_t a = block[bi];
      // Attach at distance t from b0 along the path toward the generator with
      // the largest Gromov product; that point is the projection of a onto
      // the hull built so far.
      Rat t = gromov_product(m, a, placed[0], b0);
      size_t best = placed[0];
      for (size_t j = 1; j < placed.size(); ++j) {
        Rat g = gromov_product(m, a, placed[j], b0);
        if (g > t) {
          t = g;
          best = placed[j];
        }
      }
      size_t attach = SIZE_MAX;
      {
        size_t u = gen_at[b0];
        Rat remain = t;
        while (attach == SIZE_MAX) {
          if (remain == 0) {
            attach = u;
            break;
          }
          auto [nxt, eid] = step_toward(u, gen_at[best]);
          if (remain < edges[eid].len) {
            size_t s = add_vertex({Vertex::Kind::Steiner, SIZE_MAX});
            size_t va = edges[eid].a, vb = edges[eid].b;
            Rat len = edges[eid].len;
            drop_edge(eid);
            size_t far = (va == u) ? vb : va;
            add_edge(u, s, remain);
            add_edge(s, far, len - remain);
            attach = s;
          } else {
            remain -= edges[eid].len;
            u = nxt;
          }
        }
      }
      Rat leg = m.dist(b0, a).value() - t;
      if (leg == 0) {
        if (vertices[attach].is_generator())
          throw Error(ErrorCode::BadInput, "build_hull: generators at distance zero");
        vertices[attach] = {Vertex::Kind::Generator, a};
        gen_at[a] = attach;
      } else {
        gen_at[a] = add_vertex({Vertex::Kind::Generator, a});
        add_edge(attach, gen_at[a], leg);
      }
      placed.push_back(a);
    }
  }

  std::vector<HullEdge> live;
  for (auto& e : edges)
    if (e.len > 0) live.push_back(e);
  auto hull = std::make_shared<ForestHull>(
      ForestHull::from_parts(std::move(vertices), std::move(live), m.labels()));

  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (!(hull->vertex_distance(hull->generator_vertex(i), hull->generator_vertex(j)) == m.dist(i, j)))
        throw Error(ErrorCode::BadInput, "build_hull: constructed hull does not reproduce the metric");
  return hull;
}

SubHull::SubHull(HullPtr host) : host_(std::move(host)) {
  intervals_.resize(host_->edges().size());
  vertex_in_.assign(host_->vertex_count(), 0);
}

void SubHull::add_vertex(size_t v) {
  if (v >= vertex_in_.size()) throw Error(ErrorCode::BadInput, "subhull: bad vertex");
  vertex_in_[v] = 1;
  dirty_ = true;
}

void SubHull::add_interval(size_t edge, Rat lo, Rat hi) {
  if (edge >= intervals_.size()) throw Error(ErrorCode::BadInput, "subhull: bad edge");
  if (lo > hi) std::swap(lo, hi);
  if (lo < 0 || hi > host_->edges()[edge].len)
    throw Error(ErrorCode::BadInput, "subhull: interval out of range");
  intervals_[edge].push_back({std::move(lo), std::move(hi)});
  dirty_ = true;
}

void SubHull::add_point(const PointRef& p) {
  PointRef q = host_->normalize(p);
  if (q.is_vertex())
    add_vertex(q.vertex);
  else
    add_interval(q.edge, q.offset, q.offset);
}

void SubHull::add_segment(const PointRef& a, const PointRef& b) {
  add_point(a);
  add_point(b);
  for (const auto& s : host_->walk(a, b)) add_interval(s.edge, s.t0, s.t1);
}

void SubHull::normalize() {
  for (size_t e = 0; e < intervals_.size(); ++e) {
    auto& iv = intervals_[e];
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<Rat, Rat>> merged;
    for (auto& span : iv) {
      if (!merged.empty() && span.first <= merged.back().second)
        merged.back().second = rat_max(merged.back().second, span.second);
      else
        merged.push_back(span);
    }
    // Interval ends at an edge endpoint imply vertex membership; degenerate
    // end intervals collapse into the vertex set.
    std::vector<std::pair<Rat, Rat>> kept;
    for (auto& span : merged) {
      const HullEdge& ed = host_->edges()[e];
      if (span.first == 0) vertex_in_[ed.a] = 1;
      if (span.second == ed.len) vertex_in_[ed.b] = 1;
      bool degenerate_at_end = span.first == span.second && (span.first == 0 || span.second == ed.len);
      if (!degenerate_at_end) kept.push_back(span);
    }
    iv = std::move(kept);
  }
  dirty_ = false;
}

bool SubHull::empty() const {
  for (auto f : vertex_in_)
    if (f) return false;
  for (auto& iv : intervals_)
    if (!iv.empty()) return false;
  return true;
}

bool SubHull::contains(const PointRef& p) const {
  PointRef q = host_->normalize(p);
  if (q.is_vertex()) return vertex_in_[q.vertex];
  for (auto& span : intervals_[q.edge])
    if (span.first <= q.offset && q.offset <= span.second) return true;
  return false;
}

std::vector<PointRef> SubHull::mesh(int subdivisions) const {
  std::set<PointRef> pts;
  for (size_t v = 0; v < vertex_in_.size(); ++v)
    if (vertex_in_[v]) pts.insert(PointRef::at_vertex(v));
  for (size_t e = 0; e < intervals_.size(); ++e)
    for (auto& span : intervals_[e]) {
      pts.insert(host_->normalize(PointRef::on_edge(e, span.first)));
      pts.insert(host_->normalize(PointRef::on_edge(e, span.second)));
      for (int k = 1; k <= subdivisions; ++k) {
        Rat off = span.first + (span.second - span.first) * Rat(k) / Rat(subdivisions + 1);
        pts.insert(host_->normalize(PointRef::on_edge(e, off)));
      }
    }
  return {pts.begin(), pts.end()};
}

bool operator==(const SubHull& x, const SubHull& y) {
  return x.vertex_in_ == y.vertex_in_ && x.intervals_ == y.intervals_;
}

SubHull full_subhull(HullPtr h) {
  SubHull s(h);
  for (size_t v = 0; v < h->vertex_count(); ++v) s.add_vertex(v);
  for (size_t e = 0; e < h->edges().size(); ++e) s.add_interval(e, Rat(0), h->edges()[e].len);
  s.normalize();
  return s;
}

SubHull segment_subhull(HullPtr h, const PointRef& a, const PointRef& b) {
  SubHull s(h);
  s.add_segment(a, b);
  s.normalize();
  return s;
}

SubHull truncated_hull(HullPtr h, std::span<const PointRef> tuple, const Ext& K) {
  SubHull s(h);
  for (size_t i = 0; i < tuple.size(); ++i)
    for (size_t j = i; j < tuple.size(); ++j)
      if (h->distance(tuple[i], tuple[j]) < K) s.add_segment(tuple[i], tuple[j]);
  s.normalize();
  return s;
}

SubHull hull_intersection(const SubHull& s0, const SubHull& s1) {
  if (s0.host() != s1.host()) throw Error(ErrorCode::BadInput, "intersection: different hosts");
  SubHull out(s0.host());
  for (size_t v = 0; v < s0.host()->vertex_count(); ++v)
    if (s0.vertex_in(v) && s1.vertex_in(v)) out.add_vertex(v);
  for (size_t e = 0; e < s0.host()->edges().size(); ++e)
    for (auto& a : s0.intervals()[e])
      for (auto& b : s1.intervals()[e]) {
        Rat lo = rat_max(a.first, b.first), hi = rat_min(a.second, b.second);
        if (lo <= hi) out.add_interval(e, lo, hi);
      }
  out.normalize();
  return out;
}

Ext distance_to_subhull(const ForestHull& h, const PointRef& p, const SubHull& sub) {
  PointRef q = h.normalize(p);
  Ext best = Ext::inf();
  for (size_t v = 0; v < h.vertex_count(); ++v)
    if (sub.vertex_in(v)) best = ext_min(best, h.distance(q, PointRef::at_vertex(v)));
  for (size_t e = 0; e < h.edges().size(); ++e)
    for (auto& span : sub.intervals()[e]) {
      std::vector<Rat> cand{span.first, span.second};
      if (!q.is_vertex() && q.edge == e && q.offset > span.first && q.offset < span.second)
        cand.push_back(q.offset);
      for (auto& t : cand) best = ext_min(best, h.distance(q, PointRef::on_edge(e, t)));
    }
  return best;
}

PointRef project(const ForestHull& h, const PointRef& p, const SubHull& sub) {
  PointRef q = h.normalize(p);
  Ext best = distance_to_subhull(h, q, sub);
  if (best.is_inf()) throw Error(ErrorCode::Unreachable, "project: subhull unreachable from point");
  std::optional<PointRef> arg;
  auto consider = [&](PointRef c) {
    c = h.normalize(c);
    if (!(h.distance(q, c) == best)) return;
    if (!arg || c < *arg) arg = c;
  };
  for (size_t v = 0; v < h.vertex_count(); ++v)
    if (sub.vertex_in(v)) consider(PointRef::at_vertex(v));
  for (size_t e = 0; e < h.edges().size(); ++e)
    for (auto& span : sub.intervals()[e]) {
      consider(PointRef::on_edge(e, span.first));
      consider(PointRef::on_edge(e, span.second));
      if (!q.is_vertex() && q.edge == e && q.offset > span.first && q.offset < span.second)
        consider(q);
      // Distance along an edge is monotone from each end; an interior
      // minimizer sits where the two end-anchored values meet.
      Ext da = h.distance(q, PointRef::at_vertex(h.edges()[e].a));
      Ext db = h.distance(q, PointRef::at_vertex(h.edges()[e].b));
      if (da.is_finite() && db.is_finite()) {
        Rat t = (db.value() + h.edges()[e].len - da.value()) / 2;
        if (t > span.first && t < span.second) consider(PointRef::on_edge(e, t));
      }
    }
  return *arg;
}

bool is_large(const Rat& K, const FiniteExtendedMetric& m, std::span<const size_t> tuple) {
  if (K < 1) return false;
  for (size_t i = 0; i < tuple.size(); ++i)
    for (size_t j = i + 1; j < tuple.size(); ++j) {
      const Ext& d = m.dist(tuple[i], tuple[j]);
      if (d.is_finite() && !(d.value() < K)) return false;
    }
  return true;
}

bool is_large(const Rat& K, const ForestHull& h, std::span<const PointRef> tuple) {
  if (K < 1) return false;
  for (size_t i = 0; i < tuple.size(); ++i)
    for (size_t j = i + 1; j < tuple.size(); ++j) {
      Ext d = h.distance(tuple[i], tuple[j]);
      if (d.is_finite() && !(d.value() < K)) return false;
    }
  return true;
}

PointRef transport_via_pairs(const ForestHull& from, const PointRef& p, const ForestHull& to,
                             std::span<const std::pair<PointRef, PointRef>> pairs) {
  PointRef q = from.normalize(p);
  for (size_t k = 0; k < pairs.size(); ++k) {
    Ext dk = from.distance(pairs[k].first, q);
    if (dk.is_finite() && dk.value() == 0) return to.normalize(pairs[k].second);
  }
  for (size_t k = 0; k < pairs.size(); ++k)
    for (size_t l = 0; l < pairs.size(); ++l) {
      if (k == l) continue;
      Ext dk = from.distance(pairs[k].first, q), dl = from.distance(q, pairs[l].first);
      Ext dkl = from.distance(pairs[k].first, pairs[l].first);
      if (dkl.is_inf() || dk.is_inf() || dl.is_inf()) continue;
      if (dk + dl == dkl && dkl.value() > 0) {
        Rat r = dk.value() / dkl.value();
        return to.interp(pairs[k].second, r, pairs[l].second);
      }
    }
  throw Error(ErrorCode::BadInput, "transport: point not on the span of the reference pairs");
}

PointRef transport_point(const ForestHull& from, const PointRef& p, const ForestHull& to,
                         std::span<const size_t> gen_map) {
  std::vector<std::pair<PointRef, PointRef>> pairs;
  pairs.reserve(gen_map.size());
  for (size_t g = 0; g < gen_map.size(); ++g)
    pairs.push_back({PointRef::at_vertex(from.generator_vertex(g)),
                     PointRef::at_vertex(to.generator_vertex(gen_map[g]))});
  return transport_via_pairs(from, p, to, pairs);
}

AmalgamResult free_amalgam(const ForestHull& y0, const ForestHull& y1,
                           std::span<const std::pair<PointRef, PointRef>> base) {
  for (size_t k = 0; k < base.size(); ++k)
    for (size_t l = 0; l < base.size(); ++l)
      if (!(y0.distance(base[k].first, base[l].first) == y1.distance(base[k].second, base[l].second)))
        throw Error(ErrorCode::BadInput, "free_amalgam: base embeddings not isometric");

  const size_t n0 = y0.generator_count(), n1 = y1.generator_count();
  std::vector<std::string> labels = y0.generator_labels();
  {
    std::set<std::string> used(labels.begin(), labels.end());
    for (auto& l : y1.generator_labels()) {
      std::string cand = l;
      while (used.count(cand)) cand += "~1";
      used.insert(cand);
      labels.push_back(cand);
    }
  }

  // Base points grouped by finite class; the cross formula runs through the
  // projections onto each class reachable from both sides.
  HullPtr h0(&y0, [](const ForestHull*) {});
  HullPtr h1(&y1, [](const ForestHull*) {});
  std::vector<std::vector<size_t>> classes;
  {
    std::vector<size_t> assigned(base.size(), SIZE_MAX);
    for (size_t k = 0; k < base.size(); ++k) {
      if (assigned[k] != SIZE_MAX) continue;
      size_t id = classes.size();
      classes.push_back({});
      for (size_t l = k; l < base.size(); ++l)
        if (assigned[l] == SIZE_MAX && y0.distance(base[k].first, base[l].first).is_finite()) {
          assigned[l] = id;
          classes[id].push_back(l);
        }
    }
  }
  struct ClassSub {
    SubHull in0, in1;
    std::vector<std::pair<PointRef, PointRef>> back;  // Y1 -> Y0
  };
  std::vector<ClassSub> subs;
  for (auto& cls : classes) {
    std::vector<PointRef> p0, p1;
    std::vector<std::pair<PointRef, PointRef>> back;
    for (size_t k : cls) {
      p0.push_back(base[k].first);
      p1.push_back(base[k].second);
      back.push_back({base[k].second, base[k].first});
    }
    subs.push_back(
        {truncated_hull(h0, p0, Ext::inf()), truncated_hull(h1, p1, Ext::inf()), std::move(back)});
  }

  const size_t n = n0 + n1;
  std::vector<std::vector<Ext>> mat(n, std::vector<Ext>(n, Ext::inf()));
  for (size_t i = 0; i < n0; ++i)
    for (size_t j = 0; j < n0; ++j)
      mat[i][j] = y0.vertex_distance(y0.generator_vertex(i), y0.generator_vertex(j));
  for (size_t i = 0; i < n1; ++i)
    for (size_t j = 0; j < n1; ++j)
      mat[n0 + i][n0 + j] = y1.vertex_distance(y1.generator_vertex(i), y1.generator_vertex(j));
  for (size_t i = 0; i < n0; ++i)
    for (size_t j = 0; j < n1; ++j) {
      PointRef g0 = PointRef::at_vertex(y0.generator_vertex(i));
      PointRef g1 = PointRef::at_vertex(y1.generator_vertex(j));
      Ext best = Ext::inf();
      for (auto& cs : subs) {
        Ext d0 = distance_to_subhull(y0, g0, cs.in0);
        Ext d1 = distance_to_subhull(y1, g1, cs.in1);
        if (d0.is_inf() || d1.is_inf()) continue;
        PointRef pi0 = project(y0, g0, cs.in0);
        PointRef pi1 = project(y1, g1, cs.in1);
        PointRef pi1_in0 = transport_via_pairs(y1, pi1, y0, cs.back);
        best = ext_min(best, d0 + y0.distance(pi0, pi1_in0) + d1);
      }
      mat[i][n0 + j] = best;
      mat[n0 + j][i] = best;
    }

  FiniteExtendedMetric combined(labels, std::move(mat));
  AmalgamResult out;
  out.hull = build_hull(combined);
  out.metric = combined;
  for (size_t i = 0; i < n0; ++i) out.gen0_map.push_back(i);
  for (size_t j = 0; j < n1; ++j) out.gen1_map.push_back(n0 + j);
  return out;
}

}  // namespace rforest
