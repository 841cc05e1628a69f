#include "rforest/predicate.hpp"

#include <algorithm>

namespace rforest {

AnchorPredicate::AnchorPredicate(HullPtr host) : host_(std::move(host)) {}

namespace {

void sort_anchors(const ForestHull& h, std::vector<Anchor>& as) {
  for (auto& a : as) {
    a.p = h.normalize(a.p);
    a.q = h.normalize(a.q);
  }
  std::sort(as.begin(), as.end(), [](const Anchor& x, const Anchor& y) {
    if (!(x.p == y.p)) return x.p < y.p;
    if (!(x.q == y.q)) return x.q < y.q;
    return x.v < y.v;
  });
}

}  // namespace

AnchorPredicate AnchorPredicate::checked(HullPtr host, std::vector<Anchor> anchors) {
  const ForestHull& h = *host;
  for (auto& a : anchors) {
    if (!h.valid_point(a.p) || !h.valid_point(a.q))
      throw Error(ErrorCode::BadInput, "anchor references a point outside the hull");
    if (a.v < 0 || a.v > 1) throw Error(ErrorCode::BadInput, "anchor value outside [0,1]");
  }
  for (size_t i = 0; i < anchors.size(); ++i)
    for (size_t j = i + 1; j < anchors.size(); ++j) {
      Ext bound = h.distance(anchors[i].p, anchors[j].p) + h.distance(anchors[i].q, anchors[j].q);
      if (bound.is_inf()) continue;
      if (rat_abs(anchors[i].v - anchors[j].v) > bound.value())
        throw Error(ErrorCode::BadInput, "anchors violate the 1-1-Lipschitz consistency bound");
    }
  return from_raw(std::move(host), std::move(anchors));
}

AnchorPredicate AnchorPredicate::from_raw(HullPtr host, std::vector<Anchor> raw) {
  AnchorPredicate out(host);
  const ForestHull& h = *host;
  for (auto& a : raw) {
    if (a.v < 0) a.v = 0;
    if (a.v > 1) a.v = 1;
  }
  sort_anchors(h, raw);
  // Canonical values: the inf-extension of the set at each anchor pair.
  std::vector<Rat> canon(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    Rat best = 1;
    for (size_t j = 0; j < raw.size(); ++j) {
      Ext d = h.distance(raw[i].p, raw[j].p) + h.distance(raw[i].q, raw[j].q);
      if (d.is_inf()) continue;
      best = rat_min(best, raw[j].v + d.value());
    }
    canon[i] = best;
  }
  for (size_t i = 0; i < raw.size(); ++i) raw[i].v = canon[i];
  // Prune anchors the rest of the set already forces: duplicates of an
  // earlier pair, values at the default 1, and anchors dominated through the
  // triangle inequality. Domination is acyclic, so dropping all of them is
  // sound.
  std::vector<char> keep(raw.size(), 1);
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].v == 1) {
      keep[i] = 0;
      continue;
    }
    if (i > 0 && raw[i].p == raw[i - 1].p && raw[i].q == raw[i - 1].q) {
      keep[i] = 0;
      continue;
    }
    for (size_t j = 0; j < raw.size() && keep[i]; ++j) {
      if (j == i || (raw[i].p == raw[j].p && raw[i].q == raw[j].q)) continue;
      Ext d = h.distance(raw[i].p, raw[j].p) + h.distance(raw[i].q, raw[j].q);
      if (d.is_finite() && raw[j].v + d.value() <= raw[i].v) keep[i] = 0;
    }
  }
  for (size_t i = 0; i < raw.size(); ++i)
    if (keep[i]) out.anchors_.push_back(raw[i]);
  return out;
}

Rat AnchorPredicate::eval(const PointRef& x, const PointRef& y) const {
  Rat best = 1;
  for (const auto& a : anchors_) {
    Ext d = host_->distance(x, a.p) + host_->distance(y, a.q);
    if (d.is_inf()) continue;
    if (a.v + d.value() < best) best = a.v + d.value();
  }
  return best;
}

AnchorPredicate AnchorPredicate::transported(HullPtr to, std::span<const size_t> gen_map) const {
  std::vector<Anchor> moved;
  moved.reserve(anchors_.size());
  for (const auto& a : anchors_)
    moved.push_back({transport_point(*host_, a.p, *to, gen_map),
                     transport_point(*host_, a.q, *to, gen_map), a.v});
  return from_raw(std::move(to), std::move(moved));
}

UnaryLip::UnaryLip(HullPtr host) : host_(std::move(host)) {}

UnaryLip UnaryLip::from_raw(HullPtr host, std::vector<std::pair<PointRef, Rat>> raw) {
  UnaryLip out(host);
  const ForestHull& h = *host;
  for (auto& a : raw) {
    a.first = h.normalize(a.first);
    if (a.second < 0) a.second = 0;
    if (a.second > 1) a.second = 1;
  }
  std::sort(raw.begin(), raw.end(), [](const auto& x, const auto& y) {
    if (!(x.first == y.first)) return x.first < y.first;
    return x.second < y.second;
  });
  std::vector<Rat> canon(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    Rat best = 1;
    for (size_t j = 0; j < raw.size(); ++j) {
      Ext d = h.distance(raw[i].first, raw[j].first);
      if (d.is_inf()) continue;
      best = rat_min(best, raw[j].second + d.value());
    }
    canon[i] = best;
  }
  for (size_t i = 0; i < raw.size(); ++i) raw[i].second = canon[i];
  std::vector<char> keep(raw.size(), 1);
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].second == 1) {
      keep[i] = 0;
      continue;
    }
    if (i > 0 && raw[i].first == raw[i - 1].first) {
      keep[i] = 0;
      continue;
    }
    for (size_t j = 0; j < raw.size() && keep[i]; ++j) {
      if (j == i || raw[i].first == raw[j].first) continue;
      Ext d = h.distance(raw[i].first, raw[j].first);
      if (d.is_finite() && raw[j].second + d.value() <= raw[i].second) keep[i] = 0;
    }
  }
  for (size_t i = 0; i < raw.size(); ++i)
    if (keep[i]) out.anchors_.push_back(raw[i]);
  return out;
}

Rat UnaryLip::eval(const PointRef& x) const {
  Rat best = 1;
  for (const auto& a : anchors_) {
    Ext d = host_->distance(x, a.first);
    if (d.is_inf()) continue;
    if (a.second + d.value() < best) best = a.second + d.value();
  }
  return best;
}

RFRStructure::RFRStructure(HullPtr h, AnchorPredicate p, std::vector<PointRef> t)
    : hull(std::move(h)), pred(std::move(p)), tuple(std::move(t)) {
  if (pred.host() != hull) throw Error(ErrorCode::BadInput, "structure: predicate lives on another hull");
  for (auto& pt : tuple)
    if (!hull->valid_point(pt)) throw Error(ErrorCode::BadInput, "structure: tuple point outside hull");
  for (auto& pt : tuple) pt = hull->normalize(pt);
}

LipschitzReport check_one_one_lipschitz(const RFRStructure& s, int subdivisions) {
  LipschitzReport rep;
  std::vector<PointRef> mesh = s.hull->sample_points(subdivisions);
  const size_t n = mesh.size();
  std::vector<std::vector<Rat>> val(n, std::vector<Rat>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) val[i][j] = s.pred.eval(mesh[i], mesh[j]);
  std::vector<std::vector<Ext>> d(n, std::vector<Ext>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) d[i][j] = s.hull->distance(mesh[i], mesh[j]);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < n; ++k)
        for (size_t l = 0; l < n; ++l) {
          Ext bound = d[i][k] + d[j][l];
          if (bound.is_inf()) continue;
          ++rep.pairs_checked;
          Rat slack = bound.value() - rat_abs(val[i][j] - val[k][l]);
          if (!rep.worst_slack || slack < *rep.worst_slack) rep.worst_slack = slack;
          if (slack < 0) rep.pass = false;
        }
  return rep;
}

GlueReport glue_check(HullPtr parent, const SubHull& B, const SubHull& C,
                      std::span<const std::pair<PointRef, Rat>> f) {
  GlueReport rep;
  // Coverage: every vertex and every edge interval of the parent must lie in
  // B union C.
  {
    SubHull uni(parent);
    for (size_t v = 0; v < parent->vertex_count(); ++v)
      if (B.vertex_in(v) || C.vertex_in(v)) uni.add_vertex(v);
    for (size_t e = 0; e < parent->edges().size(); ++e) {
      for (auto& s : B.intervals()[e]) uni.add_interval(e, s.first, s.second);
      for (auto& s : C.intervals()[e]) uni.add_interval(e, s.first, s.second);
    }
    uni.normalize();
    rep.covers = uni == full_subhull(parent);
    if (!rep.covers) {
      rep.pass = false;
      return rep;
    }
  }
  // Split the sampled points by side, then check the Lipschitz bound within
  // each side (precondition) and across (the gluing conclusion).
  std::vector<std::pair<PointRef, Rat>> inB, inC;
  for (auto& [pt, v] : f) {
    if (B.contains(pt)) inB.push_back({parent->normalize(pt), v});
    if (C.contains(pt)) inC.push_back({parent->normalize(pt), v});
  }
  auto check_pairs = [&](const std::vector<std::pair<PointRef, Rat>>& xs,
                         const std::vector<std::pair<PointRef, Rat>>& ys) {
    for (auto& [x, vx] : xs)
      for (auto& [y, vy] : ys) {
        Ext d = parent->distance(x, y);
        if (d.is_inf()) continue;
        Rat slack = d.value() - rat_abs(vx - vy);
        if (!rep.worst_slack || slack < *rep.worst_slack) rep.worst_slack = slack;
        if (slack < 0) {
          rep.pass = false;
          rep.violations.push_back({x, y});
        }
      }
  };
  check_pairs(inB, inB);
  check_pairs(inC, inC);
  check_pairs(inB, inC);
  return rep;
}

RFRStructure predicate_amalgam(const RFRStructure& side0, const RFRStructure& side1,
                               std::span<const std::pair<PointRef, PointRef>> base) {
  AmalgamResult am = free_amalgam(*side0.hull, *side1.hull, base);

  // Exact agreement at the projections of every anchor endpoint onto the
  // base; this is what keeps the union from undercutting either side.
  if (!base.empty()) {
    HullPtr h0(side0.hull), h1(side1.hull);
    std::vector<PointRef> b0, b1;
    std::vector<std::pair<PointRef, PointRef>> fwd01, fwd10;
    for (auto& [x0, x1] : base) {
      b0.push_back(x0);
      b1.push_back(x1);
      fwd01.push_back({x0, x1});
      fwd10.push_back({x1, x0});
    }
    SubHull base0 = truncated_hull(h0, b0, Ext::inf());
    SubHull base1 = truncated_hull(h1, b1, Ext::inf());
    std::vector<PointRef> probes0;  // on side0's base copy
    auto add_probe = [&](const ForestHull& h, const PointRef& pt, const SubHull& sub, bool from_side0) {
      if (distance_to_subhull(h, pt, sub).is_inf()) return;
      PointRef pr = project(h, pt, sub);
      probes0.push_back(from_side0 ? pr : transport_via_pairs(*side1.hull, pr, *side0.hull, fwd10));
    };
    for (const auto& a : side0.pred.anchors()) {
      add_probe(*side0.hull, a.p, base0, true);
      add_probe(*side0.hull, a.q, base0, true);
    }
    for (const auto& a : side1.pred.anchors()) {
      add_probe(*side1.hull, a.p, base1, false);
      add_probe(*side1.hull, a.q, base1, false);
    }
    for (const auto& x : probes0)
      for (const auto& y : probes0) {
        PointRef x1 = transport_via_pairs(*side0.hull, x, *side1.hull, fwd01);
        PointRef y1 = transport_via_pairs(*side0.hull, y, *side1.hull, fwd01);
        if (!(side0.pred.eval(x, y) == side1.pred.eval(x1, y1)))
          throw Error(ErrorCode::BadInput, "predicate_amalgam: sides disagree on the base");
      }
  }

  std::vector<Anchor> joint;
  auto move_anchors = [&](const RFRStructure& s, std::span<const size_t> gmap) {
    for (const auto& a : s.pred.anchors())
      joint.push_back({transport_point(*s.hull, a.p, *am.hull, gmap),
                       transport_point(*s.hull, a.q, *am.hull, gmap), a.v});
  };
  move_anchors(side0, am.gen0_map);
  move_anchors(side1, am.gen1_map);

  std::vector<PointRef> tuple;
  for (const auto& t : side0.tuple) tuple.push_back(transport_point(*side0.hull, t, *am.hull, am.gen0_map));
  for (const auto& t : side1.tuple) tuple.push_back(transport_point(*side1.hull, t, *am.hull, am.gen1_map));

  return RFRStructure(am.hull, AnchorPredicate::from_raw(am.hull, std::move(joint)), std::move(tuple));
}

}  // namespace rforest
