#include "rforest/typepaths.hpp"

#include <algorithm>
#include <set>

namespace rforest {

namespace {

// Interpolation family of a tuple: for each ordered finite-distance pair
// (j,k) and grid index s, the point at s/mesh of the way from t_j to t_k.
std::vector<std::optional<PointRef>> mesh_family(const RFRStructure& s, int mesh) {
  const size_t n = s.tuple.size();
  std::vector<std::optional<PointRef>> pts(n * n * (mesh + 1));
  for (size_t j = 0; j < n; ++j)
    for (size_t k = 0; k < n; ++k) {
      if (s.hull->distance(s.tuple[j], s.tuple[k]).is_inf()) continue;
      for (int t = 0; t <= mesh; ++t)
        pts[(j * n + k) * (mesh + 1) + t] = s.hull->interp(s.tuple[j], Rat(t) / Rat(mesh), s.tuple[k]);
    }
  return pts;
}

}  // namespace

TypeFingerprint fingerprint(const RFRStructure& s, int mesh) {
  if (mesh < 1) throw Error(ErrorCode::BadInput, "fingerprint: mesh must be positive");
  TypeFingerprint fp;
  fp.n = s.tuple.size();
  fp.mesh = mesh;
  fp.dist.assign(fp.n, std::vector<Ext>(fp.n, Ext(Rat(0))));
  for (size_t i = 0; i < fp.n; ++i)
    for (size_t j = 0; j < fp.n; ++j) fp.dist[i][j] = s.hull->distance(s.tuple[i], s.tuple[j]);
  std::vector<std::optional<PointRef>> pts = mesh_family(s, mesh);
  fp.rvals.assign(pts.size(), std::vector<std::optional<Rat>>(pts.size()));
  for (size_t x = 0; x < pts.size(); ++x) {
    if (!pts[x]) continue;
    for (size_t y = 0; y < pts.size(); ++y)
      if (pts[y]) fp.rvals[x][y] = s.pred.eval(*pts[x], *pts[y]);
  }
  return fp;
}

IsoReport pointed_iso_check(const RFRStructure& a, const RFRStructure& b, int mesh, const Rat& tol) {
  IsoReport rep;
  rep.worst_pred_dev = Rat(0);
  if (a.tuple.size() != b.tuple.size()) {
    rep.detail = "tuple lengths differ";
    return rep;
  }
  TypeFingerprint fa = fingerprint(a, mesh), fb = fingerprint(b, mesh);
  rep.dist_equal = fa.dist == fb.dist;
  if (!rep.dist_equal) {
    rep.detail = "distance matrices differ";
    return rep;
  }
  for (size_t x = 0; x < fa.rvals.size(); ++x)
    for (size_t y = 0; y < fa.rvals.size(); ++y) {
      if (fa.rvals[x][y].has_value() != fb.rvals[x][y].has_value()) {
        rep.detail = "mesh families differ";  // cannot happen once distances match
        return rep;
      }
      if (fa.rvals[x][y])
        rep.worst_pred_dev = rat_max(rep.worst_pred_dev, rat_abs(*fa.rvals[x][y] - *fb.rvals[x][y]));
    }
  rep.iso = rep.worst_pred_dev <= tol;
  if (!rep.iso) rep.detail = "predicate mesh deviation " + rat_str(rep.worst_pred_dev);
  return rep;
}

bool independent(HullPtr parent, std::span<const PointRef> A, std::span<const PointRef> B,
                 std::span<const PointRef> C) {
  std::vector<PointRef> ab(A.begin(), A.end()), ac(A.begin(), A.end());
  ab.insert(ab.end(), B.begin(), B.end());
  ac.insert(ac.end(), C.begin(), C.end());
  SubHull hab = truncated_hull(parent, ab, Ext::inf());
  SubHull hac = truncated_hull(parent, ac, Ext::inf());
  SubHull ha = truncated_hull(parent, A, Ext::inf());
  return hull_intersection(hab, hac) == ha;
}

RFRStructure independence_amalgam(const IndependenceInput& in) {
  const size_t nm = in.n_m, nb0 = in.n_b0, nb1 = in.n_b1, nc = in.n_c;
  if (in.ambient.tuple.size() != nm + nb0 + nb1 || in.ext0.tuple.size() != nm + nb0 + nc ||
      in.ext1.tuple.size() != nm + nb1 + nc)
    throw Error(ErrorCode::BadInput, "independence_amalgam: tuple sizes inconsistent");

  auto slice = [](const RFRStructure& s, size_t from, size_t len) {
    return std::vector<PointRef>(s.tuple.begin() + from, s.tuple.begin() + from + len);
  };
  std::vector<PointRef> M = slice(in.ambient, 0, nm);
  std::vector<PointRef> B0 = slice(in.ambient, nm, nb0);
  std::vector<PointRef> B1 = slice(in.ambient, nm + nb0, nb1);

  if (!independent(in.ambient.hull, M, B0, B1))
    throw Error(ErrorCode::BadInput, "independence_amalgam: B0 and B1 are not independent over M");
  if (!independent(in.ext0.hull, slice(in.ext0, 0, nm), slice(in.ext0, nm, nb0), slice(in.ext0, nm + nb0, nc)))
    throw Error(ErrorCode::BadInput, "independence_amalgam: C0 is not independent from B0 over M");
  if (!independent(in.ext1.hull, slice(in.ext1, 0, nm), slice(in.ext1, nm, nb1), slice(in.ext1, nm + nb1, nc)))
    throw Error(ErrorCode::BadInput, "independence_amalgam: C1 is not independent from B1 over M");

  // C0 and C1 realize one type over M: compare the (M, C) restrictions.
  {
    std::vector<PointRef> mc0 = slice(in.ext0, 0, nm), mc1 = slice(in.ext1, 0, nm);
    auto c0 = slice(in.ext0, nm + nb0, nc), c1 = slice(in.ext1, nm + nb1, nc);
    mc0.insert(mc0.end(), c0.begin(), c0.end());
    mc1.insert(mc1.end(), c1.begin(), c1.end());
    RFRStructure r0(in.ext0.hull, in.ext0.pred, mc0);
    RFRStructure r1(in.ext1.hull, in.ext1.pred, mc1);
    IsoReport rep = pointed_iso_check(r0, r1, in.mesh, Rat(0));
    if (!rep.dist_equal)
      throw Error(ErrorCode::BadInput, "independence_amalgam: C0 and C1 differ metrically over M");
    if (!rep.iso)
      throw Error(ErrorCode::BadInput,
                  "independence_amalgam: C0 and C1 realize different predicates over M (" + rep.detail + ")");
  }
  // The (M, B_i) restrictions must match the ambient exactly as well.
  for (int side = 0; side < 2; ++side) {
    const RFRStructure& ext = side == 0 ? in.ext0 : in.ext1;
    size_t nb = side == 0 ? nb0 : nb1;
    std::vector<PointRef> mb_ext = slice(ext, 0, nm + nb);
    std::vector<PointRef> mb_amb = M;
    auto bs = side == 0 ? B0 : B1;
    mb_amb.insert(mb_amb.end(), bs.begin(), bs.end());
    RFRStructure re(ext.hull, ext.pred, mb_ext);
    RFRStructure ra(in.ambient.hull, in.ambient.pred, mb_amb);
    IsoReport rep = pointed_iso_check(re, ra, in.mesh, Rat(0));
    if (!rep.dist_equal || !rep.iso)
      throw Error(ErrorCode::BadInput, "independence_amalgam: extension disagrees with the ambient on (M,B)");
  }

  // Amalgamate the two extensions over the shared copy of <M C>.
  std::vector<std::pair<PointRef, PointRef>> base;
  for (size_t i = 0; i < nm; ++i) base.push_back({in.ext0.tuple[i], in.ext1.tuple[i]});
  for (size_t i = 0; i < nc; ++i) base.push_back({in.ext0.tuple[nm + nb0 + i], in.ext1.tuple[nm + nb1 + i]});
  RFRStructure joint = predicate_amalgam(in.ext0, in.ext1, base);

  // Rebuild the tuple as M ++ B0 ++ B1 ++ C. predicate_amalgam concatenates
  // side tuples, so the pieces sit at known offsets.
  const size_t off1 = in.ext0.tuple.size();
  std::vector<PointRef> tuple;
  for (size_t i = 0; i < nm; ++i) tuple.push_back(joint.tuple[i]);
  for (size_t i = 0; i < nb0; ++i) tuple.push_back(joint.tuple[nm + i]);
  for (size_t i = 0; i < nb1; ++i) tuple.push_back(joint.tuple[off1 + nm + i]);
  for (size_t i = 0; i < nc; ++i) tuple.push_back(joint.tuple[nm + nb0 + i]);
  return RFRStructure(joint.hull, joint.pred, std::move(tuple));
}

namespace {

struct StemData {
  PointRef a;     // common projection point on <A>
  Rat depth;      // length of the shared stem of b and c beyond a
  Rat db, dc;     // d(a, b), d(a, c)
};

// Builds one unzip step: b_r and c_r keep their distance profiles over A but
// share only a stem of length r.
RFRStructure unzip_step(const RFRStructure& s, const StemData& sd, const Rat& r, int grid) {
  const size_t n = s.tuple.size() - 2;
  const PointRef b = s.tuple[n], c = s.tuple[n + 1];
  const FiniteExtendedMetric gm = s.hull->generator_metric();
  const size_t ng = gm.size();

  std::vector<std::string> labels = gm.labels();
  std::string lb = "b*", lc = "c*";
  while (std::find(labels.begin(), labels.end(), lb) != labels.end()) lb += "*";
  labels.push_back(lb);
  while (std::find(labels.begin(), labels.end(), lc) != labels.end()) lc += "*";
  labels.push_back(lc);

  std::vector<std::vector<Ext>> mat(ng + 2, std::vector<Ext>(ng + 2, Ext(Rat(0))));
  for (size_t i = 0; i < ng; ++i)
    for (size_t j = 0; j < ng; ++j) mat[i][j] = gm.dist(i, j);
  for (size_t i = 0; i < ng; ++i) {
    PointRef gi = PointRef::at_vertex(s.hull->generator_vertex(i));
    mat[i][ng] = s.hull->distance(gi, b);
    mat[ng][i] = mat[i][ng];
    mat[i][ng + 1] = s.hull->distance(gi, c);
    mat[ng + 1][i] = mat[i][ng + 1];
  }
  Ext dbc = Ext(sd.db + sd.dc - 2 * r);
  mat[ng][ng + 1] = dbc;
  mat[ng + 1][ng] = dbc;
  HullPtr hull = build_hull(FiniteExtendedMetric(std::move(labels), std::move(mat)));

  std::vector<size_t> gmap(ng);
  for (size_t i = 0; i < ng; ++i) gmap[i] = i;
  PointRef br = PointRef::at_vertex(hull->generator_vertex(ng));
  PointRef cr = PointRef::at_vertex(hull->generator_vertex(ng + 1));
  PointRef a_new = transport_point(*s.hull, sd.a, *hull, gmap);

  // Old-hull part of <A>, for classifying anchors.
  std::vector<PointRef> atuple(s.tuple.begin(), s.tuple.begin() + n);
  SubHull hullA = truncated_hull(s.hull, atuple, Ext::inf());

  std::vector<Anchor> anchors;
  // (1) anchors inside <A> carry over verbatim.
  std::set<PointRef> aprobes;
  for (const auto& an : s.pred.anchors()) {
    bool pin = hullA.contains(an.p), qin = hullA.contains(an.q);
    if (pin && qin)
      anchors.push_back(
          {transport_point(*s.hull, an.p, *hull, gmap), transport_point(*s.hull, an.q, *hull, gmap), an.v});
    if (pin) aprobes.insert(an.p);
    if (qin) aprobes.insert(an.q);
  }
  // (2) the (s,t) interpolation grid on both tentacles, values copied from
  // the original structure.
  auto old_pt = [&](bool on_b, const Rat& frac) { return s.hull->interp(sd.a, frac, on_b ? b : c); };
  auto new_pt = [&](bool on_b, const Rat& frac) { return hull->interp(a_new, frac, on_b ? br : cr); };
  for (int side_x = 0; side_x < 2; ++side_x)
    for (int side_y = 0; side_y < 2; ++side_y)
      for (int gs = 0; gs <= grid; ++gs)
        for (int gt = 0; gt <= grid; ++gt) {
          Rat fs = Rat(gs) / Rat(grid), ft = Rat(gt) / Rat(grid);
          anchors.push_back({new_pt(side_x == 0, fs), new_pt(side_y == 0, ft),
                             s.pred.eval(old_pt(side_x == 0, fs), old_pt(side_y == 0, ft))});
        }
  // (3) interactions between <A> probes and the tentacles.
  for (const auto& x : aprobes) {
    PointRef xn = transport_point(*s.hull, x, *hull, gmap);
    for (int side = 0; side < 2; ++side)
      for (int gs = 0; gs <= grid; ++gs) {
        Rat fs = Rat(gs) / Rat(grid);
        anchors.push_back({xn, new_pt(side == 0, fs), s.pred.eval(x, old_pt(side == 0, fs))});
        anchors.push_back({new_pt(side == 0, fs), xn, s.pred.eval(old_pt(side == 0, fs), x)});
      }
  }

  std::vector<PointRef> tuple;
  for (size_t i = 0; i < n; ++i) tuple.push_back(transport_point(*s.hull, s.tuple[i], *hull, gmap));
  tuple.push_back(br);
  tuple.push_back(cr);
  return RFRStructure(hull, AnchorPredicate::from_raw(hull, std::move(anchors)), std::move(tuple));
}

}  // namespace

PathResult unzip_path(const RFRStructure& s, size_t m, const Rat& K, int grid,
                      const MinDistortionOptions& dopts) {
  if (s.tuple.size() < 2) throw Error(ErrorCode::BadInput, "unzip_path: tuple must end with the pair b, c");
  if (m < 1) throw Error(ErrorCode::BadInput, "unzip_path: m must be positive");
  const size_t n = s.tuple.size() - 2;
  const PointRef b = s.tuple[n], c = s.tuple[n + 1];
  std::vector<PointRef> atuple(s.tuple.begin(), s.tuple.begin() + n);
  SubHull hullA = truncated_hull(s.hull, atuple, Ext::inf());

  PathResult out;
  Ext db = hullA.empty() ? Ext::inf() : distance_to_subhull(*s.hull, b, hullA);
  Ext dc = hullA.empty() ? Ext::inf() : distance_to_subhull(*s.hull, c, hullA);
  auto constant_path = [&]() {
    out.constant = true;
    for (size_t k = 0; k <= m; ++k) out.steps.push_back(s);
    for (size_t k = 0; k < m; ++k) out.consecutive_rho.push_back(Rat(0));
    return out;
  };
  if (db.is_inf() && dc.is_inf()) return constant_path();
  if (db.is_inf() != dc.is_inf())
    throw Error(ErrorCode::BadInput, "unzip_path: b and c have different distance classes over A");
  if (!(db == dc)) throw Error(ErrorCode::BadInput, "unzip_path: b and c have different distances to <A>");
  PointRef pb = project(*s.hull, b, hullA), pc = project(*s.hull, c, hullA);
  if (!(pb == pc)) throw Error(ErrorCode::BadInput, "unzip_path: b and c have different projections");
  if (independent(s.hull, atuple, {&b, 1}, {&c, 1})) return constant_path();

  StemData sd;
  sd.a = pb;
  sd.db = s.hull->distance(pb, b).value();
  sd.dc = s.hull->distance(pb, c).value();
  sd.depth = (sd.db + sd.dc - s.hull->distance(b, c).value()) / 2;

  for (size_t k = 0; k <= m; ++k) {
    if (k == m) {
      out.steps.push_back(s);
      continue;
    }
    Rat r = sd.depth * Rat(static_cast<long>(k)) / Rat(static_cast<long>(m));
    out.steps.push_back(unzip_step(s, sd, r, grid));
  }
  for (size_t k = 0; k < m; ++k)
    out.consecutive_rho.push_back(min_distortion(out.steps[k], out.steps[k + 1], K, dopts).rho);
  return out;
}

PathResult interpolate_path(const RFRStructure& q0, const RFRStructure& q1, size_t m, const Rat& K,
                            int grid, const MinDistortionOptions& dopts) {
  if (q0.tuple.size() != q1.tuple.size() || q0.tuple.size() < 2)
    throw Error(ErrorCode::BadInput, "interpolate_path: tuples must match and end with the pair b, c");
  if (m < 1) throw Error(ErrorCode::BadInput, "interpolate_path: m must be positive");
  const size_t n = q0.tuple.size() - 2;

  // Metric data of the two endpoints must agree exactly.
  for (size_t i = 0; i < q0.tuple.size(); ++i)
    for (size_t j = 0; j < q0.tuple.size(); ++j)
      if (!(q0.hull->distance(q0.tuple[i], q0.tuple[j]) == q1.hull->distance(q1.tuple[i], q1.tuple[j])))
        throw Error(ErrorCode::BadInput, "interpolate_path: endpoint tuples are not isometric");
  std::vector<PointRef> a0(q0.tuple.begin(), q0.tuple.begin() + n);
  std::vector<PointRef> a1(q1.tuple.begin(), q1.tuple.begin() + n);
  if (!independent(q0.hull, a0, {&q0.tuple[n], 1}, {&q0.tuple[n + 1], 1}) ||
      !independent(q1.hull, a1, {&q1.tuple[n], 1}, {&q1.tuple[n + 1], 1}))
    throw Error(ErrorCode::BadInput, "interpolate_path: endpoint pairs are not independent over A");

  PathResult out;
  // Steps share the metric shape of q0; anchors carry the convex combination
  // of the two endpoint predicates over the full tuple interpolation grid.
  std::vector<std::optional<PointRef>> fam0 = mesh_family(q0, grid);
  std::vector<std::optional<PointRef>> fam1 = mesh_family(q1, grid);

  for (size_t k = 0; k <= m; ++k) {
    if (k == 0) {
      out.steps.push_back(q0);
      continue;
    }
    if (k == m) {
      out.steps.push_back(q1);
      continue;
    }
    Rat r = Rat(static_cast<long>(k)) / Rat(static_cast<long>(m));
    // Rebuild the tuple hull of q0 and place combined anchors on it.
    const size_t nt = q0.tuple.size();
    std::vector<std::string> labels;
    std::vector<std::vector<Ext>> mat(nt, std::vector<Ext>(nt, Ext(Rat(0))));
    for (size_t i = 0; i < nt; ++i) labels.push_back("t" + std::to_string(i));
    for (size_t i = 0; i < nt; ++i)
      for (size_t j = 0; j < nt; ++j) mat[i][j] = q0.hull->distance(q0.tuple[i], q0.tuple[j]);
    HullPtr hull = build_hull(FiniteExtendedMetric(std::move(labels), std::move(mat)));
    std::vector<PointRef> tuple;
    for (size_t i = 0; i < nt; ++i) tuple.push_back(PointRef::at_vertex(hull->generator_vertex(i)));

    std::vector<Anchor> anchors;
    for (size_t x = 0; x < fam0.size(); ++x) {
      if (!fam0[x]) continue;
      size_t cell_x = x / (grid + 1);
      int sx = static_cast<int>(x % (grid + 1));
      size_t jx = cell_x / nt, kx = cell_x % nt;
      PointRef px = hull->interp(tuple[jx], Rat(sx) / Rat(grid), tuple[kx]);
      for (size_t y = 0; y < fam0.size(); ++y) {
        if (!fam0[y]) continue;
        size_t cell_y = y / (grid + 1);
        int sy = static_cast<int>(y % (grid + 1));
        size_t jy = cell_y / nt, ky = cell_y % nt;
        PointRef py = hull->interp(tuple[jy], Rat(sy) / Rat(grid), tuple[ky]);
        Rat v0 = q0.pred.eval(*fam0[x], *fam0[y]);
        Rat v1 = q1.pred.eval(*fam1[x], *fam1[y]);
        anchors.push_back({px, py, (Rat(1) - r) * v0 + r * v1});
      }
    }
    out.steps.push_back(RFRStructure(hull, AnchorPredicate::from_raw(hull, std::move(anchors)), std::move(tuple)));
  }
  for (size_t k = 0; k < m; ++k)
    out.consecutive_rho.push_back(min_distortion(out.steps[k], out.steps[k + 1], K, dopts).rho);
  return out;
}

Ext type_distance(HullPtr hull, std::span<const PointRef> A, const PointRef& b0, const PointRef& b1) {
  SubHull ha = truncated_hull(hull, A, Ext::inf());
  Ext d0 = ha.empty() ? Ext::inf() : distance_to_subhull(*hull, b0, ha);
  Ext d1 = ha.empty() ? Ext::inf() : distance_to_subhull(*hull, b1, ha);
  if (d0.is_inf() && d1.is_inf()) return Ext(Rat(0));
  if (d0.is_inf() || d1.is_inf()) return Ext::inf();
  PointRef p0 = project(*hull, b0, ha), p1 = project(*hull, b1, ha);
  if (p0 == p1) return Ext(rat_abs(d0.value() - d1.value()));
  return d0 + hull->distance(p0, p1) + d1;
}

RFRStructure order_witness(size_t n) {
  if (n < 1) throw Error(ErrorCode::BadInput, "order_witness: n must be positive");
  std::vector<std::string> labels;
  for (size_t i = 0; i < n; ++i) labels.push_back("a" + std::to_string(i));
  for (size_t i = 0; i < n; ++i) labels.push_back("b" + std::to_string(i));
  const size_t N = 2 * n;
  std::vector<std::vector<Ext>> mat(N, std::vector<Ext>(N, Ext::inf()));
  for (size_t i = 0; i < N; ++i) mat[i][i] = Ext(Rat(0));
  HullPtr hull = build_hull(FiniteExtendedMetric(std::move(labels), std::move(mat)));
  std::vector<PointRef> pts;
  for (size_t i = 0; i < N; ++i) pts.push_back(PointRef::at_vertex(hull->generator_vertex(i)));
  std::vector<Anchor> anchors;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      anchors.push_back({pts[i], pts[j], Rat(0)});          // R(a_i, a_j) = 0
      anchors.push_back({pts[n + i], pts[n + j], Rat(0)});  // R(b_i, b_j) = 0
      anchors.push_back({pts[i], pts[n + j], i >= j ? Rat(1) : Rat(0)});
    }
  return RFRStructure(hull, AnchorPredicate::from_raw(hull, std::move(anchors)), pts);
}

}  // namespace rforest
