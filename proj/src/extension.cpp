#include "rforest/extension.hpp"

#include <algorithm>
#include <set>

namespace rforest {

namespace {

std::string fresh_label(const std::vector<std::string>& used) {
  for (size_t k = 0;; ++k) {
    std::string cand = "e" + std::to_string(k);
    if (std::find(used.begin(), used.end(), cand) == used.end()) return cand;
  }
}

// Extends the source's generator metric by one point at distance `leg` beyond
// the point `at` (or in a fresh component when `at` is absent) and rebuilds.
HullPtr extend_hull(const RFRStructure& source, const std::optional<PointRef>& at, const Rat& leg,
                    std::string label) {
  const FiniteExtendedMetric base = source.hull->generator_metric();
  const size_t n = base.size();
  std::vector<std::string> labels = base.labels();
  labels.push_back(std::move(label));
  std::vector<std::vector<Ext>> mat(n + 1, std::vector<Ext>(n + 1, Ext(Rat(0))));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) mat[i][j] = base.dist(i, j);
  for (size_t i = 0; i < n; ++i) {
    Ext d = at ? source.hull->distance(*at, PointRef::at_vertex(source.hull->generator_vertex(i))) + Ext(leg)
               : Ext::inf();
    mat[i][n] = d;
    mat[n][i] = d;
  }
  return build_hull(FiniteExtendedMetric(std::move(labels), std::move(mat)));
}

std::vector<size_t> identity_map(size_t n) {
  std::vector<size_t> m(n);
  for (size_t i = 0; i < n; ++i) m[i] = i;
  return m;
}

}  // namespace

ExtensionResult extend_one_point(const RFRStructure& source, const RFRStructure& target, const Rat& K,
                                 const Rat& eps, const ExtensionOptions& opts) {
  if (target.tuple.size() != source.tuple.size() + 1)
    throw Error(ErrorCode::BadInput, "extend_one_point: target tuple must be one entry longer");
  if (!(eps > 0)) throw Error(ErrorCode::BadInput, "extend_one_point: eps must be positive");
  if (!is_large(K, *target.hull, target.tuple))
    throw Error(ErrorCode::BadInput, "extend_one_point: K is not large for the target tuple");

  const size_t n = source.tuple.size();
  std::vector<PointRef> btuple(target.tuple.begin(), target.tuple.begin() + n);
  const PointRef c = target.tuple[n];

  // Sampling domains: the K-truncated hull of the source tuple against the
  // full hull of the target's base tuple. Source anchors inside the domain
  // join the sample so the reconciliation step is exact at anchors.
  SubHull domA = truncated_hull(source.hull, source.tuple, Ext(K));
  SubHull domB = truncated_hull(target.hull, btuple, Ext::inf());
  std::vector<PointRef> extraA;
  for (const auto& a : source.pred.anchors()) {
    if (domA.contains(a.p)) extraA.push_back(a.p);
    if (domA.contains(a.q)) extraA.push_back(a.q);
  }

  Ext c_dist = domB.empty() ? Ext::inf() : distance_to_subhull(*target.hull, c, domB);
  RFRStructure target_base(target.hull, target.pred, btuple);

  MinDistortionOptions dopts;
  dopts.subdivisions = opts.subdivisions;
  dopts.max_cells = opts.max_cells;
  dopts.lex_refine_cells = opts.lex_refine_cells;

  std::vector<std::string> used = source.hull->generator_labels();
  std::string elabel = fresh_label(used);

  ExtensionResult out{source, Rat(0), Rat(0), ExtensionCase::InfiniteDistance, {}, {}, {}};

  if (c_dist.is_inf()) {
    SampledStructure SA = sample_structure(source, domA, opts.subdivisions, extraA);
    SampledStructure SB = sample_structure(target_base, domB, opts.subdivisions);
    MinDistortionResult md = min_distortion(SA, SB, K, dopts);
    out.rho_in = md.rho;
    out.tag = ExtensionCase::InfiniteDistance;

    HullPtr ext = extend_hull(source, std::nullopt, Rat(0), elabel);
    std::vector<size_t> gmap = identity_map(source.hull->generator_count());
    PointRef e = PointRef::at_vertex(ext->generator_vertex(ext->generator_count() - 1));

    std::vector<Anchor> anchors;
    for (const auto& a : source.pred.anchors())
      anchors.push_back(
          {transport_point(*source.hull, a.p, *ext, gmap), transport_point(*source.hull, a.q, *ext, gmap), a.v});
    std::vector<PointRef> ptsA;  // O' rows: transported samples then e
    for (const auto& p : SA.points()) ptsA.push_back(transport_point(*source.hull, p, *ext, gmap));
    for (auto& [ai, bi] : md.argmin.pairs) {
      anchors.push_back({ptsA[ai], e, target.rel(SB.points()[bi], c)});
      anchors.push_back({e, ptsA[ai], target.rel(c, SB.points()[bi])});
    }
    anchors.push_back({e, e, target.rel(c, c)});

    std::vector<PointRef> tuple;
    for (const auto& t : source.tuple) tuple.push_back(transport_point(*source.hull, t, *ext, gmap));
    tuple.push_back(e);
    out.extended = RFRStructure(ext, AnchorPredicate::from_raw(ext, std::move(anchors)), std::move(tuple));

    out.sample_a = ptsA;
    out.sample_a.push_back(e);
    out.sample_b = SB.points();
    out.sample_b.push_back(target.hull->normalize(c));
    out.correlation = md.argmin;
    out.correlation.nA = out.sample_a.size();
    out.correlation.nB = out.sample_b.size();
    out.correlation.pairs.push_back(
        {static_cast<uint32_t>(out.sample_a.size() - 1), static_cast<uint32_t>(out.sample_b.size() - 1)});
    out.correlation.canonicalize();
  } else {
    // Graft case: hang a segment of length d(b_dagger, c) at a point of the
    // source correlated with the projection of c.
    PointRef bdag = project(*target.hull, c, domB);
    Rat L = target.hull->distance(bdag, c).value();

    std::vector<PointRef> extraB{bdag};
    SampledStructure SA = sample_structure(source, domA, opts.subdivisions, extraA);
    SampledStructure SB = sample_structure(target_base, domB, opts.subdivisions, extraB);
    MinDistortionResult md = min_distortion(SA, SB, K, dopts);
    out.rho_in = md.rho;
    out.tag = ExtensionCase::Graft;

    size_t bdag_idx = SIZE_MAX;
    for (size_t j = 0; j < SB.points().size(); ++j)
      if (SB.points()[j] == target.hull->normalize(bdag)) bdag_idx = j;
    size_t adag_idx = SIZE_MAX;
    for (auto& [ai, bi] : md.argmin.pairs)
      if (bi == bdag_idx && ai < adag_idx) adag_idx = ai;
    if (adag_idx == SIZE_MAX)
      throw Error(ErrorCode::BadInput, "extend_one_point: no sample correlated with the projection");
    PointRef adag = SA.points()[adag_idx];

    HullPtr ext;
    PointRef e;
    std::vector<size_t> gmap = identity_map(source.hull->generator_count());
    if (L == 0) {
      // The new point already lies on the base hull; nothing to graft.
      ext = source.hull;
      e = source.hull->normalize(adag);
    } else {
      ext = extend_hull(source, adag, L, elabel);
      e = PointRef::at_vertex(ext->generator_vertex(ext->generator_count() - 1));
    }
    auto lift = [&](const PointRef& p) {
      return ext == source.hull ? source.hull->normalize(p) : transport_point(*source.hull, p, *ext, gmap);
    };
    PointRef adag_ext = lift(adag);

    // O' = O plus the matched graft meshes (r = 0 is the a_dagger pair, r = 1
    // is (e, c)).
    std::vector<PointRef> ptsA;
    for (const auto& p : SA.points()) ptsA.push_back(lift(p));
    std::vector<PointRef> ptsB = SB.points();
    std::vector<std::pair<uint32_t, uint32_t>> opairs = md.argmin.pairs;
    const int gsub = opts.subdivisions;
    for (int k = 1; k <= gsub + 1; ++k) {
      Rat r = Rat(k) / Rat(gsub + 1);
      PointRef pa = ext->interp(adag_ext, r, e);
      PointRef pb = target.hull->interp(bdag, r, c);
      ptsA.push_back(ext->normalize(pa));
      ptsB.push_back(target.hull->normalize(pb));
      opairs.push_back({static_cast<uint32_t>(ptsA.size() - 1), static_cast<uint32_t>(ptsB.size() - 1)});
    }

    // Binary transfer over the pair metric: anchors (x, y) -> R_target(w, w')
    // for all pairs of O' entries, reconciled with the source predicate
    // within the measured deviation at its own anchors.
    std::vector<Anchor> graw;
    for (auto& [a1, b1] : opairs)
      for (auto& [a2, b2] : opairs)
        graw.push_back({ptsA[a1], ptsA[a2], target.rel(ptsB[b1], ptsB[b2])});
    AnchorPredicate g = AnchorPredicate::from_raw(ext, std::move(graw));

    std::vector<Anchor> eanchors;
    for (const auto& a : source.pred.anchors())
      eanchors.push_back({lift(a.p), lift(a.q), a.v});
    AnchorPredicate ea = AnchorPredicate::from_raw(ext, eanchors);
    Rat rhat(0);
    for (const auto& a : ea.anchors()) rhat = rat_max(rhat, rat_abs(a.v - g.eval(a.p, a.q)));

    std::vector<Anchor> hanchors;
    for (const auto& a : g.anchors()) hanchors.push_back({a.p, a.q, clamp01(a.v + rhat)});
    for (const auto& a : ea.anchors()) hanchors.push_back(a);

    std::vector<PointRef> tuple;
    for (const auto& t : source.tuple) tuple.push_back(lift(t));
    tuple.push_back(e);
    out.extended = RFRStructure(ext, AnchorPredicate::from_raw(ext, std::move(hanchors)), std::move(tuple));

    out.sample_a = ptsA;
    out.sample_b = ptsB;
    out.correlation.pairs = opairs;
    out.correlation.nA = ptsA.size();
    out.correlation.nB = ptsB.size();
    out.correlation.canonicalize();
  }

  // Exact post-hoc certificate: dis^K of the constructed correlation.
  {
    SampledStructure Sa(out.extended.hull, out.extended.pred, out.sample_a, {});
    SampledStructure Sb(target.hull, target.pred, out.sample_b, {});
    DistortionReport rep = dis_K(Sa, Sb, out.correlation, K);
    out.achieved_dis = rep.dis;
  }
  if (out.achieved_dis > Rat(4) * out.rho_in + eps)
    throw Error(ErrorCode::BadInput, "extend_one_point: constructed extension exceeded 4*rho + eps");
  // The new point sits at infinite distance from the old hull exactly when
  // the target's new point does.
  {
    SubHull old_hull = truncated_hull(out.extended.hull, std::span<const PointRef>(out.extended.tuple.data(), n),
                                      Ext::inf());
    Ext de = old_hull.empty() ? Ext::inf()
                              : distance_to_subhull(*out.extended.hull, out.extended.tuple.back(), old_hull);
    if (de.is_inf() != c_dist.is_inf())
      throw Error(ErrorCode::BadInput, "extend_one_point: infinite-distance placement violated");
  }
  return out;
}

TupleExtensionResult extend_tuple(const RFRStructure& source, const RFRStructure& target, const Rat& K,
                                  const Rat& eps, const ExtensionOptions& opts) {
  if (target.tuple.size() < source.tuple.size())
    throw Error(ErrorCode::BadInput, "extend_tuple: target tuple shorter than source");
  if (!(eps > 0)) throw Error(ErrorCode::BadInput, "extend_tuple: eps must be positive");
  const size_t n = source.tuple.size();
  const size_t m = target.tuple.size() - n;

  MinDistortionOptions dopts;
  dopts.subdivisions = opts.subdivisions;
  dopts.max_cells = opts.max_cells;

  TupleExtensionResult out{source, {}, {}, Rat(0), Rat(0)};
  RFRStructure current = source;
  auto rho_between = [&](const RFRStructure& A, const RFRStructure& B) {
    SampledStructure SA =
        sample_structure(A, truncated_hull(A.hull, A.tuple, Ext(K)), dopts.subdivisions);
    SampledStructure SB =
        sample_structure(B, truncated_hull(B.hull, B.tuple, Ext::inf()), dopts.subdivisions);
    return min_distortion(SA, SB, K, dopts).rho;
  };
  Rat rho0(0);
  {
    RFRStructure target0(target.hull, target.pred,
                         std::vector<PointRef>(target.tuple.begin(), target.tuple.begin() + n));
    rho0 = rho_between(current, target0);
  }
  Rat pow5m(1);
  for (size_t k = 0; k < m; ++k) pow5m *= 5;
  out.bound = pow5m * rho0 + eps;

  for (size_t k = 0; k < m; ++k) {
    RFRStructure target_k(target.hull, target.pred,
                          std::vector<PointRef>(target.tuple.begin(), target.tuple.begin() + n + k + 1));
    // eps_k = eps * 2^{-(k+1)} * 5^{k-m}: the telescoped sum of 4^{m-1-k} eps_k
    // stays below eps.
    Rat eps_k = eps;
    for (size_t i = 0; i <= k; ++i) eps_k /= 2;
    for (size_t i = k; i < m; ++i) eps_k /= 5;
    ExtensionResult step = extend_one_point(current, target_k, K, eps_k, opts);
    out.step_rho.push_back(step.rho_in);
    out.step_achieved.push_back(step.achieved_dis);
    current = step.extended;
  }
  out.extended = current;
  out.final_rho = rho_between(current, target);
  return out;
}

}  // namespace rforest
