#include "rforest/distortion.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace rforest {

SampledStructure::SampledStructure(HullPtr hull, std::optional<AnchorPredicate> pred,
                                   std::vector<PointRef> pts, std::vector<size_t> pinned)
    : hull_(std::move(hull)), pred_(std::move(pred)), pts_(std::move(pts)), pinned_(std::move(pinned)) {
  for (auto& p : pts_) p = hull_->normalize(p);
  for (size_t i : pinned_)
    if (i >= pts_.size()) throw Error(ErrorCode::BadInput, "sample: pin index out of range");
  const size_t n = pts_.size();
  d_.assign(n, std::vector<Ext>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) d_[i][j] = hull_->distance(pts_[i], pts_[j]);
  r_.assign(n, std::vector<Rat>(n, Rat(1)));
  if (pred_)
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) r_[i][j] = pred_->eval(pts_[i], pts_[j]);
}

SampledStructure sample_structure(const RFRStructure& s, const SubHull& domain, int subdivisions,
                                  std::span<const PointRef> extra) {
  std::set<PointRef> pts;
  for (const auto& p : domain.mesh(subdivisions)) pts.insert(p);
  for (const auto& p : extra) pts.insert(s.hull->normalize(p));
  for (const auto& p : s.tuple) pts.insert(p);
  std::vector<PointRef> order(pts.begin(), pts.end());
  std::vector<size_t> pinned;
  for (const auto& t : s.tuple) {
    auto it = std::lower_bound(order.begin(), order.end(), t);
    pinned.push_back(static_cast<size_t>(it - order.begin()));
  }
  return SampledStructure(s.hull, s.pred, std::move(order), std::move(pinned));
}

void Correlation::canonicalize() {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
}

bool Correlation::is_valid(std::span<const std::pair<uint32_t, uint32_t>> pins) const {
  std::vector<char> rows(nA, 0), cols(nB, 0);
  for (auto& [i, j] : pairs) {
    if (i >= nA || j >= nB) return false;
    rows[i] = cols[j] = 1;
  }
  for (char c : rows)
    if (!c) return false;
  for (char c : cols)
    if (!c) return false;
  for (auto& pin : pins)
    if (!std::binary_search(pairs.begin(), pairs.end(), pin)) return false;
  return true;
}

namespace {

Rat pair_cost_metric(const SampledStructure& A, const SampledStructure& B, uint32_t i, uint32_t ip,
                     uint32_t j, uint32_t jp, const Rat& K) {
  return rat_abs(A.dist(i, ip).clamp(K) - B.dist(j, jp).clamp(K));
}

Rat pair_cost(const SampledStructure& A, const SampledStructure& B, uint32_t i, uint32_t ip, uint32_t j,
              uint32_t jp, const Rat& K, bool with_pred) {
  Rat c = pair_cost_metric(A, B, i, ip, j, jp, K);
  if (with_pred) c = rat_max(c, rat_abs(A.rel(i, ip) - B.rel(j, jp)));
  return c;
}

bool use_predicate(const SampledStructure& A, const SampledStructure& B) {
  if (A.has_predicate() != B.has_predicate())
    throw Error(ErrorCode::BadInput, "distortion: one side lacks a predicate");
  return A.has_predicate();
}

// Rank-compressed cost table over cells (i*nB + j); all search comparisons
// run on integer ranks, exact values are recovered at the end.
struct CostModel {
  size_t nA, nB, cells;
  std::vector<uint32_t> rank;  // cells * cells
  std::vector<Rat> values;

  uint32_t at(size_t c1, size_t c2) const { return rank[c1 * cells + c2]; }

  CostModel(const SampledStructure& A, const SampledStructure& B, const Rat& K) {
    nA = A.size();
    nB = B.size();
    cells = nA * nB;
    bool wp = use_predicate(A, B);
    std::vector<Rat> raw(cells * cells);
    std::map<Rat, uint32_t> dict;
    for (size_t c1 = 0; c1 < cells; ++c1) {
      uint32_t i = c1 / nB, j = c1 % nB;
      for (size_t c2 = c1; c2 < cells; ++c2) {
        uint32_t ip = c2 / nB, jp = c2 % nB;
        Rat c = pair_cost(A, B, i, ip, j, jp, K, wp);
        raw[c1 * cells + c2] = c;
        raw[c2 * cells + c1] = c;
        dict.emplace(c, 0);
      }
    }
    values.reserve(dict.size());
    for (auto& [v, r] : dict) {
      r = static_cast<uint32_t>(values.size());
      values.push_back(v);
    }
    rank.resize(cells * cells);
    for (size_t k = 0; k < raw.size(); ++k) rank[k] = dict[raw[k]];
  }
};

// Sample indices ordered by decreasing eccentricity (K-clamped), ties by index.
std::vector<uint32_t> ecc_order(const SampledStructure& S, const Rat& K) {
  const size_t n = S.size();
  std::vector<Rat> ecc(n, Rat(0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) ecc[i] = rat_max(ecc[i], S.dist(i, j).clamp(K));
  std::vector<uint32_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<uint32_t>(i);
  std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) { return ecc[b] < ecc[a]; });
  return order;
}

struct Searcher {
  const CostModel& cm;
  std::vector<std::pair<uint32_t, uint32_t>> pins;
  std::vector<uint32_t> rowsToAssign, colsOrder;
  std::vector<uint32_t> base;  // per cell: max(self cost, cost vs pins)
  uint32_t pinMax = 0;

  uint32_t bestVal = UINT32_MAX;
  std::vector<uint32_t> bestCells;
  std::vector<uint32_t> chosen;  // non-pin cells on the current path
  size_t nodes = 0;

  Searcher(const CostModel& cm_, std::span<const std::pair<uint32_t, uint32_t>> pins_, const Rat& K,
           const SampledStructure& A, const SampledStructure& B)
      : cm(cm_), pins(pins_.begin(), pins_.end()) {
    std::sort(pins.begin(), pins.end());
    pins.erase(std::unique(pins.begin(), pins.end()), pins.end());
    std::vector<uint32_t> pinCells;
    for (auto& [i, j] : pins) pinCells.push_back(i * cm.nB + j);
    for (size_t x = 0; x < pinCells.size(); ++x)
      for (size_t y = 0; y < pinCells.size(); ++y) pinMax = std::max(pinMax, cm.at(pinCells[x], pinCells[y]));
    base.resize(cm.cells);
    for (size_t c = 0; c < cm.cells; ++c) {
      uint32_t b = cm.at(c, c);
      for (uint32_t pc : pinCells) b = std::max(b, cm.at(c, pc));
      base[c] = b;
    }
    std::vector<char> rowPinned(cm.nA, 0), colPinned(cm.nB, 0);
    for (auto& [i, j] : pins) {
      rowPinned[i] = 1;
      colPinned[j] = 1;
    }
    for (uint32_t i : ecc_order(A, K))
      if (!rowPinned[i]) rowsToAssign.push_back(i);
    for (uint32_t j : ecc_order(B, K))
      if (!colPinned[j]) colsOrder.push_back(j);
  }

  uint32_t extend_max(uint32_t cur, uint32_t cell) const {
    uint32_t m = std::max(cur, base[cell]);
    for (uint32_t c : chosen) m = std::max(m, cm.at(cell, c));
    return m;
  }

  void complete(uint32_t curMax) {
    if (curMax >= bestVal) return;
    bestVal = curMax;
    bestCells.clear();
    for (auto& [i, j] : pins) bestCells.push_back(i * cm.nB + j);
    for (uint32_t c : chosen) bestCells.push_back(c);
    std::sort(bestCells.begin(), bestCells.end());
  }

  void phase2(size_t k, uint32_t curMax, const std::vector<char>& colCovered) {
    ++nodes;
    if (curMax >= bestVal || bestVal <= pinMax) return;
    while (k < colsOrder.size() && colCovered[colsOrder[k]]) ++k;
    if (k == colsOrder.size()) {
      complete(curMax);
      return;
    }
    uint32_t j = colsOrder[k];
    for (uint32_t i = 0; i < cm.nA; ++i) {
      uint32_t cell = i * cm.nB + j;
      uint32_t m = extend_max(curMax, cell);
      if (m >= bestVal) continue;
      chosen.push_back(cell);
      phase2(k + 1, m, colCovered);
      chosen.pop_back();
    }
  }

  void phase1(size_t k, uint32_t curMax, std::vector<char>& colCovered) {
    ++nodes;
    if (curMax >= bestVal || bestVal <= pinMax) return;
    if (k == rowsToAssign.size()) {
      phase2(0, curMax, colCovered);
      return;
    }
    uint32_t i = rowsToAssign[k];
    for (uint32_t j = 0; j < cm.nB; ++j) {
      uint32_t cell = i * cm.nB + j;
      uint32_t m = extend_max(curMax, cell);
      if (m >= bestVal) continue;
      chosen.push_back(cell);
      bool was = colCovered[j];
      colCovered[j] = 1;
      phase1(k + 1, m, colCovered);
      colCovered[j] = was;
      chosen.pop_back();
    }
  }

  void run() {
    std::vector<char> colCovered(cm.nB, 0);
    for (auto& [i, j] : pins) colCovered[j] = 1;
    // Seed with a complete assignment so pruning has a finite bound from the
    // start: pins plus first-choice rows/cols would do, but the search itself
    // finds it on the leftmost path quickly.
    phase1(0, pinMax, colCovered);
  }

  // Feasibility: is there a correlation with max cost <= target whose trace on
  // cells < boundary equals `forced`? Remaining pins are always included.
  bool feasible(const std::vector<uint32_t>& forced, uint32_t boundary, uint32_t target) {
    std::vector<char> rowCov(cm.nA, 0), colCov(cm.nB, 0);
    std::vector<uint32_t> fixed = forced;
    for (auto& [i, j] : pins) {
      uint32_t cell = i * cm.nB + j;
      if (cell < boundary) {
        if (!std::binary_search(forced.begin(), forced.end(), cell)) return false;
      } else if (!std::count(fixed.begin(), fixed.end(), cell)) {
        fixed.push_back(cell);
      }
    }
    uint32_t cur = 0;
    for (uint32_t c : fixed) {
      cur = std::max(cur, cm.at(c, c));
      for (uint32_t c2 : fixed) cur = std::max(cur, cm.at(c, c2));
    }
    if (cur > target) return false;
    for (uint32_t c : fixed) {
      rowCov[c / cm.nB] = 1;
      colCov[c % cm.nB] = 1;
    }
    std::vector<uint32_t> rows, cols;
    for (uint32_t i = 0; i < cm.nA; ++i)
      if (!rowCov[i]) rows.push_back(i);
    for (uint32_t j = 0; j < cm.nB; ++j)
      if (!colCov[j]) cols.push_back(j);

    std::vector<uint32_t> taken = fixed;
    auto fits = [&](uint32_t cell) {
      if (cell < boundary) return false;
      if (cm.at(cell, cell) > target) return false;
      for (uint32_t c : taken)
        if (cm.at(cell, c) > target) return false;
      return true;
    };
    std::function<bool(size_t, size_t)> go = [&](size_t ri, size_t cj) -> bool {
      if (ri < rows.size()) {
        for (uint32_t j = 0; j < cm.nB; ++j) {
          uint32_t cell = rows[ri] * cm.nB + j;
          if (!fits(cell)) continue;
          taken.push_back(cell);
          bool was = colCov[j];
          colCov[j] = 1;
          if (go(ri + 1, cj)) return true;
          colCov[j] = was;
          taken.pop_back();
        }
        return false;
      }
      while (cj < cols.size() && colCov[cols[cj]]) ++cj;
      if (cj == cols.size()) return true;
      for (uint32_t i = 0; i < cm.nA; ++i) {
        uint32_t cell = i * cm.nB + cols[cj];
        if (!fits(cell)) continue;
        taken.push_back(cell);
        if (go(rows.size(), cj + 1)) return true;
        taken.pop_back();
      }
      return false;
    };
    return go(0, 0);
  }

  // Lexicographically least optimal pair set: decide cells in ascending order,
  // stopping as soon as the chosen set is itself a valid correlation.
  std::vector<uint32_t> lex_least() {
    std::vector<uint32_t> S;
    auto complete_now = [&]() {
      std::vector<char> rowCov(cm.nA, 0), colCov(cm.nB, 0);
      for (uint32_t c : S) {
        rowCov[c / cm.nB] = 1;
        colCov[c % cm.nB] = 1;
      }
      for (auto& [i, j] : pins)
        if (!std::count(S.begin(), S.end(), i * cm.nB + j)) return false;
      for (uint32_t i = 0; i < cm.nA; ++i)
        if (!rowCov[i]) return false;
      for (uint32_t j = 0; j < cm.nB; ++j)
        if (!colCov[j]) return false;
      return true;
    };
    for (uint32_t c = 0; c < cm.cells; ++c) {
      if (complete_now()) break;
      std::vector<uint32_t> cand = S;
      cand.push_back(c);
      if (feasible(cand, c + 1, bestVal)) S = cand;
    }
    return S;
  }
};

Rat mesh_certificate(const SampledStructure& A, const SampledStructure& B, int subdivisions) {
  Rat spacing(0);
  for (auto* s : {&A, &B})
    for (const auto& e : s->hull()->edges()) spacing = rat_max(spacing, e.len / Rat(subdivisions + 1));
  return Rat(4) * spacing / Rat(2);
}

}  // namespace {}

Rat dis_metric_K(const SampledStructure& A, const SampledStructure& B, const Correlation& O,
                 const Rat& K) {
  Rat out(0);
  for (auto& [i, j] : O.pairs)
    for (auto& [ip, jp] : O.pairs) out = rat_max(out, pair_cost_metric(A, B, i, ip, j, jp, K));
  return out;
}

DistortionReport dis_K(const SampledStructure& A, const SampledStructure& B, const Correlation& O,
                       const Rat& K) {
  if (!use_predicate(A, B)) throw Error(ErrorCode::BadInput, "dis_K: predicates required on both sides");
  DistortionReport rep{Rat(0), Rat(0), Rat(0), {0, 0}};
  for (size_t a = 0; a < O.pairs.size(); ++a)
    for (size_t b = 0; b < O.pairs.size(); ++b) {
      auto [i, j] = O.pairs[a];
      auto [ip, jp] = O.pairs[b];
      Rat dm = pair_cost_metric(A, B, i, ip, j, jp, K);
      Rat dp = rat_abs(A.rel(i, ip) - B.rel(j, jp));
      rep.dis_metric = rat_max(rep.dis_metric, dm);
      rep.dis_pred = rat_max(rep.dis_pred, dp);
      Rat both = rat_max(dm, dp);
      if (both > rep.dis) {
        rep.dis = both;
        rep.witness = {a, b};
      }
    }
  rep.dis = rat_max(rep.dis_metric, rep.dis_pred);
  return rep;
}

void for_each_correlation(size_t nA, size_t nB, std::span<const std::pair<uint32_t, uint32_t>> pins,
                          const std::function<void(const std::vector<std::pair<uint32_t, uint32_t>>&)>& fn) {
  if (nA * nB > 20) throw Error(ErrorCode::Resource, "for_each_correlation: nA*nB exceeds 20");
  if (nA == 0 || nB == 0) {
    if (nA == 0 && nB == 0 && pins.empty()) fn({});
    return;
  }
  std::vector<uint32_t> required(nA, 0);  // pinned columns per row, as a mask
  for (auto& [i, j] : pins) {
    if (i >= nA || j >= nB) throw Error(ErrorCode::BadInput, "pins out of range");
    required[i] |= 1u << j;
  }
  std::vector<uint32_t> masks(nA, 0);
  std::vector<std::pair<uint32_t, uint32_t>> current;
  const uint32_t full = (1u << nB) - 1;
  std::function<void(size_t, uint32_t)> rec = [&](size_t row, uint32_t covered) {
    if (row == nA) {
      if (covered != full) return;  // surjectivity
      current.clear();
      for (uint32_t i = 0; i < nA; ++i)
        for (uint32_t j = 0; j < nB; ++j)
          if (masks[i] & (1u << j)) current.push_back({i, j});
      fn(current);
      return;
    }
    for (uint32_t m = 1; m <= full; ++m) {
      if ((m & required[row]) != required[row]) continue;
      masks[row] = m;
      rec(row + 1, covered | m);
    }
    masks[row] = 0;
  };
  rec(0, 0);
}

size_t count_correlations(size_t nA, size_t nB, std::span<const std::pair<uint32_t, uint32_t>> pins) {
  size_t n = 0;
  for_each_correlation(nA, nB, pins, [&](const auto&) { ++n; });
  return n;
}

Rat exhaustive_min_distortion(const SampledStructure& A, const SampledStructure& B, const Rat& K) {
  const size_t nA = A.size(), nB = B.size();
  if (nA == 0 && nB == 0) return Rat(0);
  if (nA == 0 || nB == 0) throw Error(ErrorCode::BadInput, "no correlation between empty and non-empty");
  if (A.pinned().size() != B.pinned().size())
    throw Error(ErrorCode::BadInput, "pinned tuples differ in length");
  bool wp = use_predicate(A, B);
  std::vector<std::pair<uint32_t, uint32_t>> pins;
  for (size_t t = 0; t < A.pinned().size(); ++t)
    pins.push_back({static_cast<uint32_t>(A.pinned()[t]), static_cast<uint32_t>(B.pinned()[t])});
  std::optional<Rat> best;
  for_each_correlation(nA, nB, pins, [&](const std::vector<std::pair<uint32_t, uint32_t>>& pairs) {
    Rat m(0);
    for (auto& [i, j] : pairs)
      for (auto& [ip, jp] : pairs) m = rat_max(m, pair_cost(A, B, i, ip, j, jp, K, wp));
    if (!best || m < *best) best = m;
  });
  if (!best) throw Error(ErrorCode::BadInput, "no pinned correlation exists");
  return *best;
}

MinDistortionResult min_distortion(const SampledStructure& A, const SampledStructure& B, const Rat& K,
                                   const MinDistortionOptions& opts) {
  MinDistortionResult out;
  const size_t nA = A.size(), nB = B.size();
  if (A.pinned().size() != B.pinned().size())
    throw Error(ErrorCode::BadInput, "pinned tuples differ in length");
  if (nA == 0 && nB == 0) {
    out.rho = Rat(0);
    out.argmin.nA = out.argmin.nB = 0;
    out.certificate = Rat(0);
    return out;
  }
  if (nA == 0 || nB == 0) throw Error(ErrorCode::BadInput, "no correlation between empty and non-empty");
  if (nA * nB > opts.max_cells)
    throw Error(ErrorCode::Resource, "min_distortion: sample product " + std::to_string(nA * nB) +
                                         " exceeds limit " + std::to_string(opts.max_cells));

  CostModel cm(A, B, K);
  std::vector<std::pair<uint32_t, uint32_t>> pins;
  for (size_t t = 0; t < A.pinned().size(); ++t)
    pins.push_back({static_cast<uint32_t>(A.pinned()[t]), static_cast<uint32_t>(B.pinned()[t])});
  Searcher search(cm, pins, K, A, B);
  search.run();
  if (search.bestVal == UINT32_MAX) throw Error(ErrorCode::BadInput, "no pinned correlation exists");

  std::vector<uint32_t> cells = search.bestCells;
  if (cm.cells <= opts.lex_refine_cells) cells = search.lex_least();

  out.rho = cm.values[search.bestVal];
  out.nodes = search.nodes;
  out.argmin.nA = nA;
  out.argmin.nB = nB;
  for (uint32_t c : cells)
    out.argmin.pairs.push_back({static_cast<uint32_t>(c / nB), static_cast<uint32_t>(c % nB)});
  out.argmin.canonicalize();
  out.certificate = mesh_certificate(A, B, opts.subdivisions);
  return out;
}

MinDistortionResult min_distortion(const RFRStructure& A, const RFRStructure& B, const Rat& K,
                                   const MinDistortionOptions& opts) {
  if (A.tuple.size() != B.tuple.size())
    throw Error(ErrorCode::BadInput, "min_distortion: tuples differ in length");
  SampledStructure SA = sample_structure(A, full_subhull(A.hull), opts.subdivisions);
  SampledStructure SB = sample_structure(B, full_subhull(B.hull), opts.subdivisions);
  MinDistortionResult out = min_distortion(SA, SB, K, opts);
  std::vector<PointRef> ta(A.tuple.begin(), A.tuple.end()), tb(B.tuple.begin(), B.tuple.end());
  if (!is_large(K, *A.hull, ta) || !is_large(K, *B.hull, tb))
    out.warnings.push_back("K is not large for the pinned tuples");
  return out;
}

}  // namespace rforest
