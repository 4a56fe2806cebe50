#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "curve.hpp"
#include "errors.hpp"
#include "groebner.hpp"
#include "hermitian.hpp"
#include "invariants.hpp"
#include "mpoly.hpp"

namespace curvecount {

// A verified counting configuration: curve family, Hermitian form, and one
// degree matrix per point pair, all mutually consistent.
struct CurveModel {
  CurveCase cse;
  unsigned n = 0;  // number of points
  unsigned k = 0;  // multiplicity 2/(c-n)
  HForm H;
  std::map<std::pair<unsigned, unsigned>, MDeg> M;  // keyed by (i, j), i < j
};

// Throws invalid_argument_error unless the model is internally consistent:
// the form is positive definite with the forced diagonal, every pair (i, j)
// carries a degree matrix of the right family and row/column sums, and each
// matrix induces exactly the form's off-diagonal entry.
inline void validate_model(const CurveModel& m) {
  make_case(m.cse.a, m.cse.b, m.cse.c);
  if (m.H.c != m.cse.c)
    throw invalid_argument_error("form order does not match the curve case");
  if (m.H.n < 2) throw invalid_argument_error("a model needs at least two points");
  if (m.n != m.H.n)
    throw invalid_argument_error("model dimension does not match the form");
  if (m.k != expected_k(m.cse.c, m.n))
    throw invalid_argument_error("multiplicity does not match the dimension");
  make_hform(m.H.c, m.H.n, m.H.e);  // hermitian symmetry, real diagonal
  if (!positive_definite(m.H))
    throw invalid_argument_error("form is not positive definite");
  const std::int64_t d = diag_degree(m.cse, m.k);
  for (unsigned i = 0; i < m.n; ++i)
    if (!(m.H.at(i, i) == CycInt{d, 0}))
      throw invalid_argument_error("diagonal must equal the coordinate degree");
  if (m.M.size() != std::size_t{m.n} * (m.n - 1) / 2)
    throw invalid_argument_error("exactly one degree matrix per point pair");
  for (unsigned i = 0; i < m.n; ++i)
    for (unsigned j = i + 1; j < m.n; ++j) {
      auto it = m.M.find({i, j});
      if (it == m.M.end())
        throw invalid_argument_error("every point pair needs a degree matrix");
      const MDeg& md = it->second;
      if (!(md.cse == m.cse) || md.k != m.k)
        throw invalid_argument_error(
            "degree matrix belongs to a different configuration");
      for (unsigned l = 0; l < m.cse.a; ++l) {
        unsigned sum = 0;
        for (unsigned r = 0; r < m.cse.b; ++r) sum += md.at(l, r);
        if (sum != deg_P(m.cse, m.k))
          throw invalid_argument_error("degree matrix row sum is off");
      }
      for (unsigned r = 0; r < m.cse.b; ++r) {
        unsigned sum = 0;
        for (unsigned l = 0; l < m.cse.a; ++l) sum += md.at(l, r);
        if (sum != deg_Q(m.cse, m.k))
          throw invalid_argument_error("degree matrix column sum is off");
      }
      if (!(h_from_M(md) == m.H.at(i, j)))
        throw invalid_argument_error("degree matrix contradicts the form entry");
    }
}

inline CurveModel make_model(const CurveCase& cse, HForm H,
                             std::map<std::pair<unsigned, unsigned>, MDeg> M) {
  CurveCase checked = make_case(cse.a, cse.b, cse.c);
  if (H.c != checked.c)
    throw invalid_argument_error("form order does not match the curve case");
  CurveModel m{checked, H.n, expected_k(checked.c, H.n), std::move(H), std::move(M)};
  validate_model(m);
  return m;
}

// One coprimality witness: factors (l, r) and (l2, r2) of pair (i, j) must
// share no root, encoded as aux variable `var` holding the inverse of their
// resultant.  Qualifying slots have l < l2, r != r2 and both degrees nonzero.
struct GGSlot {
  unsigned i = 0, j = 0;
  unsigned l = 0, r = 0;
  unsigned l2 = 0, r2 = 0;
  std::size_t var = 0;
};

// Ring layout for one model: first the factor coefficients (weight
// ascending, host factor degree descending, then pair/slot order), then one
// witness variable per qualifying factor pair, then one coordinate witness
// per point.  Variable 0 is the gauge coefficient, pinned to zero in every
// chart.
struct GaugedVariables {
  std::vector<VarSpec> specs;
  std::size_t coeff_count = 0;        // leading block of factor coefficients
  std::vector<unsigned> host_degree;  // factor degree per coefficient variable
  std::vector<GGSlot> gg_slots;
  std::size_t pq_offset = 0;  // first coordinate witness variable

  std::size_t free_count() const { return coeff_count - 1; }

  std::size_t coeff_var(unsigned i, unsigned j, unsigned l, unsigned r,
                        unsigned index) const {
    for (std::size_t v = 0; v < coeff_count; ++v) {
      const VarProvenance& p = specs[v].prov;
      if (p.i == i && p.j == j && p.l == l && p.r == r && p.index == index)
        return v;
    }
    throw invalid_argument_error("no such factor coefficient");
  }
};

inline GaugedVariables allocate_variables(const CurveModel& m) {
  struct Slot {
    unsigned i, j, l, r, index, host;
  };
  std::vector<Slot> slots;
  for (const auto& [pair, md] : m.M)
    for (unsigned l = 0; l < m.cse.a; ++l)
      for (unsigned r = 0; r < m.cse.b; ++r) {
        unsigned d = md.at(l, r);
        for (unsigned idx = 1; idx <= d; ++idx)
          slots.push_back({pair.first, pair.second, l, r, idx, d});
      }
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    if (a.index != b.index) return a.index < b.index;  // weight == index
    if (a.host != b.host) return a.host > b.host;
    return std::tie(a.i, a.j, a.l, a.r) < std::tie(b.i, b.j, b.l, b.r);
  });

  GaugedVariables gv;
  for (const Slot& s : slots) {
    gv.specs.push_back(
        VarSpec::g_coeff(gv.specs.size(), s.i, s.j, s.l, s.r, s.index));
    gv.host_degree.push_back(s.host);
  }
  gv.coeff_count = gv.specs.size();

  for (const auto& [pair, md] : m.M)
    for (unsigned l = 0; l < m.cse.a; ++l)
      for (unsigned r = 0; r < m.cse.b; ++r) {
        if (!md.at(l, r)) continue;
        for (unsigned l2 = l + 1; l2 < m.cse.a; ++l2)
          for (unsigned r2 = 0; r2 < m.cse.b; ++r2) {
            if (r2 == r || !md.at(l2, r2)) continue;
            std::size_t id = gv.specs.size();
            gv.specs.push_back(
                VarSpec::aux(id, 1, "A" + std::to_string(gv.gg_slots.size())));
            gv.gg_slots.push_back({pair.first, pair.second, l, r, l2, r2, id});
          }
      }

  gv.pq_offset = gv.specs.size();
  for (unsigned i = 0; i < m.n; ++i)
    gv.specs.push_back(
        VarSpec::aux(gv.specs.size(), 1, "J" + std::to_string(i)));
  return gv;
}

// Chart r of the coefficient space: every free coefficient before r
// vanishes and coefficient r is scaled to one.  Together with the gauge
// (variable 0 = 0) the charts partition all curves.
struct Cell {
  std::size_t r = 0;
};

inline MPoly cell_substitute(const MPoly& f, const GaugedVariables& gv,
                             const Cell& cell) {
  if (cell.r < 1 || cell.r >= gv.coeff_count)
    throw invalid_argument_error("cell index must name a free coefficient");
  MPoly g = f;
  for (std::size_t v = 0; v < cell.r; ++v) g = substitute_const(g, v, 0);
  return substitute_const(g, cell.r, f.ring().fp().one());
}

namespace detail {

inline void check_system_inputs(const CurveCtx& E, const CurveModel& m,
                                const PolyRing& R, const GaugedVariables& gv,
                                const std::vector<CurvePoint>& pts) {
  if (R.nvars() != gv.specs.size())
    throw context_error("ring does not match the variable allocation");
  if (R.fp().p() != E.field().p())
    throw context_error("ring prime does not match the curve context");
  if (!(E.curve_case() == m.cse))
    throw context_error("curve context does not match the model");
  if (pts.size() != m.n)
    throw invalid_argument_error("point count must equal the model dimension");
  for (const CurvePoint& p : pts) {
    if (p.at_infinity) throw invalid_argument_error("points must be finite");
    if (!E.on_curve(p)) throw invalid_argument_error("points must lie on the curve");
  }
}

// Montgomery scalars x_i - omega^l x_j and y_i - omega^r y_j of one pair,
// all validated nonzero.  Their full products agree on the curve, which is
// exactly what makes the two equation families compatible.
struct PairScalars {
  std::vector<std::uint32_t> sP, sQ;
};

inline PairScalars pair_scalars(const CurveCtx& E, unsigned i, unsigned j,
                                const std::vector<CurvePoint>& pts) {
  const FpCtx& fp = E.field();
  const CurveCase& cse = E.curve_case();
  PairScalars sc;
  std::uint32_t prodP = fp.one(), prodQ = fp.one();
  for (unsigned l = 0; l < cse.a; ++l) {
    std::uint32_t w = E.zeta_pow(l * (cse.c / cse.a));
    std::uint32_t v = fp.sub(pts[i].x, fp.mul(w, pts[j].x));
    if (v == 0)
      throw degenerate_input_error(
          "point coordinates are related by a root of unity");
    prodP = fp.mul(prodP, v);
    sc.sP.push_back(v);
  }
  for (unsigned r = 0; r < cse.b; ++r) {
    std::uint32_t w = E.zeta_pow(r * (cse.c / cse.b));
    std::uint32_t v = fp.sub(pts[i].y, fp.mul(w, pts[j].y));
    if (v == 0)
      throw degenerate_input_error(
          "point coordinates are related by a root of unity");
    prodQ = fp.mul(prodQ, v);
    sc.sQ.push_back(v);
  }
  assert(prodP == prodQ);  // x_i^a - x_j^a = y_i^b - y_j^b on the curve
  (void)prodP;
  (void)prodQ;
  return sc;
}

// Ascending coefficient vector of the monic degree-`deg` factor of slot
// (i, j, l, r): coefficient of u^(deg-index) is the variable of that index.
inline std::vector<MPoly> factor_coeffs(const PolyRing& R,
                                        const GaugedVariables& gv, unsigned i,
                                        unsigned j, unsigned l, unsigned r,
                                        unsigned deg) {
  std::vector<MPoly> g(deg + 1, MPoly::zero(R));
  g[deg] = MPoly::constant(R, R.fp().one());
  for (unsigned idx = 1; idx <= deg; ++idx)
    g[deg - idx] = MPoly::variable(R, gv.coeff_var(i, j, l, r, idx));
  return g;
}

inline std::vector<MPoly> convolve(const PolyRing& R,
                                   const std::vector<MPoly>& a,
                                   const std::vector<MPoly>& b) {
  std::vector<MPoly> out(a.size() + b.size() - 1, MPoly::zero(R));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      out[i + j] = add(out[i + j], mul(a[i], b[j]));
  return out;
}

// Right-hand side s * prod G of one pair equation, ascending in u.  On the
// P side equation e ranges over l with the product over r, and conversely.
inline std::vector<MPoly> row_product(const PolyRing& R,
                                      const GaugedVariables& gv,
                                      const CurveModel& m, unsigned i,
                                      unsigned j, bool p_side, unsigned e,
                                      std::uint32_t s) {
  const MDeg& md = m.M.at({i, j});
  std::vector<MPoly> prod{MPoly::constant(R, s)};
  const unsigned lim = p_side ? m.cse.b : m.cse.a;
  for (unsigned o = 0; o < lim; ++o) {
    unsigned l = p_side ? e : o, r = p_side ? o : e;
    if (unsigned d = md.at(l, r)) prod = convolve(R, prod, factor_coeffs(R, gv, i, j, l, r, d));
  }
  return prod;  // length deg+1, leading entry the constant s
}

}  // namespace detail

// Linear elimination of the coordinate polynomials.  Each pair equation
// P_i - omega^e P_j = s * prod G is linear in the unknown P coefficients
// with a matrix acting point-wise, so one left null-space vector of the
// point matrix turns the right-hand sides into relations among the factor
// coefficients alone.  The returned generators are those combinations'
// u-coefficients; the leading one cancels identically because the null
// vector also kills the marked-point coordinates.  Both sides contribute,
// P first; within a side, null vectors are enumerated by their defining
// free equation and coefficients ascending in u.
inline std::vector<MPoly> eliminate_PQ(const CurveCtx& E, const CurveModel& m,
                                       const PolyRing& R,
                                       const GaugedVariables& gv,
                                       const std::vector<CurvePoint>& pts,
                                       std::optional<Cell> cell = std::nullopt) {
  detail::check_system_inputs(E, m, R, gv, pts);
  const FpCtx& fp = R.fp();
  std::map<std::pair<unsigned, unsigned>, detail::PairScalars> sc;
  for (const auto& [pr, md] : m.M)
    sc.emplace(pr, detail::pair_scalars(E, pr.first, pr.second, pts));

  std::vector<MPoly> out;
  for (int side = 0; side < 2; ++side) {
    const bool p_side = side == 0;
    const unsigned per_pair = p_side ? m.cse.a : m.cse.b;
    const unsigned step = m.cse.c / per_pair;
    const unsigned deg = p_side ? deg_P(m.cse, m.k) : deg_Q(m.cse, m.k);
    struct Row {
      unsigned i, j, e;
      std::uint32_t s;
    };
    std::vector<Row> rows;
    for (const auto& [pr, md] : m.M) {
      const detail::PairScalars& ps = sc.at(pr);
      for (unsigned e = 0; e < per_pair; ++e)
        rows.push_back({pr.first, pr.second, e, p_side ? ps.sP[e] : ps.sQ[e]});
    }

    // reduced echelon form of the transposed point matrix
    std::vector<std::vector<std::uint32_t>> T(
        m.n, std::vector<std::uint32_t>(rows.size(), 0));
    for (std::size_t t = 0; t < rows.size(); ++t) {
      T[rows[t].i][t] = fp.one();
      T[rows[t].j][t] = fp.neg(E.zeta_pow(rows[t].e * step));
    }
    std::vector<std::size_t> pivots;
    std::size_t prow = 0;
    for (std::size_t col = 0; col < rows.size() && prow < m.n; ++col) {
      std::size_t pr2 = prow;
      while (pr2 < m.n && T[pr2][col] == 0) ++pr2;
      if (pr2 == m.n) continue;
      std::swap(T[pr2], T[prow]);
      std::uint32_t inv = fp.inv(T[prow][col]);
      for (auto& x : T[prow]) x = fp.mul(x, inv);
      for (std::size_t rr = 0; rr < m.n; ++rr) {
        if (rr == prow || T[rr][col] == 0) continue;
        std::uint32_t f = T[rr][col];
        for (std::size_t c2 = col; c2 < rows.size(); ++c2)
          T[rr][c2] = fp.sub(T[rr][c2], fp.mul(f, T[prow][c2]));
      }
      pivots.push_back(col);
      ++prow;
    }
    assert(prow == m.n);  // two or more equations per pair pin every point

    std::vector<std::vector<MPoly>> rhs(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t)
      rhs[t] = detail::row_product(R, gv, m, rows[t].i, rows[t].j, p_side,
                                   rows[t].e, rows[t].s);

    std::vector<bool> is_pivot(rows.size(), false);
    for (std::size_t c : pivots) is_pivot[c] = true;
    for (std::size_t f = 0; f < rows.size(); ++f) {
      if (is_pivot[f]) continue;
      std::vector<std::pair<std::size_t, std::uint32_t>> lam;
      for (std::size_t pi = 0; pi < pivots.size(); ++pi)
        if (T[pi][f] != 0) lam.emplace_back(pivots[pi], fp.neg(T[pi][f]));
      lam.emplace_back(f, fp.one());
      for (unsigned t = 0; t <= deg; ++t) {
        MPoly combo = MPoly::zero(R);
        for (const auto& [rowi, cf] : lam)
          combo = add(combo, scale(rhs[rowi][t], cf));
        if (t == deg) {
          assert(combo.is_zero());
          continue;
        }
        out.push_back(std::move(combo));
      }
    }
  }
  if (cell)
    for (MPoly& g : out) g = cell_substitute(g, gv, *cell);
  return out;
}

// Coordinate polynomials solved back out of the pair equations.  Each
// non-anchor point is recovered, together with the anchor, from the two
// lowest equations of their shared pair alone; the anchor keeps the value
// its first pair produced.  Leading coefficients come out equal to the
// marked-point coordinates.
struct ReconstructedPQ {
  std::vector<std::vector<MPoly>> P, Q;  // per point, ascending in u
};

inline ReconstructedPQ reconstruct_PQ(const CurveCtx& E, const CurveModel& m,
                                      const PolyRing& R,
                                      const GaugedVariables& gv,
                                      const std::vector<CurvePoint>& pts,
                                      unsigned anchor = 0) {
  detail::check_system_inputs(E, m, R, gv, pts);
  if (anchor >= m.n) throw invalid_argument_error("anchor point is out of range");
  const FpCtx& fp = R.fp();
  std::map<std::pair<unsigned, unsigned>, detail::PairScalars> sc;
  for (const auto& [pr, md] : m.M)
    sc.emplace(pr, detail::pair_scalars(E, pr.first, pr.second, pts));

  ReconstructedPQ rec;
  rec.P.assign(m.n, {});
  rec.Q.assign(m.n, {});
  for (unsigned other = 0; other < m.n; ++other) {
    if (other == anchor) continue;
    const unsigned mn = std::min(anchor, other), mx = std::max(anchor, other);
    const detail::PairScalars& ps = sc.at({mn, mx});
    for (int side = 0; side < 2; ++side) {
      const bool p_side = side == 0;
      const unsigned step = m.cse.c / (p_side ? m.cse.a : m.cse.b);
      const unsigned deg = p_side ? deg_P(m.cse, m.k) : deg_Q(m.cse, m.k);
      const std::uint32_t s0 = p_side ? ps.sP[0] : ps.sQ[0];
      const std::uint32_t s1 = p_side ? ps.sP[1] : ps.sQ[1];
      auto r0 = detail::row_product(R, gv, m, mn, mx, p_side, 0, s0);
      auto r1 = detail::row_product(R, gv, m, mn, mx, p_side, 1, s1);
      // subtracting the e = 0 and e = 1 equations isolates the larger index
      const std::uint32_t winv = fp.inv(fp.sub(E.zeta_pow(step), fp.one()));
      std::vector<MPoly> vmx(deg + 1, MPoly::zero(R));
      std::vector<MPoly> vmn(deg + 1, MPoly::zero(R));
      for (unsigned t = 0; t <= deg; ++t) {
        vmx[t] = scale(sub(r0[t], r1[t]), winv);
        vmn[t] = add(r0[t], vmx[t]);
      }
      assert(vmn[deg] ==
             MPoly::constant(R, p_side ? pts[mn].x : pts[mn].y));
      assert(vmx[deg] ==
             MPoly::constant(R, p_side ? pts[mx].x : pts[mx].y));
      auto& store = p_side ? rec.P : rec.Q;
      if (store[other].empty()) store[other] = other == mx ? std::move(vmx) : std::move(vmn);
      if (store[anchor].empty()) store[anchor] = other == mx ? std::move(vmn) : std::move(vmx);
    }
  }
  return rec;
}

// Sylvester matrix of two ascending coefficient vectors of exact degree
// size-1, in the row layout of the library resultant, so that
// det(sylvester_matrix(u - A, u - B)) = B - A.
inline std::vector<std::vector<MPoly>> sylvester_matrix(const PolyRing& R,
                                                        std::span<const MPoly> A,
                                                        std::span<const MPoly> B) {
  if (A.empty() || B.empty())
    throw invalid_argument_error("coefficient vectors must be nonempty");
  if (A.back().is_zero() || B.back().is_zero())
    throw degenerate_input_error("leading coefficients must be nonzero");
  const std::size_t m = A.size() - 1, n = B.size() - 1;
  const std::size_t k = m + n;
  std::vector<std::vector<MPoly>> syl(k, std::vector<MPoly>(k, MPoly::zero(R)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t <= m; ++t) syl[i][i + t] = A[t];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t t = 0; t <= n; ++t) syl[n + i][i + t] = B[t];
  return syl;
}

// One generator per coprimality witness: var * res(G, G') - 1, where the
// resultant is expanded symbolically from the Sylvester matrix of the two
// monic factors.
inline std::vector<MPoly> inequality_generators_GG(
    const CurveModel& m, const PolyRing& R, const GaugedVariables& gv,
    std::optional<Cell> cell = std::nullopt) {
  if (R.nvars() != gv.specs.size())
    throw context_error("ring does not match the variable allocation");
  const FpCtx& fp = R.fp();
  std::vector<MPoly> out;
  for (const GGSlot& s : gv.gg_slots) {
    const MDeg& md = m.M.at({s.i, s.j});
    auto A = detail::factor_coeffs(R, gv, s.i, s.j, s.l, s.r, md.at(s.l, s.r));
    auto B =
        detail::factor_coeffs(R, gv, s.i, s.j, s.l2, s.r2, md.at(s.l2, s.r2));
    auto syl = sylvester_matrix(R, A, B);
    MPoly res = detail::bareiss_det(R, syl);
    MPoly g = sub(mul(MPoly::variable(R, s.var), res),
                  MPoly::constant(R, fp.one()));
    out.push_back(cell ? cell_substitute(g, gv, *cell) : std::move(g));
  }
  return out;
}

// One generator per point: var * res(P_i, Q_i) - 1 on the reconstructed
// coordinate polynomials, forcing P_i and Q_i coprime.
inline std::vector<MPoly> inequality_generators_PQ(
    const CurveCtx& E, const CurveModel& m, const PolyRing& R,
    const GaugedVariables& gv, const std::vector<CurvePoint>& pts,
    std::optional<Cell> cell = std::nullopt) {
  ReconstructedPQ rec = reconstruct_PQ(E, m, R, gv, pts);
  const FpCtx& fp = R.fp();
  std::vector<MPoly> out;
  for (unsigned i = 0; i < m.n; ++i) {
    auto syl = sylvester_matrix(R, rec.P[i], rec.Q[i]);
    MPoly res = detail::bareiss_det(R, syl);
    MPoly g = sub(mul(MPoly::variable(R, gv.pq_offset + i), res),
                  MPoly::constant(R, fp.one()));
    out.push_back(cell ? cell_substitute(g, gv, *cell) : std::move(g));
  }
  return out;
}

// Determinant of a square polynomial matrix, reduced modulo I.  Laplace
// expansion over column subsets with a normal-form pass after every minor,
// so intermediate entries stay no larger than the quotient allows.
inline MPoly determinant_modulo(const PolyRing& R,
                                std::vector<std::vector<MPoly>> mat,
                                const Ideal& I) {
  if (&I.ring() != &R) throw context_error("ideal belongs to a different ring");
  const std::size_t k = mat.size();
  for (const auto& row : mat)
    if (row.size() != k) throw invalid_argument_error("matrix must be square");
  if (k > 16)
    throw invalid_argument_error("subset expansion supports at most 16 columns");
  const FpCtx& fp = R.fp();
  if (k == 0) return normal_form(MPoly::constant(R, fp.one()), I);
  std::vector<MPoly> D(std::size_t{1} << k, MPoly::zero(R));
  D[0] = MPoly::constant(R, fp.one());
  for (std::uint32_t S = 1; S < (1u << k); ++S) {
    const unsigned row = std::popcount(S) - 1;
    MPoly acc = MPoly::zero(R);
    unsigned pos = 0;
    for (unsigned j = 0; j < k; ++j) {
      if (!(S & (1u << j))) continue;
      if (!mat[row][j].is_zero()) {
        MPoly term = mul(mat[row][j], D[S ^ (1u << j)]);
        acc = ((row + pos) & 1) ? sub(acc, term) : add(acc, term);
      }
      ++pos;
    }
    D[S] = normal_form(acc, I);
  }
  return D[(std::size_t{1} << k) - 1];
}

// The cell system as an ideal, stages cumulative: 1 adds the elimination
// relations on top of the chart equations, 2 the factor-coprimality
// witnesses, 3 the coordinate-coprimality witnesses.
inline Ideal build_cell_ideal(const CurveCtx& E, const CurveModel& m,
                              const PolyRing& R, const GaugedVariables& gv,
                              const std::vector<CurvePoint>& pts,
                              const Cell& cell, unsigned stage) {
  if (stage < 1 || stage > 3)
    throw invalid_argument_error("stage must be 1, 2 or 3");
  if (cell.r < 1 || cell.r >= gv.coeff_count)
    throw invalid_argument_error("cell index must name a free coefficient");
  const FpCtx& fp = R.fp();
  std::vector<MPoly> gens;
  for (std::size_t v = 0; v < cell.r; ++v)
    gens.push_back(MPoly::variable(R, v));
  gens.push_back(
      sub(MPoly::variable(R, cell.r), MPoly::constant(R, fp.one())));
  auto append = [&gens](std::vector<MPoly> more) {
    for (MPoly& g : more) gens.push_back(std::move(g));
  };
  append(eliminate_PQ(E, m, R, gv, pts, cell));
  if (stage >= 2) append(inequality_generators_GG(m, R, gv, cell));
  if (stage >= 3) append(inequality_generators_PQ(E, m, R, gv, pts, cell));
  return Ideal(R, std::move(gens));
}

// Plain-text rendering of one cell system: configuration line, points,
// variable table, generator list.  Deterministic for fixed inputs.
inline std::string dump_system(const CurveCtx& E, const CurveModel& m,
                               const PolyRing& R, const GaugedVariables& gv,
                               const std::vector<CurvePoint>& pts,
                               const Cell& cell, unsigned stage) {
  Ideal I = build_cell_ideal(E, m, R, gv, pts, cell, stage);
  const FpCtx& fp = R.fp();
  std::ostringstream os;
  os << "curve case (" << m.cse.a << "," << m.cse.b << "," << m.cse.c << ")"
     << "  points " << m.n << "  multiplicity " << m.k << "  prime " << fp.p()
     << "\n";
  os << "cell " << cell.r << "  stage " << stage << "\n";
  for (std::size_t i = 0; i < pts.size(); ++i)
    os << "point " << i << ": x " << fp.from_mont(pts[i].x) << "  y "
       << fp.from_mont(pts[i].y) << "\n";
  os << "variables " << R.nvars() << "\n";
  for (std::size_t v = 0; v < R.nvars(); ++v)
    os << "  " << v << " " << R.var(v).name << " weight " << R.var(v).weight
       << "\n";
  const std::vector<MPoly>& gens = I.generators();
  os << "generators " << gens.size() << "\n";
  for (std::size_t t = 0; t < gens.size(); ++t)
    os << "  " << t << ": " << to_string(gens[t]) << "\n";
  return os.str();
}

}  // namespace curvecount
