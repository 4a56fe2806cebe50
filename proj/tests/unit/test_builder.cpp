#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "curvecount/builder.hpp"
#include "curvecount/curve.hpp"
#include "curvecount/cyclotomic.hpp"
#include "curvecount/groebner.hpp"
#include "curvecount/hermitian.hpp"
#include "curvecount/invariants.hpp"
#include "curvecount/rng.hpp"

using namespace curvecount;

namespace {

// ---------------------------------------------------------------------------
// Dense univariate helpers over GF(p), coefficients ascending, Montgomery
// form.  These re-derive every polynomial identity the builder is supposed
// to encode, without using any of the builder's own machinery.
// ---------------------------------------------------------------------------

using Dense = std::vector<std::uint32_t>;

Dense dtrim(Dense f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
  return f;
}

Dense dadd(const FpCtx& fp, const Dense& a, const Dense& b) {
  Dense r(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    std::uint32_t x = i < a.size() ? a[i] : 0, y = i < b.size() ? b[i] : 0;
    r[i] = fp.add(x, y);
  }
  return dtrim(std::move(r));
}

Dense dscale(const FpCtx& fp, const Dense& a, std::uint32_t c) {
  Dense r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = fp.mul(a[i], c);
  return dtrim(std::move(r));
}

Dense dsub(const FpCtx& fp, const Dense& a, const Dense& b) {
  return dadd(fp, a, dscale(fp, b, fp.neg(fp.one())));
}

Dense dmul(const FpCtx& fp, const Dense& a, const Dense& b) {
  if (a.empty() || b.empty()) return {};
  Dense r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      r[i + j] = fp.add(r[i + j], fp.mul(a[i], b[j]));
  return dtrim(std::move(r));
}

// f(u + t), via Horner composition with (u + t)
Dense dshift(const FpCtx& fp, const Dense& f, std::uint32_t t) {
  Dense r;
  for (std::size_t i = f.size(); i-- > 0;) {
    r = dmul(fp, r, Dense{t, fp.one()});
    r = dadd(fp, r, Dense{f[i]});
  }
  return r;
}

// Determinant of a dense square matrix over GF(p) (Gaussian elimination).
std::uint32_t field_det(const FpCtx& fp, std::vector<Dense> m) {
  const std::size_t k = m.size();
  std::uint32_t det = fp.one();
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    while (piv < k && m[piv][c] == 0) ++piv;
    if (piv == k) return 0;
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = fp.neg(det);
    }
    det = fp.mul(det, m[c][c]);
    std::uint32_t inv = fp.inv(m[c][c]);
    for (std::size_t rr = c + 1; rr < k; ++rr) {
      if (m[rr][c] == 0) continue;
      std::uint32_t f = fp.mul(m[rr][c], inv);
      for (std::size_t cc = c; cc < k; ++cc)
        m[rr][cc] = fp.sub(m[rr][cc], fp.mul(f, m[c][cc]));
    }
  }
  return det;
}

std::size_t field_rank(const FpCtx& fp, std::vector<Dense> m) {
  if (m.empty()) return 0;
  const std::size_t cols = m[0].size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t piv = rank;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    std::uint32_t inv = fp.inv(m[rank][c]);
    for (std::size_t rr = 0; rr < m.size(); ++rr) {
      if (rr == rank || m[rr][c] == 0) continue;
      std::uint32_t f = fp.mul(m[rr][c], inv);
      for (std::size_t cc = 0; cc < cols; ++cc)
        m[rr][cc] = fp.sub(m[rr][cc], fp.mul(f, m[rank][cc]));
    }
    ++rank;
  }
  return rank;
}

// Sylvester resultant of two dense polynomials of exact degrees
// (size-1), ascending coefficient rows — same convention as the library.
std::uint32_t dense_resultant(const FpCtx& fp, const Dense& a, const Dense& b) {
  REQUIRE(!a.empty());
  REQUIRE(!b.empty());
  REQUIRE(a.back() != 0);
  REQUIRE(b.back() != 0);
  const std::size_t m = a.size() - 1, n = b.size() - 1;
  const std::size_t k = m + n;
  if (k == 0) return fp.one();
  std::vector<Dense> syl(k, Dense(k, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t <= m; ++t) syl[i][i + t] = a[t];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t t = 0; t <= n; ++t) syl[n + i][i + t] = b[t];
  return field_det(fp, std::move(syl));
}

std::uint32_t eval_mpoly(const MPoly& f, const std::vector<std::uint32_t>& vals) {
  const PolyRing& R = f.ring();
  REQUIRE(vals.size() == R.nvars());
  const FpCtx& fp = R.fp();
  std::uint32_t acc = 0;
  for (std::size_t t = 0; t < f.term_count(); ++t) {
    std::uint32_t c = f.coeff(t);
    auto e = f.exp(t);
    for (std::size_t v = 0; v < e.size(); ++v)
      if (e[v]) c = fp.mul(c, fp.pow(vals[v], e[v]));
    acc = fp.add(acc, c);
  }
  return acc;
}

Dense eval_coeffs(const std::vector<MPoly>& coeffs,
                  const std::vector<std::uint32_t>& vals) {
  Dense out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) out[i] = eval_mpoly(coeffs[i], vals);
  return out;  // deliberately untrimmed: leading coefficient position kept
}

// ---------------------------------------------------------------------------
// Model constructors
// ---------------------------------------------------------------------------

MDeg pick_M(const CurveCase& cse, unsigned k, CycInt h,
            const std::vector<std::array<unsigned, 3>>& pins) {
  auto list = M_from_h(cse, k, h);
  for (const MDeg& m : list) {
    bool ok = true;
    for (auto [l, r, want] : pins)
      if (m.at(l, r) != want) {
        ok = false;
        break;
      }
    if (ok) return m;
  }
  FAIL("no degree matrix with the requested pins");
  return list.at(0);
}

CurveModel model_333_H3() {
  CurveCase cse = make_case(3, 3, 3);
  HForm H = make_hform(3, 2,
                       {CycInt{2, 0}, CycInt{-1, 0}, CycInt{-1, 0}, CycInt{2, 0}});
  MDeg m = pick_M(cse, 2, CycInt{-1, 0}, {{0, 0, 2}, {1, 1, 1}, {1, 2, 1}});
  std::map<std::pair<unsigned, unsigned>, MDeg> M;
  M[{0, 1}] = m;
  return make_model(cse, H, std::move(M));
}

CurveModel model_244_H2() {
  CurveCase cse = make_case(2, 4, 4);
  HForm H = make_hform(4, 2,
                       {CycInt{2, 0}, CycInt{-1, 1}, CycInt{-1, -1}, CycInt{2, 0}});
  MDeg m = pick_M(cse, 1, CycInt{-1, 1}, {{0, 0, 1}, {0, 1, 1}});
  std::map<std::pair<unsigned, unsigned>, MDeg> M;
  M[{0, 1}] = m;
  return make_model(cse, H, std::move(M));
}

CurveModel model_244_diag64() {
  CurveCase cse = make_case(2, 4, 4);
  CycInt d{4, 0}, z{0, 0};
  HForm H = make_hform(4, 3, {d, z, z, z, d, z, z, z, d});
  MDeg m = pick_M(cse, 2, z, {{0, 0, 1}, {0, 1, 1}, {0, 2, 1}, {0, 3, 1}});
  std::map<std::pair<unsigned, unsigned>, MDeg> M;
  M[{0, 1}] = m;
  M[{0, 2}] = m;
  M[{1, 2}] = m;
  return make_model(cse, H, std::move(M));
}

CurveModel model_236_H144() {
  CurveCase cse = make_case(2, 3, 6);
  CycInt diag{6, 0}, up{-4, 2}, lo{-2, -2}, z{0, 0};
  std::vector<CycInt> e(16, z);
  auto at = [&](unsigned i, unsigned j) -> CycInt& { return e[i * 4 + j]; };
  for (unsigned i = 0; i < 4; ++i) at(i, i) = diag;
  for (unsigned i = 0; i + 1 < 4; ++i) {
    at(i, i + 1) = up;
    at(i + 1, i) = lo;
  }
  HForm H = make_hform(6, 4, e);
  MDeg chain = M_from_h(cse, 1, up).at(0);
  MDeg flat = M_from_h(cse, 1, z).at(0);
  std::map<std::pair<unsigned, unsigned>, MDeg> M;
  for (unsigned i = 0; i < 4; ++i)
    for (unsigned j = i + 1; j < 4; ++j) M[{i, j}] = (j == i + 1) ? chain : flat;
  return make_model(cse, H, std::move(M));
}

CurveModel model_236_H13824() {
  CurveCase cse = make_case(2, 3, 6);
  CycInt diag{12, 0}, a{4, 4}, b{6, 0}, z{0, 0};
  std::vector<CycInt> e(25, z);
  auto at = [&](unsigned i, unsigned j) -> CycInt& { return e[i * 5 + j]; };
  for (unsigned i = 0; i < 5; ++i) at(i, i) = diag;
  for (unsigned i = 0; i < 5; ++i)
    for (unsigned j = i + 1; j < 5; ++j) {
      bool typeB = (j == 4 && (i == 2 || i == 3));
      at(i, j) = typeB ? b : a;
      at(j, i) = cyc_conj(typeB ? b : a, 6);
    }
  HForm H = make_hform(6, 5, e);
  MDeg mA = M_from_h(cse, 2, a).at(0);
  MDeg mB = M_from_h(cse, 2, b).at(0);
  std::map<std::pair<unsigned, unsigned>, MDeg> M;
  for (unsigned i = 0; i < 5; ++i)
    for (unsigned j = i + 1; j < 5; ++j)
      M[{i, j}] = (j == 4 && (i == 2 || i == 3)) ? mB : mA;
  return make_model(cse, H, std::move(M));
}

// ---------------------------------------------------------------------------
// Independent closed-form construction of the unique (3,3,3) H_3 curve
// through two sampled points, following the hand elimination: with the
// marked point at (1:0) and affine freedom spent as G_{1,2} = u,
// G_{2,1} = u - v, the remaining factors are uniquely determined linear /
// quadratic polynomials.  All arithmetic is dense over GF(p).
// ---------------------------------------------------------------------------

struct ClosedForm {
  CurvePoint p1, p2;
  // dense factors at v = 1, indexed by the (l, r) slots of nonzero degree
  Dense G00, G11, G12, G21, G22;
  std::vector<std::uint32_t> coeff_vals;  // values of the 6 coefficient vars
};

ClosedForm closed_form_curve(const CurveCtx& E, Rng& rng) {
  const FpCtx& fp = E.field();
  const std::uint32_t one = fp.one();
  std::uint32_t zeta = E.zeta_pow(1), zeta2 = E.zeta_pow(2);
  for (int attempt = 0; attempt < 200; ++attempt) {
    CurvePoint p1 = E.sample_point(rng), p2 = E.sample_point(rng);
    std::uint32_t X1 = p1.x, Y1 = p1.y, X2 = p2.x, Y2 = p2.y;
    if (X1 == 0 || X2 == 0 || Y1 == 0 || Y2 == 0) continue;
    bool ok = true;
    for (unsigned l = 0; l < 3 && ok; ++l)
      if (fp.sub(X1, fp.mul(E.zeta_pow(l), X2)) == 0) ok = false;
    for (unsigned r = 0; r < 3 && ok; ++r)
      if (fp.sub(Y1, fp.mul(E.zeta_pow(r), Y2)) == 0) ok = false;
    std::uint32_t cross = fp.sub(fp.mul(Y1, X2), fp.mul(X1, Y2));
    std::uint32_t prod = fp.sub(fp.mul(X1, Y1), fp.mul(X2, Y2));
    if (!ok || cross == 0 || prod == 0) continue;

    std::uint32_t A = fp.sub(X1, X2);                            // P scalar, l = 0
    std::uint32_t B = fp.sub(Y1, Y2);                            // Q scalar, r = 0
    std::uint32_t Cp = fp.sub(fp.mul(zeta, X1), fp.mul(zeta2, X2));   // zeta * (P scalar l=1)
    std::uint32_t C = fp.sub(fp.mul(zeta2, X1), fp.mul(zeta, X2));    // zeta^2 * (P scalar l=2)
    std::uint32_t D = fp.sub(fp.mul(zeta, Y1), fp.mul(zeta2, Y2));    // zeta * (Q scalar r=1)
    std::uint32_t Dp = fp.sub(fp.mul(zeta2, Y1), fp.mul(zeta, Y2));   // zeta^2 * (Q scalar r=2)
    std::uint32_t two_zeta_one = fp.add(fp.add(zeta, zeta), one);
    std::uint32_t denom = fp.mul(two_zeta_one, cross);
    REQUIRE(denom != 0);
    std::uint32_t dinv = fp.inv(denom);

    Dense G12{0, one};
    Dense G21{fp.neg(one), one};
    Dense G11 = dscale(
        fp, dsub(fp, dscale(fp, G12, fp.mul(A, Dp)), dscale(fp, G21, fp.mul(B, C))),
        dinv);
    Dense G22 = dscale(
        fp, dsub(fp, dscale(fp, G12, fp.mul(B, Cp)), dscale(fp, G21, fp.mul(A, D))),
        dinv);
    REQUIRE(G11.size() == 2);
    REQUIRE(G22.size() == 2);
    REQUIRE(G11.back() == one);
    REQUIRE(G22.back() == one);
    Dense G00 = dscale(
        fp,
        dadd(fp, dscale(fp, dmul(fp, G11, G12), Cp), dscale(fp, dmul(fp, G21, G22), C)),
        fp.neg(fp.inv(A)));
    REQUIRE(G00.size() == 3);
    REQUIRE(G00.back() == one);

    // both defining identities must hold exactly
    Dense eq1 = dadd(fp, dscale(fp, G00, A),
                     dadd(fp, dscale(fp, dmul(fp, G11, G12), Cp),
                          dscale(fp, dmul(fp, G21, G22), C)));
    Dense eq2 = dadd(fp, dscale(fp, G00, B),
                     dadd(fp, dscale(fp, dmul(fp, G11, G21), D),
                          dscale(fp, dmul(fp, G12, G22), Dp)));
    REQUIRE(eq1.empty());
    REQUIRE(eq2.empty());

    ClosedForm cf;
    cf.p1 = p1;
    cf.p2 = p2;
    cf.G00 = G00;
    cf.G11 = G11;
    cf.G12 = G12;
    cf.G21 = G21;
    cf.G22 = G22;
    cf.coeff_vals = {G00[1], G11[0], G12[0], G21[0], G22[0], G00[0]};
    return cf;
  }
  FAIL("could not sample a generic point pair");
  return {};
}

// Reconstruct dense P_i, Q_i from dense factors via the two lowest pair
// equations on each side (independent re-derivation of the same algebra).
struct DensePQ {
  Dense P1, P2, Q1, Q2;
};

DensePQ dense_reconstruct(const CurveCtx& E, const ClosedForm& cf) {
  const FpCtx& fp = E.field();
  std::uint32_t X1 = cf.p1.x, Y1 = cf.p1.y, X2 = cf.p2.x, Y2 = cf.p2.y;
  auto rowP = [&](unsigned l) {
    Dense prod{fp.one()};
    const Dense* g[3][3] = {{&cf.G00, nullptr, nullptr},
                            {nullptr, &cf.G11, &cf.G12},
                            {nullptr, &cf.G21, &cf.G22}};
    for (unsigned r = 0; r < 3; ++r)
      if (g[l][r]) prod = dmul(fp, prod, *g[l][r]);
    return dscale(fp, prod, fp.sub(X1, fp.mul(E.zeta_pow(l), X2)));
  };
  auto rowQ = [&](unsigned r) {
    Dense prod{fp.one()};
    const Dense* g[3][3] = {{&cf.G00, nullptr, nullptr},
                            {nullptr, &cf.G11, &cf.G12},
                            {nullptr, &cf.G21, &cf.G22}};
    for (unsigned l = 0; l < 3; ++l)
      if (g[l][r]) prod = dmul(fp, prod, *g[l][r]);
    return dscale(fp, prod, fp.sub(Y1, fp.mul(E.zeta_pow(r), Y2)));
  };
  std::uint32_t winv = fp.inv(fp.sub(E.zeta_pow(1), fp.one()));
  DensePQ pq;
  pq.P2 = dscale(fp, dsub(fp, rowP(0), rowP(1)), winv);
  pq.P1 = dadd(fp, rowP(0), pq.P2);
  pq.Q2 = dscale(fp, dsub(fp, rowQ(0), rowQ(1)), winv);
  pq.Q1 = dadd(fp, rowQ(0), pq.Q2);
  REQUIRE(pq.P1.size() == 3);
  REQUIRE(pq.P1.back() == X1);
  REQUIRE(pq.P2.back() == X2);
  REQUIRE(pq.Q1.back() == Y1);
  REQUIRE(pq.Q2.back() == Y2);
  return pq;
}

std::vector<std::uint32_t> zero_padded(const GaugedVariables& gv,
                                       std::vector<std::uint32_t> coeff_vals) {
  coeff_vals.resize(gv.specs.size(), 0);
  return coeff_vals;
}

}  // namespace

// ===========================================================================

TEST_CASE("model validation accepts the catalogued shapes", "[builder]") {
  REQUIRE_NOTHROW(model_333_H3());
  REQUIRE_NOTHROW(model_244_H2());
  REQUIRE_NOTHROW(model_244_diag64());
  REQUIRE_NOTHROW(model_236_H144());
  REQUIRE_NOTHROW(model_236_H13824());

  CurveModel good = model_333_H3();
  REQUIRE(good.n == 2);
  REQUIRE(good.k == 2);

  SECTION("mismatched off-diagonal entry is rejected") {
    CurveCase cse = make_case(3, 3, 3);
    HForm H = make_hform(3, 2,
                         {CycInt{2, 0}, CycInt{0, 0}, CycInt{0, 0}, CycInt{2, 0}});
    std::map<std::pair<unsigned, unsigned>, MDeg> M;
    M[{0, 1}] = good.M.at({0, 1});  // its h is -1, not 0
    REQUIRE_THROWS_AS(make_model(cse, H, std::move(M)), invalid_argument_error);
  }
  SECTION("wrong diagonal is rejected") {
    CurveCase cse = make_case(3, 3, 3);
    HForm H = make_hform(3, 2,
                         {CycInt{4, 0}, CycInt{-1, 0}, CycInt{-1, 0}, CycInt{4, 0}});
    std::map<std::pair<unsigned, unsigned>, MDeg> M;
    M[{0, 1}] = good.M.at({0, 1});
    REQUIRE_THROWS_AS(make_model(cse, H, std::move(M)), invalid_argument_error);
  }
  SECTION("missing pair entry is rejected") {
    CurveModel big = model_236_H144();
    std::map<std::pair<unsigned, unsigned>, MDeg> M = big.M;
    M.erase({0, 3});
    REQUIRE_THROWS_AS(make_model(big.cse, big.H, std::move(M)),
                      invalid_argument_error);
  }
  SECTION("degree matrix from the wrong curve family is rejected") {
    CurveModel h2 = model_244_H2();
    CurveCase cse = make_case(3, 3, 3);
    HForm H = make_hform(3, 2,
                         {CycInt{2, 0}, CycInt{-1, 0}, CycInt{-1, 0}, CycInt{2, 0}});
    std::map<std::pair<unsigned, unsigned>, MDeg> M;
    M[{0, 1}] = h2.M.at({0, 1});
    REQUIRE_THROWS_AS(make_model(cse, H, std::move(M)), invalid_argument_error);
  }
  SECTION("group order must divide the unit count") {
    CurveCase cse = make_case(2, 3, 6);
    // n = 3 would need k = 2/(6-3), not an integer
    CycInt d{12, 0}, z{0, 0};
    HForm H = make_hform(6, 3, {d, z, z, z, d, z, z, z, d});
    std::map<std::pair<unsigned, unsigned>, MDeg> M;
    REQUIRE_THROWS_AS(make_model(cse, H, std::move(M)), nonintegral_k_error);
  }
}

TEST_CASE("variable allocation is ordered by weight, host degree, slot",
          "[builder]") {
  SECTION("two-point cubic model: exact layout") {
    CurveModel m = model_333_H3();
    GaugedVariables gv = allocate_variables(m);
    REQUIRE(gv.coeff_count == 6);
    REQUIRE(gv.free_count() == 5);
    // order: weight 1 host 2, then weight-1 linear hosts by (l, r), then weight 2
    struct Want {
      unsigned l, r, index, host;
    };
    std::vector<Want> want = {{0, 0, 1, 2}, {1, 1, 1, 1}, {1, 2, 1, 1},
                              {2, 1, 1, 1}, {2, 2, 1, 1}, {0, 0, 2, 2}};
    for (std::size_t v = 0; v < want.size(); ++v) {
      const VarSpec& s = gv.specs[v];
      REQUIRE(s.prov.kind == VarProvenance::Kind::g_coefficient);
      REQUIRE(s.prov.i == 0);
      REQUIRE(s.prov.j == 1);
      REQUIRE(s.prov.l == want[v].l);
      REQUIRE(s.prov.r == want[v].r);
      REQUIRE(s.prov.index == want[v].index);
      REQUIRE(s.weight == want[v].index);
      REQUIRE(gv.host_degree[v] == want[v].host);
      REQUIRE(gv.coeff_var(0, 1, want[v].l, want[v].r, want[v].index) == v);
    }
    // free variables after the gauge: host degrees 2,1,1,1,1
    std::vector<unsigned> free_hosts(gv.host_degree.begin() + 1,
                                     gv.host_degree.end());
    std::sort(free_hosts.begin(), free_hosts.end(), std::greater<>());
    REQUIRE(free_hosts == std::vector<unsigned>{2, 1, 1, 1, 1});
    REQUIRE(gv.gg_slots.size() == 6);
    REQUIRE(gv.specs.size() == 6 + 6 + 2);
    REQUIRE(gv.pq_offset == 12);
  }

  SECTION("two-point quartic model: exact layout") {
    CurveModel m = model_244_H2();
    GaugedVariables gv = allocate_variables(m);
    REQUIRE(gv.coeff_count == 4);
    std::vector<std::pair<unsigned, unsigned>> lr = {{0, 0}, {0, 1}, {1, 2}, {1, 3}};
    for (std::size_t v = 0; v < lr.size(); ++v) {
      REQUIRE(gv.specs[v].prov.l == lr[v].first);
      REQUIRE(gv.specs[v].prov.r == lr[v].second);
      REQUIRE(gv.specs[v].prov.index == 1);
      REQUIRE(gv.host_degree[v] == 1);
    }
    REQUIRE(gv.gg_slots.size() == 4);
    REQUIRE(gv.specs.size() == 4 + 4 + 2);
  }

  SECTION("four-point model: weight/host histogram") {
    CurveModel m = model_236_H144();
    GaugedVariables gv = allocate_variables(m);
    REQUIRE(gv.coeff_count == 36);
    REQUIRE(gv.free_count() == 35);
    std::map<std::pair<unsigned, unsigned>, unsigned> hist;  // (weight, host) -> count
    for (std::size_t v = 0; v < gv.coeff_count; ++v)
      ++hist[{gv.specs[v].weight, gv.host_degree[v]}];
    REQUIRE(hist[{1, 2}] == 6);
    REQUIRE(hist[{1, 1}] == 24);
    REQUIRE(hist[{2, 2}] == 6);
    REQUIRE(hist.size() == 3);
    // weight blocks are contiguous and ascending; host degree descends inside
    for (std::size_t v = 0; v + 1 < gv.coeff_count; ++v) {
      REQUIRE(gv.specs[v].weight <= gv.specs[v + 1].weight);
      if (gv.specs[v].weight == gv.specs[v + 1].weight)
        REQUIRE(gv.host_degree[v] >= gv.host_degree[v + 1]);
    }
    REQUIRE(gv.gg_slots.size() == 27);
    REQUIRE(gv.specs.size() == 36 + 27 + 4);
  }

  SECTION("five-point model: published weight multiplicities") {
    CurveModel m = model_236_H13824();
    GaugedVariables gv = allocate_variables(m);
    REQUIRE(gv.coeff_count == 120);
    std::map<unsigned, unsigned> wcount;
    for (std::size_t v = 0; v < gv.coeff_count; ++v) ++wcount[gv.specs[v].weight];
    REQUIRE(wcount[1] == 42);
    REQUIRE(wcount[2] == 38);
    REQUIRE(wcount[3] == 22);
    REQUIRE(wcount[4] == 18);
    REQUIRE(gv.gg_slots.size() == 32);
    REQUIRE(gv.specs.size() == 120 + 32 + 5);
    REQUIRE(gv.specs.size() <= PolyRing::max_vars);
  }
}

TEST_CASE("coprimality slot enumeration follows the degree matrix", "[builder]") {
  SECTION("chain pair of the four-point model") {
    CurveModel m = model_236_H144();
    GaugedVariables gv = allocate_variables(m);
    std::vector<std::array<unsigned, 4>> got;
    for (const GGSlot& s : gv.gg_slots)
      if (s.i == 0 && s.j == 1) got.push_back({s.l, s.r, s.l2, s.r2});
    std::vector<std::array<unsigned, 4>> want = {
        {0, 0, 1, 1}, {0, 0, 1, 2}, {0, 1, 1, 2}};
    REQUIRE(got == want);
  }
  SECTION("cubic model slots") {
    CurveModel m = model_333_H3();
    GaugedVariables gv = allocate_variables(m);
    std::vector<std::array<unsigned, 4>> got;
    for (const GGSlot& s : gv.gg_slots) got.push_back({s.l, s.r, s.l2, s.r2});
    std::vector<std::array<unsigned, 4>> want = {{0, 0, 1, 1}, {0, 0, 1, 2},
                                                 {0, 0, 2, 1}, {0, 0, 2, 2},
                                                 {1, 1, 2, 2}, {1, 2, 2, 1}};
    REQUIRE(got == want);
    for (std::size_t t = 0; t < gv.gg_slots.size(); ++t)
      REQUIRE(gv.gg_slots[t].var == gv.coeff_count + t);
  }
  SECTION("five-point model per-pair counts") {
    CurveModel m = model_236_H13824();
    GaugedVariables gv = allocate_variables(m);
    std::map<std::pair<unsigned, unsigned>, unsigned> per_pair;
    for (const GGSlot& s : gv.gg_slots) ++per_pair[{s.i, s.j}];
    for (unsigned i = 0; i < 5; ++i)
      for (unsigned j = i + 1; j < 5; ++j) {
        bool typeB = (j == 4 && (i == 2 || i == 3));
        REQUIRE(per_pair[{i, j}] == (typeB ? 4u : 3u));
      }
  }
}

TEST_CASE("elimination produces the null-space generator counts", "[builder]") {
  Rng rng(20260815);

  SECTION("two points, cubic case") {
    CurveCtx E(make_case(3, 3, 3), 1000003);
    CurveModel m = model_333_H3();
    GaugedVariables gv = allocate_variables(m);
    PolyRing R(E.field().p(), gv.specs);
    std::vector<CurvePoint> pts{E.sample_point(rng), E.sample_point(rng)};
    auto gens = eliminate_PQ(E, m, R, gv, pts);
    REQUIRE(gens.size() == 4);  // (3-2) P-combos x deg2 + (3-2) Q-combos x deg2
    for (const MPoly& g : gens) {
      REQUIRE(!g.is_zero());
      // no auxiliary variable appears in elimination generators
      for (std::size_t t = 0; t < g.term_count(); ++t) {
        auto e = g.exp(t);
        for (std::size_t v = gv.coeff_count; v < e.size(); ++v) REQUIRE(e[v] == 0);
      }
    }
  }

  SECTION("two points, quartic case: P side drops out") {
    CurveCtx E(make_case(2, 4, 4), 1000033);
    CurveModel m = model_244_H2();
    GaugedVariables gv = allocate_variables(m);
    PolyRing R(E.field().p(), gv.specs);
    std::vector<CurvePoint> pts{E.sample_point(rng), E.sample_point(rng)};
    auto gens = eliminate_PQ(E, m, R, gv, pts);
    REQUIRE(gens.size() == 2);  // P rows full rank; Q null space dim 2, deg 1
  }

  SECTION("three points: cross-pair combinations appear") {
    CurveCtx E(make_case(2, 4, 4), 1000033);
    CurveModel m = model_244_diag64();
    GaugedVariables gv = allocate_variables(m);
    PolyRing R(E.field().p(), gv.specs);
    std::vector<CurvePoint> pts{E.sample_point(rng), E.sample_point(rng),
                                E.sample_point(rng)};
    auto gens = eliminate_PQ(E, m, R, gv, pts);
    // P side: 6 rows rank 3 -> 3 combos of degree 4; per-pair rank is full,
    // so every combo mixes pairs.  Q side: 12 rows rank 3 -> 9 combos, deg 2.
    REQUIRE(gens.size() == 3 * 4 + 9 * 2);
  }

  SECTION("four-point model generator count") {
    CurveCtx E(make_case(2, 3, 6), 1000003);
    CurveModel m = model_236_H144();
    GaugedVariables gv = allocate_variables(m);
    PolyRing R(E.field().p(), gv.specs);
    std::vector<CurvePoint> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(E.sample_point(rng));
    auto gens = eliminate_PQ(E, m, R, gv, pts);
    REQUIRE(gens.size() == 8 * 3 + 14 * 2);
  }

  SECTION("degenerate point pair raises the resample signal") {
    CurveCtx E(make_case(3, 3, 3), 1000003);
    CurveModel m = model_333_H3();
    GaugedVariables gv = allocate_variables(m);
    PolyRing R(E.field().p(), gv.specs);
    CurvePoint p1 = E.sample_point(rng);
    // second point with x2 = zeta^2 x1 lies on the curve and collapses the
    // l = 1 scalar
    CurvePoint p2 = E.finite_point(E.field().mul(E.zeta_pow(2), p1.x), p1.y);
    REQUIRE(E.on_curve(p2));
    std::vector<CurvePoint> pts{p1, p2};
    REQUIRE_THROWS_AS(eliminate_PQ(E, m, R, gv, pts), degenerate_input_error);
    REQUIRE_THROWS_AS(reconstruct_PQ(E, m, R, gv, pts), degenerate_input_error);
  }
}

TEST_CASE("generator vanishing matches dense linear-system consistency",
          "[builder]") {
  // Independent oracle: the generators vanish at a coefficient assignment
  // exactly when the dense linear system for the P_i / Q_i coefficient
  // vectors (unknowns stacked per power of u) is consistent.
  Rng rng(77001);
  CurveCtx E(make_case(3, 3, 3), 1000003);
  const FpCtx& fp = E.field();
  CurveModel m = model_333_H3();
  GaugedVariables gv = allocate_variables(m);
  PolyRing R(E.field().p(), gv.specs);

  ClosedForm cf = closed_form_curve(E, rng);
  std::vector<CurvePoint> pts{cf.p1, cf.p2};
  auto gens = eliminate_PQ(E, m, R, gv, pts);

  auto dense_G = [&](const std::vector<std::uint32_t>& vals, unsigned l,
                     unsigned r) {
    unsigned deg = m.M.at({0, 1}).at(l, r);
    Dense g(deg + 1);
    g[deg] = fp.one();
    for (unsigned idx = 1; idx <= deg; ++idx)
      g[deg - idx] = vals[gv.coeff_var(0, 1, l, r, idx)];
    return g;
  };
  auto consistent = [&](const std::vector<std::uint32_t>& vals) {
    // unknowns: P1,P2 coefficients (3 each) then, separately, Q1,Q2
    bool ok = true;
    for (int side = 0; side < 2; ++side) {
      std::size_t deg = 2;
      std::size_t ncols = 2 * (deg + 1);
      std::vector<Dense> rows, aug;
      for (unsigned e = 0; e < 3; ++e) {
        std::uint32_t om = E.zeta_pow(e);
        std::uint32_t s = side == 0 ? fp.sub(cf.p1.x, fp.mul(om, cf.p2.x))
                                    : fp.sub(cf.p1.y, fp.mul(om, cf.p2.y));
        Dense prod{fp.one()};
        for (unsigned o = 0; o < 3; ++o) {
          unsigned l = side == 0 ? e : o, r = side == 0 ? o : e;
          if (m.M.at({0, 1}).at(l, r)) prod = dmul(fp, prod, dense_G(vals, l, r));
        }
        Dense rhs = dscale(fp, prod, s);
        rhs.resize(deg + 1, 0);
        for (std::size_t t = 0; t <= deg; ++t) {
          Dense row(ncols, 0), rowa(ncols + 1, 0);
          row[t] = fp.one();
          row[(deg + 1) + t] = fp.neg(om);
          std::copy(row.begin(), row.end(), rowa.begin());
          rowa[ncols] = rhs[t];
          rows.push_back(std::move(row));
          aug.push_back(std::move(rowa));
        }
      }
      ok = ok && field_rank(fp, rows) == field_rank(fp, aug);
    }
    return ok;
  };
  auto vanishes = [&](const std::vector<std::uint32_t>& vals) {
    for (const MPoly& g : gens)
      if (eval_mpoly(g, zero_padded(gv, vals)) != 0) return false;
    return true;
  };

  // the closed-form curve: consistent and vanishing
  REQUIRE(consistent(cf.coeff_vals));
  REQUIRE(vanishes(cf.coeff_vals));

  // perturbed curve: both sides must agree (and generically fail)
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<std::uint32_t> vals = cf.coeff_vals;
    vals[rng.below(vals.size())] =
        fp.to_mont(rng.below(E.field().p() - 1) + 1);
    REQUIRE(consistent(vals) == vanishes(vals));
  }
  // fully random assignments
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<std::uint32_t> vals(6);
    for (auto& v : vals) v = fp.to_mont(rng.below(E.field().p()));
    REQUIRE(consistent(vals) == vanishes(vals));
  }
}

TEST_CASE("closed-form curve annihilates every stage generator", "[builder]") {
  Rng rng(424242);
  CurveCtx E(make_case(3, 3, 3), 1000003);
  const FpCtx& fp = E.field();
  CurveModel m = model_333_H3();
  GaugedVariables gv = allocate_variables(m);
  PolyRing R(E.field().p(), gv.specs);

  ClosedForm cf = closed_form_curve(E, rng);
  std::vector<CurvePoint> pts{cf.p1, cf.p2};
  DensePQ pq = dense_reconstruct(E, cf);

  auto slot_dense = [&](unsigned l, unsigned r) -> const Dense& {
    if (l == 0) return cf.G00;
    if (l == 1) return r == 1 ? cf.G11 : cf.G12;
    return r == 1 ? cf.G21 : cf.G22;
  };

  std::vector<std::uint32_t> full = zero_padded(gv, cf.coeff_vals);
  // auxiliary values: pairwise factor resultants and P/Q resultants
  for (const GGSlot& s : gv.gg_slots) {
    std::uint32_t res =
        dense_resultant(fp, slot_dense(s.l, s.r), slot_dense(s.l2, s.r2));
    REQUIRE(res != 0);  // the hand construction guarantees coprime factors
    full[s.var] = fp.inv(res);
  }
  std::uint32_t res1 = dense_resultant(fp, pq.P1, pq.Q1);
  std::uint32_t res2 = dense_resultant(fp, pq.P2, pq.Q2);
  REQUIRE(res1 != 0);
  REQUIRE(res2 != 0);
  full[gv.pq_offset + 0] = fp.inv(res1);
  full[gv.pq_offset + 1] = fp.inv(res2);

  SECTION("elimination generators vanish; a perturbation does not") {
    auto gens = eliminate_PQ(E, m, R, gv, pts);
    for (const MPoly& g : gens) REQUIRE(eval_mpoly(g, full) == 0);
    auto bad = full;
    bad[1] = fp.add(bad[1], fp.one());
    bool all_zero = true;
    for (const MPoly& g : gens)
      if (eval_mpoly(g, bad) != 0) all_zero = false;
    REQUIRE(!all_zero);
  }

  SECTION("pairwise-coprimality generators vanish at the resultant inverses") {
    auto gens = inequality_generators_GG(m, R, gv);
    REQUIRE(gens.size() == gv.gg_slots.size());
    for (const MPoly& g : gens) REQUIRE(eval_mpoly(g, full) == 0);
    // wrong witness value breaks exactly the slot it belongs to
    auto bad = full;
    bad[gv.gg_slots[2].var] = fp.add(bad[gv.gg_slots[2].var], fp.one());
    REQUIRE(eval_mpoly(gens[2], bad) != 0);
    REQUIRE(eval_mpoly(gens[3], bad) == 0);
  }

  SECTION("coordinate-resultant generators vanish at the resultant inverses") {
    auto gens = inequality_generators_PQ(E, m, R, gv, pts);
    REQUIRE(gens.size() == 2);
    for (const MPoly& g : gens) REQUIRE(eval_mpoly(g, full) == 0);
    auto bad = full;
    bad[gv.pq_offset] = fp.add(bad[gv.pq_offset], fp.one());
    REQUIRE(eval_mpoly(gens[0], bad) != 0);
  }

  SECTION("symbolic resultant of a slot matches the dense Sylvester oracle") {
    auto gens = inequality_generators_GG(m, R, gv);
    for (std::size_t t = 0; t < gens.size(); ++t) {
      const GGSlot& s = gv.gg_slots[t];
      // gen = A * res - 1, A enters linearly: eval at A = 1 and add 1
      auto probe = zero_padded(gv, cf.coeff_vals);
      probe[s.var] = fp.one();
      std::uint32_t sym = fp.add(eval_mpoly(gens[t], probe), fp.one());
      std::uint32_t oracle =
          dense_resultant(fp, slot_dense(s.l, s.r), slot_dense(s.l2, s.r2));
      REQUIRE(fp.from_mont(sym) == fp.from_mont(oracle));
    }
    // and at random coefficient assignments
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<std::uint32_t> vals(6);
      for (auto& v : vals) v = fp.to_mont(rng.below(E.field().p()));
      auto dense_G = [&](unsigned l, unsigned r) {
        unsigned deg = m.M.at({0, 1}).at(l, r);
        Dense g(deg + 1);
        g[deg] = fp.one();
        for (unsigned idx = 1; idx <= deg; ++idx)
          g[deg - idx] = vals[gv.coeff_var(0, 1, l, r, idx)];
        return g;
      };
      for (std::size_t t = 0; t < gens.size(); ++t) {
        const GGSlot& s = gv.gg_slots[t];
        auto probe = zero_padded(gv, vals);
        probe[s.var] = fp.one();
        std::uint32_t sym = fp.add(eval_mpoly(gens[t], probe), fp.one());
        std::uint32_t oracle =
            dense_resultant(fp, dense_G(s.l, s.r), dense_G(s.l2, s.r2));
        REQUIRE(fp.from_mont(sym) == fp.from_mont(oracle));
      }
    }
  }

  SECTION("symbolic reconstruction evaluates to the dense curve") {
    ReconstructedPQ rec = reconstruct_PQ(E, m, R, gv, pts);
    REQUIRE(rec.P.size() == 2);
    REQUIRE(rec.Q.size() == 2);
    REQUIRE(rec.P[0].size() == 3);
    REQUIRE(rec.Q[0].size() == 3);
    // normalized tops, symbolically constant
    REQUIRE(rec.P[0].back() == MPoly::constant(R, cf.p1.x));
    REQUIRE(rec.P[1].back() == MPoly::constant(R, cf.p2.x));
    REQUIRE(rec.Q[0].back() == MPoly::constant(R, cf.p1.y));
    REQUIRE(rec.Q[1].back() == MPoly::constant(R, cf.p2.y));
    REQUIRE(dtrim(eval_coeffs(rec.P[0], full)) == pq.P1);
    REQUIRE(dtrim(eval_coeffs(rec.P[1], full)) == pq.P2);
    REQUIRE(dtrim(eval_coeffs(rec.Q[0], full)) == pq.Q1);
    REQUIRE(dtrim(eval_coeffs(rec.Q[1], full)) == pq.Q2);

    // every remaining pair equation holds densely, and the degree-6 curve
    // relation P^3 - Q^3 agrees between the two points
    auto cube = [&](const Dense& f) { return dmul(fp, dmul(fp, f, f), f); };
    Dense lhs = dsub(fp, cube(pq.P1), cube(pq.Q1));
    Dense rhs = dsub(fp, cube(pq.P2), cube(pq.Q2));
    REQUIRE(lhs == rhs);
    for (unsigned l = 0; l < 3; ++l) {
      Dense diff = dsub(fp, pq.P1, dscale(fp, pq.P2, E.zeta_pow(l)));
      Dense prod{fp.one()};
      if (l == 0) prod = cf.G00;
      if (l == 1) prod = dmul(fp, cf.G11, cf.G12);
      if (l == 2) prod = dmul(fp, cf.G21, cf.G22);
      std::uint32_t s = fp.sub(cf.p1.x, fp.mul(E.zeta_pow(l), cf.p2.x));
      REQUIRE(diff == dscale(fp, prod, s));
    }
    for (unsigned r = 0; r < 3; ++r) {
      Dense diff = dsub(fp, pq.Q1, dscale(fp, pq.Q2, E.zeta_pow(r)));
      Dense prod{fp.one()};
      if (r == 0) prod = cf.G00;
      if (r == 1) prod = dmul(fp, cf.G11, cf.G21);
      if (r == 2) prod = dmul(fp, cf.G12, cf.G22);
      std::uint32_t s = fp.sub(cf.p1.y, fp.mul(E.zeta_pow(r), cf.p2.y));
      REQUIRE(diff == dscale(fp, prod, s));
    }
  }

  SECTION("unused pair equations lie in the elimination ideal") {
    ReconstructedPQ rec = reconstruct_PQ(E, m, R, gv, pts);
    Ideal I(R, eliminate_PQ(E, m, R, gv, pts));
    I = groebner_basis(I);
    // residual of the l = 2 equation: P1 - zeta^2 P2 - s * G21*G22
    // symbolically, coefficient by coefficient
    std::vector<MPoly> g21 = {MPoly::variable(R, gv.coeff_var(0, 1, 2, 1, 1)),
                              MPoly::constant(R, fp.one())};
    std::vector<MPoly> g22 = {MPoly::variable(R, gv.coeff_var(0, 1, 2, 2, 1)),
                              MPoly::constant(R, fp.one())};
    std::uint32_t s = fp.sub(cf.p1.x, fp.mul(E.zeta_pow(2), cf.p2.x));
    std::vector<MPoly> prod(3, MPoly::zero(R));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        prod[i + j] = add(prod[i + j], mul(g21[i], g22[j]));
    for (int t = 0; t < 3; ++t) {
      MPoly residual = sub(sub(rec.P[0][t], scale(rec.P[1][t], E.zeta_pow(2))),
                           scale(prod[t], s));
      REQUIRE(normal_form(residual, I).is_zero());
    }
  }
}

TEST_CASE("cell substitution fixes the leading coordinates", "[builder]") {
  Rng rng(5150);
  CurveCtx E(make_case(3, 3, 3), 1000003);
  CurveModel m = model_333_H3();
  GaugedVariables gv = allocate_variables(m);
  PolyRing R(E.field().p(), gv.specs);
  std::vector<CurvePoint> pts{E.sample_point(rng), E.sample_point(rng)};

  for (std::size_t r : {std::size_t{1}, std::size_t{3}}) {
    Cell cell{r};
    auto plain = eliminate_PQ(E, m, R, gv, pts);
    auto in_cell = eliminate_PQ(E, m, R, gv, pts, cell);
    REQUIRE(plain.size() == in_cell.size());
    for (std::size_t i = 0; i < plain.size(); ++i) {
      MPoly f = plain[i];
      for (std::size_t v = 0; v < r; ++v) f = substitute_const(f, v, 0);
      f = substitute_const(f, r, E.field().one());
      REQUIRE(f == in_cell[i]);
      REQUIRE(cell_substitute(plain[i], gv, cell) == f);
    }
    auto gg_plain = inequality_generators_GG(m, R, gv);
    auto gg_cell = inequality_generators_GG(m, R, gv, cell);
    for (std::size_t i = 0; i < gg_plain.size(); ++i)
      REQUIRE(cell_substitute(gg_plain[i], gv, cell) == gg_cell[i]);
  }
}

TEST_CASE("sylvester helper matches the library resultant convention",
          "[builder]") {
  std::vector<VarSpec> specs;
  for (std::size_t i = 0; i < 3; ++i) specs.push_back(VarSpec::aux(i));
  PolyRing R(7, specs);  // variables u, a, b
  const FpCtx& fp = R.fp();
  MPoly u = MPoly::variable(R, 0), a = MPoly::variable(R, 1),
        b = MPoly::variable(R, 2);

  // ascending coefficient vectors for u - a and u - b
  std::vector<MPoly> A = {neg(a), MPoly::constant(R, fp.one())};
  std::vector<MPoly> B = {neg(b), MPoly::constant(R, fp.one())};
  auto syl = sylvester_matrix(R, A, B);
  REQUIRE(syl.size() == 2);
  MPoly det = detail::bareiss_det(R, syl);
  REQUIRE(det == sub(b, a));
  REQUIRE(det == resultant(sub(u, a), sub(u, b), 0));
}

TEST_CASE("determinant reduces correctly modulo an ideal", "[builder]") {
  Rng rng(99);
  std::vector<VarSpec> specs;
  for (std::size_t i = 0; i < 3; ++i) specs.push_back(VarSpec::aux(i));
  PolyRing R(7, specs);
  const FpCtx& fp = R.fp();

  std::vector<MPoly> gens = {
      sub(mul(MPoly::variable(R, 0), MPoly::variable(R, 0)),
          MPoly::constant_int(R, 1)),
      sub(MPoly::variable(R, 1), MPoly::constant_int(R, 2))};
  Ideal I(R, gens);
  I = groebner_basis(I);

  auto random_poly = [&]() {
    std::vector<std::pair<std::vector<std::uint8_t>, std::uint32_t>> ts;
    for (int t = 0; t < 3; ++t) {
      std::vector<std::uint8_t> e(3, 0);
      e[rng.below(3)] = (std::uint8_t)rng.below(3);
      std::uint32_t c = fp.to_mont(rng.below(7));
      ts.emplace_back(std::move(e), c);
    }
    return MPoly::from_terms(R, std::move(ts));
  };

  for (int trial = 0; trial < 6; ++trial) {
    std::size_t k = trial < 4 ? 3 : 4;
    std::vector<std::vector<MPoly>> mat(k, std::vector<MPoly>(k, MPoly::zero(R)));
    for (auto& row : mat)
      for (auto& e : row) e = random_poly();
    auto copy = mat;
    MPoly direct = normal_form(detail::bareiss_det(R, copy), I);
    MPoly reduced = determinant_modulo(R, mat, I);
    REQUIRE(direct == reduced);
  }
}

TEST_CASE("staged cell ideals isolate the unique curve", "[builder]") {
  Rng rng(31415);
  CurveCtx E(make_case(3, 3, 3), 1000003);
  const FpCtx& fp = E.field();
  CurveModel m = model_333_H3();
  GaugedVariables gv = allocate_variables(m);
  PolyRing R(E.field().p(), gv.specs);

  // sample a closed form whose translated representative lands in the top
  // cell (first free coefficient nonzero after centering the quadratic)
  ClosedForm cf;
  std::uint32_t tshift = 0, alpha = 0;
  for (;;) {
    cf = closed_form_curve(E, rng);
    // translate u -> u + t with t = -g00_1 / 2, killing the gauge variable
    tshift = fp.mul(fp.neg(cf.coeff_vals[0]), fp.inv(fp.to_mont(2)));
    alpha = fp.add(cf.coeff_vals[1], tshift);  // new G11 constant coefficient
    if (alpha != 0) break;
  }
  auto shifted = [&](const Dense& f) { return dshift(fp, f, tshift); };
  Dense G00 = shifted(cf.G00), G11 = shifted(cf.G11), G12 = shifted(cf.G12),
        G21 = shifted(cf.G21), G22 = shifted(cf.G22);
  REQUIRE(G00[1] == 0);
  // rescale u -> alpha * u: coefficient of index w picks alpha^{-w}
  std::uint32_t ai = fp.inv(alpha);
  std::vector<std::uint32_t> vals = {
      0,
      fp.one(),
      fp.mul(G12[0], ai),
      fp.mul(G21[0], ai),
      fp.mul(G22[0], ai),
      fp.mul(G00[0], fp.mul(ai, ai)),
  };
  Dense sG00 = {vals[5], 0, fp.one()};
  Dense sG11 = {vals[1], fp.one()};
  Dense sG12 = {vals[2], fp.one()};
  Dense sG21 = {vals[3], fp.one()};
  Dense sG22 = {vals[4], fp.one()};
  ClosedForm scf = cf;
  scf.G00 = sG00;
  scf.G11 = sG11;
  scf.G12 = sG12;
  scf.G21 = sG21;
  scf.G22 = sG22;
  DensePQ pq = dense_reconstruct(E, scf);

  std::vector<std::uint32_t> full = zero_padded(gv, vals);
  auto slot_dense = [&](unsigned l, unsigned r) -> const Dense& {
    if (l == 0) return sG00;
    if (l == 1) return r == 1 ? sG11 : sG12;
    return r == 1 ? sG21 : sG22;
  };
  for (const GGSlot& s : gv.gg_slots) {
    std::uint32_t res =
        dense_resultant(fp, slot_dense(s.l, s.r), slot_dense(s.l2, s.r2));
    REQUIRE(res != 0);
    full[s.var] = fp.inv(res);
  }
  full[gv.pq_offset + 0] = fp.inv(dense_resultant(fp, pq.P1, pq.Q1));
  full[gv.pq_offset + 1] = fp.inv(dense_resultant(fp, pq.P2, pq.Q2));

  std::vector<CurvePoint> pts{cf.p1, cf.p2};

  SECTION("stage generators are cumulative and vanish at the curve") {
    Ideal I1 = build_cell_ideal(E, m, R, gv, pts, Cell{1}, 1);
    Ideal I2 = build_cell_ideal(E, m, R, gv, pts, Cell{1}, 2);
    Ideal I3 = build_cell_ideal(E, m, R, gv, pts, Cell{1}, 3);
    REQUIRE(I1.generators().size() < I2.generators().size());
    REQUIRE(I2.generators().size() < I3.generators().size());
    for (std::size_t i = 0; i < I2.generators().size(); ++i)
      REQUIRE(I2.generators()[i] == I3.generators()[i]);
    for (const MPoly& g : I3.generators()) REQUIRE(eval_mpoly(g, full) == 0);
  }

  SECTION("top cell carries the curve; the reduced basis pins every value") {
    Ideal I3 = build_cell_ideal(E, m, R, gv, pts, Cell{1}, 3);
    I3 = groebner_basis(I3);
    auto dim = quotient_dimension(I3);
    REQUIRE(dim.has_value());
    REQUIRE(*dim == 1);
    for (std::size_t v = 0; v < R.nvars(); ++v) {
      MPoly nf = normal_form(MPoly::variable(R, v), I3);
      REQUIRE(nf == MPoly::constant(R, full[v]));
    }
  }

  SECTION("staged extension equals the one-shot ideal") {
    Ideal staged = build_cell_ideal(E, m, R, gv, pts, Cell{1}, 1);
    staged = groebner_basis(staged);
    std::vector<MPoly> gg;
    for (MPoly g : inequality_generators_GG(m, R, gv, Cell{1})) gg.push_back(g);
    staged = extend(staged, gg);
    std::vector<MPoly> pqg;
    for (MPoly g : inequality_generators_PQ(E, m, R, gv, pts, Cell{1}))
      pqg.push_back(g);
    staged = extend(staged, pqg);

    Ideal oneshot = build_cell_ideal(E, m, R, gv, pts, Cell{1}, 3);
    oneshot = groebner_basis(oneshot);
    REQUIRE(staged.basis() == oneshot.basis());
  }

  SECTION("reduced-resultant path gives the same stage-3 ideal") {
    Ideal staged = build_cell_ideal(E, m, R, gv, pts, Cell{1}, 2);
    staged = groebner_basis(staged);
    ReconstructedPQ rec = reconstruct_PQ(E, m, R, gv, pts);
    std::vector<MPoly> pqg;
    for (unsigned i = 0; i < 2; ++i) {
      std::vector<MPoly> a, b;
      for (const MPoly& c : rec.P[i]) a.push_back(cell_substitute(c, gv, Cell{1}));
      for (const MPoly& c : rec.Q[i]) b.push_back(cell_substitute(c, gv, Cell{1}));
      auto syl = sylvester_matrix(R, a, b);
      MPoly res = determinant_modulo(R, std::move(syl), staged);
      pqg.push_back(sub(mul(MPoly::variable(R, gv.pq_offset + i), res),
                        MPoly::constant(R, fp.one())));
    }
    staged = extend(staged, pqg);

    Ideal oneshot = build_cell_ideal(E, m, R, gv, pts, Cell{1}, 3);
    oneshot = groebner_basis(oneshot);
    REQUIRE(staged.basis() == oneshot.basis());
  }

  SECTION("all other cells are empty at stage 3") {
    for (std::size_t r = 2; r <= 4; ++r) {
      Ideal I = build_cell_ideal(E, m, R, gv, pts, Cell{r}, 3);
      I = groebner_basis(I);
      auto dim = quotient_dimension(I);
      REQUIRE(dim.has_value());
      REQUIRE(*dim == 0);
    }
  }

  SECTION("last cell is inconsistent already at stage 1") {
    Ideal I = build_cell_ideal(E, m, R, gv, pts, Cell{5}, 1);
    I = groebner_basis(I);
    REQUIRE(is_trivial(I));
  }

  SECTION("per-cell dimensions aggregate to the expected curve count") {
    std::uint64_t total = 0;
    for (std::size_t r = 1; r < gv.coeff_count; ++r) {
      Ideal I = build_cell_ideal(E, m, R, gv, pts, Cell{r}, 3);
      I = groebner_basis(I);
      auto dim = quotient_dimension(I);
      REQUIRE(dim.has_value());
      unsigned w = gv.specs[r].weight;
      REQUIRE(*dim % w == 0);
      total += *dim / w;
    }
    REQUIRE(total == 1);
  }
}

TEST_CASE("two-anchor reconstructions generate the same ideal", "[builder]") {
  Rng rng(8088);
  CurveCtx E(make_case(3, 3, 3), 1000003);
  CurveModel m = model_333_H3();
  GaugedVariables gv = allocate_variables(m);
  PolyRing R(E.field().p(), gv.specs);
  std::vector<CurvePoint> pts{E.sample_point(rng), E.sample_point(rng)};

  // for n = 2 both anchors use the single pair: identical output
  ReconstructedPQ r0 = reconstruct_PQ(E, m, R, gv, pts, 0);
  ReconstructedPQ r1 = reconstruct_PQ(E, m, R, gv, pts, 1);
  for (unsigned i = 0; i < 2; ++i)
    for (std::size_t t = 0; t < 3; ++t) {
      REQUIRE(r0.P[i][t] == r1.P[i][t]);
      REQUIRE(r0.Q[i][t] == r1.Q[i][t]);
    }

  // three-point model: anchors give possibly different representatives whose
  // stage-3 ideals coincide
  CurveCtx E4(make_case(2, 4, 4), 1000033);
  CurveModel m3 = model_244_diag64();
  GaugedVariables gv3 = allocate_variables(m3);
  PolyRing R3(E4.field().p(), gv3.specs);
  std::vector<CurvePoint> pts3{E4.sample_point(rng), E4.sample_point(rng),
                               E4.sample_point(rng)};
  ReconstructedPQ a0 = reconstruct_PQ(E4, m3, R3, gv3, pts3, 0);
  ReconstructedPQ a2 = reconstruct_PQ(E4, m3, R3, gv3, pts3, 2);
  for (unsigned i = 0; i < 3; ++i) {
    REQUIRE(a0.P[i].back() == MPoly::constant(R3, pts3[i].x));
    REQUIRE(a2.P[i].back() == MPoly::constant(R3, pts3[i].x));
    REQUIRE(a0.Q[i].back() == MPoly::constant(R3, pts3[i].y));
    REQUIRE(a2.Q[i].back() == MPoly::constant(R3, pts3[i].y));
    REQUIRE(a0.P[i].size() == 5);
    REQUIRE(a0.Q[i].size() == 3);
  }
}

TEST_CASE("system dump is deterministic", "[builder]") {
  Rng rng(1221);
  CurveCtx E(make_case(3, 3, 3), 1000003);
  CurveModel m = model_333_H3();
  GaugedVariables gv = allocate_variables(m);
  PolyRing R(E.field().p(), gv.specs);
  std::vector<CurvePoint> pts{E.sample_point(rng), E.sample_point(rng)};

  std::string d1 = dump_system(E, m, R, gv, pts, Cell{1}, 2);
  std::string d2 = dump_system(E, m, R, gv, pts, Cell{1}, 2);
  REQUIRE(d1 == d2);
  std::string d3 = dump_system(E, m, R, gv, pts, Cell{2}, 2);
  REQUIRE(d1 != d3);
  REQUIRE(d1.find("cell 1") != std::string::npos);
  REQUIRE(d1.find("stage 2") != std::string::npos);
}
