#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "cyclotomic.hpp"
#include "errors.hpp"
#include "field.hpp"
#include "rng.hpp"

namespace curvecount {

// One of the three CM configurations (a,b,c) with 1/a + 1/b + 1/c = 1.
// The curve is x^a - y^b = z^c in the weighted projective plane
// P(c/a, c/b, 1); the cyclic group of order c acts by z -> zeta*z.
struct CurveCase {
  unsigned a = 0, b = 0, c = 0;
  friend bool operator==(const CurveCase&, const CurveCase&) = default;
};

inline CurveCase make_case(unsigned a, unsigned b, unsigned c) {
  CurveCase k{a, b, c};
  bool ok = (a == 3 && b == 3 && c == 3) || (a == 2 && b == 4 && c == 4) ||
            (a == 2 && b == 3 && c == 6);
  if (!ok) throw invalid_argument_error("curve case must be (3,3,3), (2,4,4) or (2,3,6)");
  return k;
}

// Point of E(GF(p)).  Finite points live in the chart z = 1 and satisfy
// x^a - y^b = 1; the gcd(a,b) points with z = 0 are enumerated by inf_index
// with index 0 the zero point (1,1,0).
struct CurvePoint {
  bool at_infinity = true;
  unsigned inf_index = 0;
  std::uint32_t x = 0, y = 0;  // Montgomery form; meaningful iff finite
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct DivisorSample {
  std::vector<CurvePoint> points;
  unsigned resamples = 0;
};

using PointFilter = std::function<bool(const std::vector<CurvePoint>&)>;

// Curve context: field, root of unity, group law (through a birational map
// to a short Weierstrass model Y^2 = X^3 + A X + B per case), CM action and
// sampling.  Read-only after construction.
class CurveCtx {
 public:
  CurveCtx(CurveCase cse, std::uint32_t p)
      : case_(make_case(cse.a, cse.b, cse.c)), fp_(p), dlog_(fp_),
        zeta_(primitive_root_of_unity(fp_, cse.c)) {
    zpow_.resize(case_.c);
    zpow_[0] = fp_.one();
    for (unsigned j = 1; j < case_.c; ++j) zpow_[j] = fp_.mul(zpow_[j - 1], zeta_);
    if (case_.c == 3) {
      wa_ = 0;
      wb_ = fp_.from_int(-432);
      inf1_y_ = embed({12, 24});  // Y-coordinate of the image of (1, zeta, 0)
    } else if (case_.c == 4) {
      wa_ = fp_.from_int(-4);
      wb_ = 0;
    } else {
      wa_ = 0;
      wb_ = fp_.one();
    }
  }

  const CurveCase& curve_case() const { return case_; }
  const FpCtx& field() const { return fp_; }
  std::uint32_t zeta() const { return zeta_; }
  std::uint32_t zeta_pow(unsigned j) const { return zpow_[j % case_.c]; }
  std::uint32_t embed(CycInt v) const { return cyc_embed(fp_, zeta_, v); }

  unsigned infinity_count() const { return std::gcd(case_.a, case_.b); }

  CurvePoint zero() const { return CurvePoint{}; }

  CurvePoint infinity_point(unsigned j) const {
    if (j >= infinity_count()) throw invalid_argument_error("no such infinity point");
    return CurvePoint{true, j, 0, 0};
  }

  CurvePoint finite_point(std::uint32_t x_mont, std::uint32_t y_mont) const {
    return CurvePoint{false, 0, x_mont, y_mont};
  }

  bool on_curve(const CurvePoint& P) const {
    if (P.at_infinity) return P.inf_index < infinity_count();
    return fp_.sub(fp_.pow(P.x, case_.a), fp_.pow(P.y, case_.b)) == fp_.one();
  }

  CurvePoint neg(const CurvePoint& P) const { return from_w(w_neg(to_w(P))); }

  CurvePoint add(const CurvePoint& P, const CurvePoint& Q) const {
    return from_w(w_add(to_w(P), to_w(Q)));
  }

  CurvePoint sub(const CurvePoint& P, const CurvePoint& Q) const {
    return add(P, neg(Q));
  }

  CurvePoint scalar_mul(std::int64_t m, const CurvePoint& P) const {
    WPoint base = to_w(P);
    if (m < 0) {
      base = w_neg(base);
      m = -m;
    }
    WPoint acc{true, 0, 0};
    while (m) {
      if (m & 1) acc = w_add(acc, base);
      base = w_add(base, base);
      m >>= 1;
    }
    return from_w(acc);
  }

  // Action of zeta^j: (x,y,z) -> (x,y,zeta*z)^j, i.e. in the chart z=1
  // (x,y) -> (zeta^{-j c/a} x, zeta^{-j c/b} y).  Fixes every z=0 point.
  CurvePoint cm_mul(unsigned j, const CurvePoint& P) const {
    if (P.at_infinity) return P;
    unsigned c = case_.c;
    j %= c;
    unsigned ex = (c - j * (c / case_.a) % c) % c;
    unsigned ey = (c - j * (c / case_.b) % c) % c;
    return CurvePoint{false, 0, fp_.mul(P.x, zpow_[ex]), fp_.mul(P.y, zpow_[ey])};
  }

  // (s + t*zeta) . P  =  s*P + t*(zeta . P)
  CurvePoint cyc_mul_point(CycInt v, const CurvePoint& P) const {
    return add(scalar_mul(v.s, P), scalar_mul(v.t, cm_mul(1, P)));
  }

  CurvePoint linear_combination(std::span<const CycInt> v,
                                std::span<const CurvePoint> pts) const {
    if (v.size() != pts.size()) throw invalid_argument_error("length mismatch");
    CurvePoint acc = zero();
    for (size_t i = 0; i < v.size(); ++i) acc = add(acc, cyc_mul_point(v[i], pts[i]));
    return acc;
  }

  // Uniform x until x^a - 1 has a b-th root, then a uniform root.
  CurvePoint sample_point(Rng& rng, unsigned max_attempts = 10000) const {
    for (unsigned att = 0; att < max_attempts; ++att) {
      std::uint32_t x = fp_.to_mont(rng.below(fp_.p()));
      std::uint32_t t = fp_.sub(fp_.pow(x, case_.a), fp_.one());
      auto roots = dlog_.kth_roots(t, case_.b);
      if (roots.empty()) continue;
      std::uint32_t y = roots[rng.below(roots.size())];
      CurvePoint P{false, 0, x, y};
      assert(on_curve(P));
      return P;
    }
    throw unsupported_prime_error("point sampling failed repeatedly");
  }

  // Random tuple (p_1..p_n) with sum v_i p_i = 0: all coordinates except the
  // last unit-coefficient one are free, that one is solved for.  Resamples
  // while the solved point is at infinity or `accept` rejects the tuple.
  DivisorSample sample_divisor_point(std::span<const CycInt> v, Rng& rng,
                                     const PointFilter& accept = {},
                                     unsigned max_attempts = 1000) const {
    size_t u = v.size();
    for (size_t i = 0; i < v.size(); ++i)
      if (cyc_is_unit(v[i], case_.c)) u = i;
    if (u == v.size())
      throw unsupported_divisor_error("divisor vector has no unit coordinate");
    CycInt uinv = cyc_conj(v[u], case_.c);  // inverse of a unit
    assert(cyc_mul(uinv, v[u], case_.c) == (CycInt{1, 0}));
    DivisorSample out;
    out.points.resize(v.size());
    for (unsigned att = 0; att < max_attempts; ++att) {
      CurvePoint s = zero();
      for (size_t i = 0; i < v.size(); ++i) {
        if (i == u) continue;
        out.points[i] = sample_point(rng);
        s = add(s, cyc_mul_point(v[i], out.points[i]));
      }
      out.points[u] = cyc_mul_point(uinv, neg(s));
      if (out.points[u].at_infinity || (accept && !accept(out.points))) {
        ++out.resamples;
        continue;
      }
      assert(linear_combination(v, out.points) == zero());
      return out;
    }
    throw degenerate_input_error("divisor sampling exhausted its retry budget");
  }

 private:
  struct WPoint {
    bool inf = true;
    std::uint32_t X = 0, Y = 0;
    friend bool operator==(const WPoint&, const WPoint&) = default;
  };

  WPoint w_neg(const WPoint& P) const {
    return P.inf ? P : WPoint{false, P.X, fp_.neg(P.Y)};
  }

  WPoint w_add(const WPoint& P, const WPoint& Q) const {
    if (P.inf) return Q;
    if (Q.inf) return P;
    const FpCtx& f = fp_;
    if (P.X == Q.X) {
      if (f.add(P.Y, Q.Y) == 0) return WPoint{true, 0, 0};
      // doubling
      std::uint32_t num = f.add(f.mul(f.from_int(3), f.sq(P.X)), wa_);
      std::uint32_t lam = f.mul(num, f.inv(f.add(P.Y, P.Y)));
      std::uint32_t X3 = f.sub(f.sq(lam), f.add(P.X, Q.X));
      return WPoint{false, X3, f.sub(f.mul(lam, f.sub(P.X, X3)), P.Y)};
    }
    std::uint32_t lam = f.mul(f.sub(Q.Y, P.Y), f.inv(f.sub(Q.X, P.X)));
    std::uint32_t X3 = f.sub(f.sq(lam), f.add(P.X, Q.X));
    return WPoint{false, X3, f.sub(f.mul(lam, f.sub(P.X, X3)), P.Y)};
  }

  // (3,3,3): X = 12 z/(x-y), Y = 36 (x+y)/(x-y)      on Y^2 = X^3 - 432
  // (2,4,4): X = 2 (x+y^2), Y = 4 y (x+y^2)          on Y^2 = X^3 - 4X
  // (2,3,6): X = y/z^2,     Y = x/z^3                on Y^2 = X^3 + 1
  WPoint to_w(const CurvePoint& P) const {
    const FpCtx& f = fp_;
    if (P.at_infinity) {
      if (P.inf_index == 0) return WPoint{true, 0, 0};
      if (case_.c == 3)
        return WPoint{false, 0, P.inf_index == 1 ? inf1_y_ : f.neg(inf1_y_)};
      return WPoint{false, 0, 0};  // (2,4,4): (-1,1,0) -> (0,0)
    }
    if (case_.c == 6) return WPoint{false, P.y, P.x};
    if (case_.c == 4) {
      std::uint32_t s = f.add(P.x, f.sq(P.y));
      assert(s != 0);  // x = -y^2 forces z = 0
      return WPoint{false, f.add(s, s), f.mul(f.from_int(4), f.mul(P.y, s))};
    }
    std::uint32_t d = f.sub(P.x, P.y);
    assert(d != 0);  // x = y forces z = 0
    std::uint32_t di = f.inv(d);
    return WPoint{false, f.mul(f.from_int(12), di),
                  f.mul(f.from_int(36), f.mul(f.add(P.x, P.y), di))};
  }

  CurvePoint from_w(const WPoint& W) const {
    const FpCtx& f = fp_;
    if (W.inf) return zero();
    if (case_.c == 6) return CurvePoint{false, 0, W.Y, W.X};
    if (case_.c == 4) {
      if (W.X == 0 && W.Y == 0) return CurvePoint{true, 1, 0, 0};
      std::uint32_t xi = f.inv(f.mul(f.from_int(4), W.X));
      std::uint32_t x = f.mul(f.add(f.sq(W.X), f.from_int(4)), xi);
      std::uint32_t y = f.mul(W.Y, f.add(xi, xi));
      return CurvePoint{false, 0, x, y};
    }
    if (W.X == 0) {
      assert(W.Y == inf1_y_ || W.Y == f.neg(inf1_y_));
      return CurvePoint{true, W.Y == inf1_y_ ? 1u : 2u, 0, 0};
    }
    std::uint32_t di = f.inv(f.mul(f.from_int(6), W.X));
    std::uint32_t c36 = f.from_int(36);
    return CurvePoint{false, 0, f.mul(f.add(W.Y, c36), di), f.mul(f.sub(W.Y, c36), di)};
  }

  CurveCase case_;
  FpCtx fp_;
  DlogCtx dlog_;
  std::uint32_t zeta_;
  std::vector<std::uint32_t> zpow_;
  std::uint32_t wa_ = 0, wb_ = 0, inf1_y_ = 0;
};

}  // namespace curvecount
