#pragma once

#include <cassert>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field.hpp"

namespace curvecount {

// Element s + t*zeta of Z[zeta_c] for zeta_c = exp(2*pi*i/c), c in {3, 4, 6}.
// The ring parameter c is passed alongside values (mirroring FpCtx style);
// {1, zeta} is a Z-basis in all three cases.
struct CycInt {
  std::int64_t s = 0;
  std::int64_t t = 0;
  friend bool operator==(const CycInt&, const CycInt&) = default;
};

inline void cyc_check_order(unsigned c) {
  if (c != 3 && c != 4 && c != 6)
    throw invalid_argument_error("cyclotomic order must be 3, 4 or 6");
}

// Lexicographic (s, t) order; used wherever a deterministic order is needed.
inline bool cyc_less(const CycInt& a, const CycInt& b) {
  return a.s != b.s ? a.s < b.s : a.t < b.t;
}

inline CycInt cyc_add(CycInt a, CycInt b) { return {a.s + b.s, a.t + b.t}; }
inline CycInt cyc_sub(CycInt a, CycInt b) { return {a.s - b.s, a.t - b.t}; }
inline CycInt cyc_neg(CycInt a) { return {-a.s, -a.t}; }
inline CycInt cyc_scale(std::int64_t m, CycInt a) { return {m * a.s, m * a.t}; }

// zeta^2 = e*zeta + f:  c=3: (-1,-1),  c=4: (0,-1),  c=6: (1,-1).
inline CycInt cyc_mul(CycInt a, CycInt b, unsigned c) {
  cyc_check_order(c);
  assert(std::llabs(a.s) < (1ll << 40) && std::llabs(a.t) < (1ll << 40) &&
         std::llabs(b.s) < (1ll << 40) && std::llabs(b.t) < (1ll << 40));
  std::int64_t e = c == 3 ? -1 : (c == 4 ? 0 : 1);
  std::int64_t tt = a.t * b.t;
  return {a.s * b.s - tt, a.s * b.t + a.t * b.s + e * tt};
}

inline CycInt cyc_conj(CycInt a, unsigned c) {
  cyc_check_order(c);
  switch (c) {
    case 3: return {a.s - a.t, -a.t};
    case 4: return {a.s, -a.t};
    default: return {a.s + a.t, -a.t};
  }
}

inline std::int64_t cyc_norm(CycInt a, unsigned c) {
  cyc_check_order(c);
  std::int64_t e = c == 3 ? -1 : (c == 4 ? 0 : 1);
  return a.s * a.s + e * a.s * a.t + a.t * a.t;
}

inline CycInt cyc_zeta_power(unsigned j, unsigned c) {
  cyc_check_order(c);
  CycInt r{1, 0};
  for (unsigned i = 0; i < j % c; ++i) r = cyc_mul(r, {0, 1}, c);
  return r;
}

inline bool cyc_is_unit(CycInt a, unsigned c) { return cyc_norm(a, c) == 1; }

// All units of Z[zeta_c]: the roots of unity mu_6 (c=3,6) or mu_4 (c=4).
inline std::vector<CycInt> cyc_units(unsigned c) {
  cyc_check_order(c);
  std::vector<CycInt> us;
  if (c == 4) {
    for (unsigned j = 0; j < 4; ++j) us.push_back(cyc_zeta_power(j, c));
  } else if (c == 6) {
    for (unsigned j = 0; j < 6; ++j) us.push_back(cyc_zeta_power(j, c));
  } else {
    for (unsigned j = 0; j < 3; ++j) {
      us.push_back(cyc_zeta_power(j, c));
      us.push_back(cyc_neg(cyc_zeta_power(j, c)));
    }
  }
  return us;
}

// Exact quotient a / b; throws when b = 0 or b does not divide a.
inline CycInt cyc_div_exact(CycInt a, CycInt b, unsigned c) {
  std::int64_t n = cyc_norm(b, c);
  if (n == 0) throw arithmetic_error("cyclotomic division by zero");
  CycInt num = cyc_mul(a, cyc_conj(b, c), c);
  if (num.s % n != 0 || num.t % n != 0)
    throw arithmetic_error("cyclotomic division is not exact");
  return {num.s / n, num.t / n};
}

// Image of a in GF(p) under zeta -> zeta_p (a fixed primitive c-th root of
// unity in Montgomery form).  Result is in Montgomery form.
inline std::uint32_t cyc_embed(const FpCtx& fp, std::uint32_t zeta_p, CycInt a) {
  return fp.add(fp.from_int(a.s), fp.mul(fp.from_int(a.t), zeta_p));
}

inline std::string cyc_to_string(CycInt a) {
  std::string r = std::to_string(a.s);
  if (a.t != 0) {
    r += a.t > 0 ? "+" : "-";
    std::int64_t t = std::llabs(a.t);
    if (t != 1) r += std::to_string(t) + "*";
    r += "z";
  }
  return r;
}

}  // namespace curvecount
