#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace curvecount {

// Arithmetic in GF(p) for an odd prime p < 2^31.  Values are held in
// Montgomery form (R = 2^32) as uint32_t; convert at the boundary with
// to_mont / from_mont / from_int.
class FpCtx {
 public:
  explicit FpCtx(std::uint32_t p) : p_(p) {
    if (p < 3 || (p & 1u) == 0 || p >= (1u << 31))
      throw invalid_argument_error("modulus must be an odd prime in [3, 2^31)");
    std::uint32_t inv = p;  // p^{-1} mod 2^32 by Newton iteration
    for (int i = 0; i < 5; ++i) inv *= 2u - p * inv;
    assert(inv * p == 1u);
    pinv_ = ~inv + 1u;  // -p^{-1} mod 2^32
    unsigned __int128 r2 = ((unsigned __int128)1 << 64) % p;
    r2_ = (std::uint32_t)r2;
    one_ = to_mont(1);
  }

  std::uint32_t p() const { return p_; }
  std::uint32_t zero() const { return 0; }
  std::uint32_t one() const { return one_; }

  std::uint32_t to_mont(std::uint64_t x) const { return mul_raw((std::uint32_t)(x % p_), r2_); }
  std::uint32_t from_mont(std::uint32_t a) const { return redc(a); }

  std::uint32_t from_int(std::int64_t x) const {
    std::int64_t r = x % (std::int64_t)p_;
    if (r < 0) r += p_;
    return to_mont((std::uint64_t)r);
  }

  std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    std::uint32_t r = a + b;
    if (r >= p_ || r < a) r -= p_;
    return r;
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) const { return a >= b ? a - b : a + p_ - b; }
  std::uint32_t neg(std::uint32_t a) const { return a ? p_ - a : 0; }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const { return mul_raw(a, b); }
  std::uint32_t sq(std::uint32_t a) const { return mul_raw(a, a); }

  std::uint32_t pow(std::uint32_t a, std::uint64_t e) const {
    std::uint32_t r = one_;
    while (e) {
      if (e & 1) r = mul_raw(r, a);
      a = mul_raw(a, a);
      e >>= 1;
    }
    return r;
  }

  std::uint32_t inv(std::uint32_t a) const {
    if (a == 0) throw arithmetic_error("inverse of zero");
    return pow(a, p_ - 2);
  }

 private:
  std::uint32_t redc(std::uint64_t t) const {
    std::uint32_t m = (std::uint32_t)t * pinv_;
    std::uint64_t u = (t + (std::uint64_t)m * p_) >> 32;
    if (u >= p_) u -= p_;
    return (std::uint32_t)u;
  }
  std::uint32_t mul_raw(std::uint32_t a, std::uint32_t b) const {
    return redc((std::uint64_t)a * b);
  }

  std::uint32_t p_, pinv_, r2_, one_;
};

namespace detail {

inline std::vector<std::uint32_t> prime_factors(std::uint32_t n) {
  std::vector<std::uint32_t> fs;
  for (std::uint32_t d = 2; (std::uint64_t)d * d <= n; ++d) {
    if (n % d == 0) {
      fs.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) fs.push_back(n);
  return fs;
}

}  // namespace detail

// Smallest residue of multiplicative order exactly c in GF(p).
// Requires p = 1 (mod c); otherwise no such residue exists.
inline std::uint32_t primitive_root_of_unity(const FpCtx& fp, unsigned c) {
  if (c < 2 || (fp.p() - 1) % c != 0)
    throw unsupported_prime_error("prime does not split for the requested root order");
  auto qs = detail::prime_factors(c);
  for (std::uint32_t x = 2; x < fp.p(); ++x) {
    std::uint32_t mx = fp.to_mont(x);
    if (fp.pow(mx, c) != fp.one()) continue;
    bool exact = true;
    for (std::uint32_t q : qs)
      if (fp.pow(mx, c / q) == fp.one()) {
        exact = false;
        break;
      }
    if (exact) return mx;
  }
  throw unsupported_prime_error("no residue of the requested order");
}

// Discrete logarithms in GF(p)^* by baby-step/giant-step against the least
// primitive root.  One table per context; used for k-th root extraction
// during point sampling, where k | p-1.
class DlogCtx {
 public:
  explicit DlogCtx(const FpCtx& fp) : fp_(&fp) {
    std::uint32_t p = fp.p();
    auto qs = detail::prime_factors(p - 1);
    for (std::uint32_t g = 2;; ++g) {
      if (g >= p) throw unsupported_prime_error("no primitive root (modulus not prime?)");
      std::uint32_t mg = fp.to_mont(g);
      bool primitive = true;
      for (std::uint32_t q : qs)
        if (fp.pow(mg, (p - 1) / q) == fp.one()) {
          primitive = false;
          break;
        }
      if (primitive) {
        g_ = mg;
        break;
      }
    }
    m_ = 1;
    while ((std::uint64_t)m_ * m_ < p - 1) ++m_;
    baby_.reserve(m_);
    std::uint32_t cur = fp.one();
    for (std::uint32_t j = 0; j < m_; ++j) {
      baby_.emplace(cur, j);
      cur = fp.mul(cur, g_);
    }
    giant_ = fp.inv(fp.pow(g_, m_));
  }

  std::uint32_t generator() const { return g_; }

  // e with generator^e = a (a in Montgomery form, nonzero).
  std::uint64_t solve(std::uint32_t a) const {
    if (a == 0) throw arithmetic_error("dlog of zero");
    std::uint32_t cur = a;
    for (std::uint32_t i = 0; i <= m_; ++i) {
      auto it = baby_.find(cur);
      if (it != baby_.end()) {
        std::uint64_t e = (std::uint64_t)i * m_ + it->second;
        assert(fp_->pow(g_, e) == a);
        return e;
      }
      cur = fp_->mul(cur, giant_);
    }
    throw arithmetic_error("dlog failed (modulus not prime?)");
  }

  // All x with x^k = a, sorted by standard residue (deterministic order).
  // Empty when a is not a k-th power.
  std::vector<std::uint32_t> kth_roots(std::uint32_t a, std::uint64_t k) const {
    const FpCtx& fp = *fp_;
    if (k == 0) throw invalid_argument_error("k must be positive");
    if (a == 0) return {0};
    std::uint64_t n = fp.p() - 1;
    std::uint64_t e = solve(a);
    std::uint64_t d = std::gcd(k, n);
    if (e % d != 0) return {};
    // Solve k*y = e (mod n):  y = (e/d) * (k/d)^{-1}  (mod n/d), d solutions.
    std::uint64_t nd = n / d;
    std::uint64_t y0 = mulmod(e / d % nd, invmod(k / d % nd, nd), nd);
    std::vector<std::uint32_t> roots;
    roots.reserve(d);
    std::uint32_t base = fp.pow(g_, y0);
    std::uint32_t step = fp.pow(g_, nd);
    std::uint32_t cur = base;
    for (std::uint64_t j = 0; j < d; ++j) {
      roots.push_back(cur);
      cur = fp.mul(cur, step);
    }
    std::vector<std::uint32_t> res(roots.size());
    for (size_t i = 0; i < roots.size(); ++i) res[i] = fp.from_mont(roots[i]);
    std::sort(res.begin(), res.end());
    for (size_t i = 0; i < res.size(); ++i) res[i] = fp.to_mont(res[i]);
    return res;
  }

 private:
  static std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return (std::uint64_t)((unsigned __int128)a * b % m);
  }
  static std::uint64_t invmod(std::uint64_t a, std::uint64_t m) {
    // extended Euclid; gcd(a, m) must be 1
    std::int64_t t = 0, nt = 1, r = (std::int64_t)m, nr = (std::int64_t)(a % m);
    while (nr != 0) {
      std::int64_t q = r / nr;
      std::swap(t -= q * nt, nt);
      std::swap(r -= q * nr, nr);
    }
    if (r != 1) throw arithmetic_error("invmod: not coprime");
    if (t < 0) t += (std::int64_t)m;
    return (std::uint64_t)t;
  }

  const FpCtx* fp_;
  std::uint32_t g_ = 0, m_ = 0, giant_ = 0;
  std::unordered_map<std::uint32_t, std::uint32_t> baby_;
};

}  // namespace curvecount
