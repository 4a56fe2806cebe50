#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "field.hpp"

namespace curvecount {

// Origin of a polynomial variable.  Most variables are the unknown
// coefficients of one pairwise gcd factor G_{i,j}^{l,r}; `index` is the
// power of the dehomogenizing variable that coefficient multiplies, which
// is also the variable's rescaling weight.  The rest are fresh auxiliaries
// introduced to encode inequalities as equations.
struct VarProvenance {
  enum class Kind { g_coefficient, auxiliary };
  Kind kind = Kind::auxiliary;
  unsigned i = 0, j = 0;  // point pair (meaningful for g_coefficient)
  unsigned l = 0, r = 0;  // root-of-unity exponents of the factor
  unsigned index = 0;     // coefficient index within the factor
  friend bool operator==(const VarProvenance&, const VarProvenance&) = default;
};

struct VarSpec {
  std::size_t id = 0;   // position in the ring's variable order
  unsigned weight = 1;  // rescaling weight
  VarProvenance prov{};
  std::string name;  // display name; auto-assigned by the ring when empty

  static VarSpec g_coeff(std::size_t id, unsigned i, unsigned j, unsigned l,
                         unsigned r, unsigned index) {
    VarSpec v;
    v.id = id;
    v.weight = index;
    v.prov = VarProvenance{VarProvenance::Kind::g_coefficient, i, j, l, r, index};
    return v;
  }

  static VarSpec aux(std::size_t id, unsigned weight = 1, std::string name = {}) {
    VarSpec v;
    v.id = id;
    v.weight = weight;
    v.name = std::move(name);
    return v;
  }
};

// Polynomial ring GF(p)[x_0..x_{n-1}] with a fixed variable list and the
// degree-reverse-lexicographic order on unweighted total degree, variable 0
// being the largest.  Exponents are packed one byte per variable, so every
// individual exponent must stay below 256.  Identity of the ring object is
// identity of the context: polynomials from distinct objects never mix.
class PolyRing {
 public:
  static constexpr std::size_t max_vars = 160;

  PolyRing(std::uint32_t p, std::vector<VarSpec> vars)
      : fp_(p), vars_(std::move(vars)) {
    if (vars_.size() > max_vars)
      throw invalid_argument_error("ring supports at most 160 variables");
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      VarSpec& v = vars_[i];
      if (v.id != i)
        throw invalid_argument_error("variable ids must equal their positions");
      if (v.weight == 0) throw invalid_argument_error("variable weights must be positive");
      if (v.prov.kind == VarProvenance::Kind::g_coefficient && v.weight != v.prov.index)
        throw invalid_argument_error(
            "gcd-coefficient variables must weigh their coefficient index");
      if (v.name.empty()) v.name = default_name(v);
    }
  }

  PolyRing(const PolyRing&) = delete;  // polynomials point to their ring
  PolyRing& operator=(const PolyRing&) = delete;

  const FpCtx& fp() const { return fp_; }
  std::size_t nvars() const { return vars_.size(); }
  const VarSpec& var(std::size_t v) const { return vars_[v]; }

  // degrevlex comparison; positive when a > b
  int cmp(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) const {
    assert(a.size() == nvars() && b.size() == nvars());
    unsigned da = 0, db = 0;
    for (std::uint8_t e : a) da += e;
    for (std::uint8_t e : b) db += e;
    return cmp_packed(da, a.data(), db, b.data(), nvars());
  }

  // comparison with cached total degrees; positive when a > b
  static int cmp_packed(unsigned da, const std::uint8_t* a, unsigned db,
                        const std::uint8_t* b, std::size_t nv) {
    if (da != db) return da < db ? -1 : 1;
    for (std::size_t v = nv; v-- > 0;)
      if (a[v] != b[v]) return a[v] < b[v] ? 1 : -1;
    return 0;
  }

 private:
  static std::string default_name(const VarSpec& v) {
    if (v.prov.kind == VarProvenance::Kind::g_coefficient)
      return "g" + std::to_string(v.prov.i) + std::to_string(v.prov.j) + "_" +
             std::to_string(v.prov.l) + std::to_string(v.prov.r) + "_" +
             std::to_string(v.prov.index);
    return "x" + std::to_string(v.id);
  }

  FpCtx fp_;
  std::vector<VarSpec> vars_;
};

// Sparse multivariate polynomial in canonical form: terms strictly
// decreasing in the ring's order, coefficients nonzero and in Montgomery
// form.  Exponent rows, coefficients and total degrees are stored in
// parallel flat arrays.  Immutable in practice: every operation returns a
// fresh polynomial.
class MPoly {
 public:
  static MPoly zero(const PolyRing& R) { return MPoly(R); }

  static MPoly constant(const PolyRing& R, std::uint32_t c_mont) {
    MPoly f(R);
    if (c_mont) {
      f.exps_.assign(R.nvars(), 0);
      f.coeffs_.push_back(c_mont);
      f.degs_.push_back(0);
    }
    return f;
  }

  static MPoly constant_int(const PolyRing& R, std::int64_t c) {
    return constant(R, R.fp().from_int(c));
  }

  static MPoly variable(const PolyRing& R, std::size_t v) {
    if (v >= R.nvars()) throw invalid_argument_error("no such variable");
    MPoly f(R);
    f.exps_.assign(R.nvars(), 0);
    f.exps_[v] = 1;
    f.coeffs_.push_back(R.fp().one());
    f.degs_.push_back(1);
    return f;
  }

  static MPoly monomial(const PolyRing& R, std::span<const std::uint8_t> exp,
                        std::uint32_t c_mont) {
    if (exp.size() != R.nvars()) throw invalid_argument_error("exponent length mismatch");
    MPoly f(R);
    if (c_mont) {
      f.exps_.assign(exp.begin(), exp.end());
      f.coeffs_.push_back(c_mont);
      f.degs_.push_back(std::accumulate(exp.begin(), exp.end(), 0u));
    }
    return f;
  }

  // Canonicalizing constructor: sorts, merges duplicates, drops zeros.
  static MPoly from_terms(
      const PolyRing& R,
      std::vector<std::pair<std::vector<std::uint8_t>, std::uint32_t>> terms) {
    const std::size_t nv = R.nvars();
    std::vector<unsigned> degs(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (terms[t].first.size() != nv)
        throw invalid_argument_error("exponent length mismatch");
      degs[t] = std::accumulate(terms[t].first.begin(), terms[t].first.end(), 0u);
    }
    std::vector<std::size_t> idx(terms.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      return PolyRing::cmp_packed(degs[x], terms[x].first.data(), degs[y],
                                  terms[y].first.data(), nv) > 0;
    });
    MPoly f(R);
    const FpCtx& fp = R.fp();
    for (std::size_t t : idx) {
      if (!f.coeffs_.empty() &&
          PolyRing::cmp_packed(f.degs_.back(), f.exps_.data() + (f.coeffs_.size() - 1) * nv,
                               degs[t], terms[t].first.data(), nv) == 0) {
        std::uint32_t s = fp.add(f.coeffs_.back(), terms[t].second);
        if (s)
          f.coeffs_.back() = s;
        else
          f.pop_term();
      } else if (terms[t].second) {
        f.push_term(terms[t].first.data(), degs[t], terms[t].second);
      }
    }
    return f;
  }

  // Trusted constructor for callers that already hold terms in strictly
  // decreasing order with nonzero coefficients (verified in debug builds).
  static MPoly from_canonical(const PolyRing& R, std::vector<std::uint8_t> exps,
                              std::vector<unsigned> degs,
                              std::vector<std::uint32_t> coeffs) {
    MPoly f(R);
    f.exps_ = std::move(exps);
    f.degs_ = std::move(degs);
    f.coeffs_ = std::move(coeffs);
    assert(f.exps_.size() == f.coeffs_.size() * R.nvars());
    assert(f.degs_.size() == f.coeffs_.size());
#ifndef NDEBUG
    for (std::size_t t = 0; t < f.coeffs_.size(); ++t) {
      assert(f.coeffs_[t] != 0);
      assert(t == 0 || PolyRing::cmp_packed(
                           f.degs_[t - 1], f.exps_.data() + (t - 1) * R.nvars(),
                           f.degs_[t], f.exps_.data() + t * R.nvars(),
                           R.nvars()) > 0);
    }
#endif
    return f;
  }

  const PolyRing& ring() const { return *ring_; }
  bool is_zero() const { return coeffs_.empty(); }
  std::size_t term_count() const { return coeffs_.size(); }

  // Everything after the leading term.
  MPoly tail() const {
    assert(!is_zero());
    MPoly f(*ring_);
    f.exps_.assign(exps_.begin() + (long)ring_->nvars(), exps_.end());
    f.degs_.assign(degs_.begin() + 1, degs_.end());
    f.coeffs_.assign(coeffs_.begin() + 1, coeffs_.end());
    return f;
  }

  std::span<const std::uint8_t> exp(std::size_t t) const {
    return {exps_.data() + t * ring_->nvars(), ring_->nvars()};
  }
  std::uint32_t coeff(std::size_t t) const { return coeffs_[t]; }
  unsigned total_degree(std::size_t t) const { return degs_[t]; }

  // Flat term-major views of the whole polynomial.
  std::span<const std::uint8_t> raw_exps() const { return exps_; }
  std::span<const std::uint32_t> raw_coeffs() const { return coeffs_; }
  std::span<const unsigned> raw_degs() const { return degs_; }

  std::span<const std::uint8_t> lead_exp() const {
    assert(!is_zero());
    return exp(0);
  }
  std::uint32_t lead_coeff() const {
    assert(!is_zero());
    return coeffs_[0];
  }
  unsigned lead_degree() const {
    assert(!is_zero());
    return degs_[0];
  }

  bool is_constant() const { return coeffs_.empty() || (coeffs_.size() == 1 && degs_[0] == 0); }

  // Coefficient of the constant monomial (zero when absent).
  std::uint32_t constant_value() const {
    return !coeffs_.empty() && degs_.back() == 0 ? coeffs_.back() : 0;
  }

  friend bool operator==(const MPoly& f, const MPoly& g) {
    check_same_ring(f, g);
    return f.exps_ == g.exps_ && f.coeffs_ == g.coeffs_;
  }

  friend MPoly add(const MPoly& f, const MPoly& g);
  friend MPoly neg(const MPoly& f);
  friend MPoly mul(const MPoly& f, const MPoly& g);
  friend MPoly mul_term(const MPoly& f, std::span<const std::uint8_t> e, std::uint32_t c_mont);
  friend MPoly scale(const MPoly& f, std::uint32_t c_mont);

 private:
  explicit MPoly(const PolyRing& R) : ring_(&R) {}

  static void check_same_ring(const MPoly& f, const MPoly& g) {
    if (f.ring_ != g.ring_) throw context_error("operands belong to different rings");
  }

  void push_term(const std::uint8_t* e, unsigned deg, std::uint32_t c) {
    exps_.insert(exps_.end(), e, e + ring_->nvars());
    degs_.push_back(deg);
    coeffs_.push_back(c);
  }

  void pop_term() {
    exps_.resize(exps_.size() - ring_->nvars());
    degs_.pop_back();
    coeffs_.pop_back();
  }

  const PolyRing* ring_;
  std::vector<std::uint8_t> exps_;     // term-major, term_count * nvars bytes
  std::vector<std::uint32_t> coeffs_;  // Montgomery form, never zero
  std::vector<unsigned> degs_;         // cached unweighted total degrees
};

inline MPoly add(const MPoly& f, const MPoly& g) {
  MPoly::check_same_ring(f, g);
  const PolyRing& R = f.ring();
  const FpCtx& fp = R.fp();
  const std::size_t nv = R.nvars();
  MPoly out(R);
  out.exps_.reserve(f.exps_.size() + g.exps_.size());
  out.coeffs_.reserve(f.coeffs_.size() + g.coeffs_.size());
  std::size_t i = 0, j = 0;
  while (i < f.coeffs_.size() && j < g.coeffs_.size()) {
    int c = PolyRing::cmp_packed(f.degs_[i], f.exps_.data() + i * nv, g.degs_[j],
                                 g.exps_.data() + j * nv, nv);
    if (c > 0) {
      out.push_term(f.exps_.data() + i * nv, f.degs_[i], f.coeffs_[i]);
      ++i;
    } else if (c < 0) {
      out.push_term(g.exps_.data() + j * nv, g.degs_[j], g.coeffs_[j]);
      ++j;
    } else {
      std::uint32_t s = fp.add(f.coeffs_[i], g.coeffs_[j]);
      if (s) out.push_term(f.exps_.data() + i * nv, f.degs_[i], s);
      ++i, ++j;
    }
  }
  for (; i < f.coeffs_.size(); ++i)
    out.push_term(f.exps_.data() + i * nv, f.degs_[i], f.coeffs_[i]);
  for (; j < g.coeffs_.size(); ++j)
    out.push_term(g.exps_.data() + j * nv, g.degs_[j], g.coeffs_[j]);
  return out;
}

inline MPoly neg(const MPoly& f) {
  MPoly out = f;
  const FpCtx& fp = f.ring().fp();
  for (auto& c : out.coeffs_) c = fp.neg(c);
  return out;
}

inline MPoly sub(const MPoly& f, const MPoly& g) { return add(f, neg(g)); }

inline MPoly scale(const MPoly& f, std::uint32_t c_mont) {
  if (c_mont == 0) return MPoly::zero(f.ring());
  MPoly out = f;
  const FpCtx& fp = f.ring().fp();
  for (auto& c : out.coeffs_) c = fp.mul(c, c_mont);
  return out;
}

// f * (c * x^e): monomial multiplication preserves the term order, so this
// is a single linear pass.
inline MPoly mul_term(const MPoly& f, std::span<const std::uint8_t> e,
                      std::uint32_t c_mont) {
  const PolyRing& R = f.ring();
  const std::size_t nv = R.nvars();
  if (e.size() != nv) throw invalid_argument_error("exponent length mismatch");
  if (c_mont == 0 || f.is_zero()) return MPoly::zero(R);
  MPoly out(R);
  out.exps_.resize(f.exps_.size());
  out.coeffs_.resize(f.coeffs_.size());
  out.degs_.resize(f.degs_.size());
  unsigned de = 0;
  for (std::uint8_t x : e) de += x;
  const FpCtx& fp = R.fp();
  for (std::size_t t = 0; t < f.coeffs_.size(); ++t) {
    for (std::size_t v = 0; v < nv; ++v) {
      unsigned s = (unsigned)f.exps_[t * nv + v] + e[v];
      if (s > 255) throw arithmetic_error("monomial exponent overflow");
      out.exps_[t * nv + v] = (std::uint8_t)s;
    }
    out.degs_[t] = f.degs_[t] + de;
    out.coeffs_[t] = fp.mul(f.coeffs_[t], c_mont);
  }
  return out;
}

inline MPoly mul(const MPoly& f, const MPoly& g) {
  MPoly::check_same_ring(f, g);
  const PolyRing& R = f.ring();
  if (f.is_zero() || g.is_zero()) return MPoly::zero(R);
  // accumulate f * (one term of g) in order; merging pairwise keeps the
  // intermediate sums balanced
  std::vector<MPoly> parts;
  parts.reserve(g.term_count());
  for (std::size_t t = 0; t < g.term_count(); ++t)
    parts.push_back(mul_term(f, g.exp(t), g.coeff(t)));
  while (parts.size() > 1) {
    std::vector<MPoly> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
      next.push_back(add(parts[i], parts[i + 1]));
    if (parts.size() % 2) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

inline MPoly pow(const MPoly& f, unsigned e) {
  MPoly r = MPoly::constant(f.ring(), f.ring().fp().one());
  MPoly base = f;
  while (e) {
    if (e & 1) r = mul(r, base);
    e >>= 1;
    if (e) base = mul(base, base);
  }
  return r;
}

// Value at a point (all coordinates in Montgomery form).
inline std::uint32_t eval(const MPoly& f, std::span<const std::uint32_t> point) {
  const PolyRing& R = f.ring();
  if (point.size() != R.nvars()) throw invalid_argument_error("point length mismatch");
  const FpCtx& fp = R.fp();
  std::uint32_t acc = 0;
  for (std::size_t t = 0; t < f.term_count(); ++t) {
    std::uint32_t m = f.coeff(t);
    auto e = f.exp(t);
    for (std::size_t v = 0; v < e.size(); ++v)
      if (e[v]) m = fp.mul(m, fp.pow(point[v], e[v]));
    acc = fp.add(acc, m);
  }
  return acc;
}

inline unsigned degree_in(const MPoly& f, std::size_t v) {
  if (v >= f.ring().nvars()) throw invalid_argument_error("no such variable");
  unsigned d = 0;
  for (std::size_t t = 0; t < f.term_count(); ++t) d = std::max(d, (unsigned)f.exp(t)[v]);
  return d;
}

// Coefficient of x_v^k, with the x_v factor removed.
inline MPoly coeff_of(const MPoly& f, std::size_t v, unsigned k) {
  if (v >= f.ring().nvars()) throw invalid_argument_error("no such variable");
  std::vector<std::pair<std::vector<std::uint8_t>, std::uint32_t>> ts;
  for (std::size_t t = 0; t < f.term_count(); ++t) {
    auto e = f.exp(t);
    if (e[v] != k) continue;
    std::vector<std::uint8_t> ne(e.begin(), e.end());
    ne[v] = 0;
    ts.emplace_back(std::move(ne), f.coeff(t));
  }
  return MPoly::from_terms(f.ring(), std::move(ts));
}

// Substitute g for x_v (Horner in x_v).
inline MPoly substitute(const MPoly& f, std::size_t v, const MPoly& g) {
  if (&f.ring() != &g.ring()) throw context_error("operands belong to different rings");
  unsigned d = degree_in(f, v);
  MPoly res = coeff_of(f, v, d);
  for (unsigned k = d; k-- > 0;) res = add(mul(res, g), coeff_of(f, v, k));
  return res;
}

inline MPoly substitute_const(const MPoly& f, std::size_t v, std::uint32_t c_mont) {
  if (v >= f.ring().nvars()) throw invalid_argument_error("no such variable");
  const FpCtx& fp = f.ring().fp();
  std::vector<std::pair<std::vector<std::uint8_t>, std::uint32_t>> ts;
  for (std::size_t t = 0; t < f.term_count(); ++t) {
    auto e = f.exp(t);
    std::vector<std::uint8_t> ne(e.begin(), e.end());
    std::uint32_t c = f.coeff(t);
    if (ne[v]) {
      c = fp.mul(c, fp.pow(c_mont, ne[v]));
      ne[v] = 0;
    }
    ts.emplace_back(std::move(ne), c);
  }
  return MPoly::from_terms(f.ring(), std::move(ts));
}

// Exact quotient f / g; throws when the division is not exact.  Peels the
// leading term of the remainder each round, so termination is guaranteed by
// the monomial order.
inline MPoly divexact(const MPoly& f, const MPoly& g) {
  if (&f.ring() != &g.ring()) throw context_error("operands belong to different rings");
  const PolyRing& R = f.ring();
  const FpCtx& fp = R.fp();
  if (g.is_zero()) throw arithmetic_error("division by zero polynomial");
  if (f.is_zero()) return f;
  const std::size_t nv = R.nvars();
  if (g.term_count() == 1) {
    // single-term divisor: divide every term directly
    auto ge = g.lead_exp();
    std::uint32_t gi = fp.inv(g.lead_coeff());
    std::vector<std::pair<std::vector<std::uint8_t>, std::uint32_t>> ts;
    ts.reserve(f.term_count());
    for (std::size_t t = 0; t < f.term_count(); ++t) {
      auto e = f.exp(t);
      std::vector<std::uint8_t> ne(nv);
      for (std::size_t v = 0; v < nv; ++v) {
        if (e[v] < ge[v]) throw arithmetic_error("polynomial division is not exact");
        ne[v] = (std::uint8_t)(e[v] - ge[v]);
      }
      ts.emplace_back(std::move(ne), fp.mul(f.coeff(t), gi));
    }
    return MPoly::from_terms(R, std::move(ts));
  }
  std::vector<std::pair<std::vector<std::uint8_t>, std::uint32_t>> qts;
  MPoly r = f;
  std::uint32_t glc_inv = fp.inv(g.lead_coeff());
  auto ge = g.lead_exp();
  while (!r.is_zero()) {
    auto re = r.lead_exp();
    std::vector<std::uint8_t> te(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      if (re[v] < ge[v]) throw arithmetic_error("polynomial division is not exact");
      te[v] = (std::uint8_t)(re[v] - ge[v]);
    }
    std::uint32_t tc = fp.mul(r.lead_coeff(), glc_inv);
    r = sub(r, mul_term(g, te, tc));
    qts.emplace_back(std::move(te), tc);
  }
  return MPoly::from_terms(R, std::move(qts));
}

namespace detail {

// Fraction-free determinant (Bareiss) with row pivoting; every division is
// exact because each entry stays a minor of the row-permuted input matrix.
inline MPoly bareiss_det(const PolyRing& R, std::vector<std::vector<MPoly>>& m) {
  const std::size_t k = m.size();
  if (k == 0) return MPoly::constant(R, R.fp().one());
  bool negate = false;
  MPoly prev = MPoly::constant(R, R.fp().one());
  for (std::size_t l = 0; l + 1 < k; ++l) {
    if (m[l][l].is_zero()) {
      std::size_t r = l + 1;
      while (r < k && m[r][l].is_zero()) ++r;
      if (r == k) return MPoly::zero(R);
      std::swap(m[l], m[r]);
      negate = !negate;
    }
    for (std::size_t i = l + 1; i < k; ++i) {
      for (std::size_t j = l + 1; j < k; ++j)
        m[i][j] = divexact(sub(mul(m[l][l], m[i][j]), mul(m[i][l], m[l][j])), prev);
      m[i][l] = MPoly::zero(R);
    }
    prev = m[l][l];
  }
  return negate ? neg(m[k - 1][k - 1]) : std::move(m[k - 1][k - 1]);
}

}  // namespace detail

// Sylvester resultant of f and g viewed as univariate in x_v, eliminating
// x_v.  Coefficient rows are laid out in ascending order, which fixes the
// sign convention: resultant(u - A, u - B) = B - A.
inline MPoly resultant(const MPoly& f, const MPoly& g, std::size_t v) {
  if (&f.ring() != &g.ring()) throw context_error("operands belong to different rings");
  const PolyRing& R = f.ring();
  if (f.is_zero() || g.is_zero())
    throw degenerate_input_error("resultant of the zero polynomial");
  const unsigned m = degree_in(f, v), n = degree_in(g, v);
  std::vector<MPoly> fc, gc;
  for (unsigned t = 0; t <= m; ++t) fc.push_back(coeff_of(f, v, t));
  for (unsigned t = 0; t <= n; ++t) gc.push_back(coeff_of(g, v, t));
  const std::size_t k = m + n;
  if (k == 0) return MPoly::constant(R, R.fp().one());
  std::vector<std::vector<MPoly>> syl(k, std::vector<MPoly>(k, MPoly::zero(R)));
  for (unsigned i = 0; i < n; ++i)
    for (unsigned t = 0; t <= m; ++t) syl[i][i + t] = fc[t];
  for (unsigned i = 0; i < m; ++i)
    for (unsigned t = 0; t <= n; ++t) syl[n + i][i + t] = gc[t];
  return detail::bareiss_det(R, syl);
}

// Monic gcd of two polynomials that involve at most one common variable.
inline MPoly univariate_gcd(const MPoly& f, const MPoly& g) {
  if (&f.ring() != &g.ring()) throw context_error("operands belong to different rings");
  const PolyRing& R = f.ring();
  const FpCtx& fp = R.fp();
  std::size_t var = R.nvars();
  for (const MPoly* h : {&f, &g})
    for (std::size_t t = 0; t < h->term_count(); ++t) {
      auto e = h->exp(t);
      for (std::size_t v = 0; v < e.size(); ++v) {
        if (!e[v]) continue;
        if (var == R.nvars()) var = v;
        if (var != v) throw invalid_argument_error("gcd inputs must be univariate");
      }
    }
  if (f.is_zero() && g.is_zero()) return f;
  if (var == R.nvars()) return MPoly::constant(R, fp.one());  // nonzero constants

  auto dense = [&](const MPoly& h) {
    std::vector<std::uint32_t> d(degree_in(h, var) + 1, 0);
    if (h.is_zero()) d.clear();
    for (std::size_t t = 0; t < h.term_count(); ++t) d[h.exp(t)[var]] = h.coeff(t);
    while (!d.empty() && d.back() == 0) d.pop_back();
    return d;
  };
  std::vector<std::uint32_t> a = dense(f), b = dense(g);
  while (!b.empty()) {
    // a <- a mod b
    std::uint32_t li = fp.inv(b.back());
    while (a.size() >= b.size()) {
      std::uint32_t q = fp.mul(a.back(), li);
      std::size_t off = a.size() - b.size();
      for (std::size_t t = 0; t < b.size(); ++t) a[off + t] = fp.sub(a[off + t], fp.mul(q, b[t]));
      while (!a.empty() && a.back() == 0) a.pop_back();
    }
    std::swap(a, b);
  }
  std::uint32_t mi = fp.inv(a.back());
  std::vector<std::pair<std::vector<std::uint8_t>, std::uint32_t>> ts;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (!a[t]) continue;
    std::vector<std::uint8_t> e(R.nvars(), 0);
    e[var] = (std::uint8_t)t;
    ts.emplace_back(std::move(e), fp.mul(a[t], mi));
  }
  return MPoly::from_terms(R, std::move(ts));
}

// Deterministic rendering: canonical term order, coefficients as standard
// residues, variables by their ring names.
inline std::string to_string(const MPoly& f) {
  if (f.is_zero()) return "0";
  const PolyRing& R = f.ring();
  const FpCtx& fp = R.fp();
  std::string out;
  for (std::size_t t = 0; t < f.term_count(); ++t) {
    if (t) out += " + ";
    std::uint32_t c = fp.from_mont(f.coeff(t));
    auto e = f.exp(t);
    bool has_var = f.total_degree(t) > 0;
    bool printed = false;
    if (c != 1 || !has_var) {
      out += std::to_string(c);
      printed = true;
    }
    for (std::size_t v = 0; v < e.size(); ++v) {
      if (!e[v]) continue;
      if (printed) out += "*";
      out += R.var(v).name;
      if (e[v] > 1) out += "^" + std::to_string(e[v]);
      printed = true;
    }
  }
  return out;
}

}  // namespace curvecount
