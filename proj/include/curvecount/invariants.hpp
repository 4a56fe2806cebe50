#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "curve.hpp"
#include "cyclotomic.hpp"
#include "errors.hpp"

namespace curvecount {

// Multiplicity k = 2/(c-n) of the twisted curve class for dimension n.
inline unsigned expected_k(unsigned c, unsigned n) {
  if (n == 0 || n >= c) throw invalid_argument_error("dimension must satisfy 0 < n < c");
  if (2 % (c - n) != 0)
    throw nonintegral_k_error("no integral multiplicity for this (c, n)");
  return 2 / (c - n);
}

// Diagonal entry k*c^2/(a*b) of the Hermitian form (= degree of the
// diagonal coordinate polynomials).
inline unsigned diag_degree(const CurveCase& cse, unsigned k) {
  return k * cse.c * cse.c / (cse.a * cse.b);
}

// Component degrees: deg P_i = k*c/a, deg Q_i = k*c/b, deg R_i = k*c.
inline unsigned deg_P(const CurveCase& cse, unsigned k) { return k * cse.c / cse.a; }
inline unsigned deg_Q(const CurveCase& cse, unsigned k) { return k * cse.c / cse.b; }

// Degree matrix M^{l,r} of one curve pair (i,j): rows indexed by
// l = 0..a-1, columns by r = 0..b-1.  Row l sums to k*c/a, column r to
// k*c/b.
struct MDeg {
  CurveCase cse;
  unsigned k = 0;
  std::array<std::uint8_t, 12> m{};  // row-major a x b, a*b <= 12

  std::uint8_t at(unsigned l, unsigned r) const { return m[l * cse.b + r]; }
  std::uint8_t& at(unsigned l, unsigned r) { return m[l * cse.b + r]; }
  friend bool operator==(const MDeg&, const MDeg&) = default;
};

// All degree matrices with the required row/column sums, in lexicographic
// (row-major) order.
inline std::vector<MDeg> enumerate_M(const CurveCase& cse, unsigned k) {
  make_case(cse.a, cse.b, cse.c);
  if (k == 0) throw invalid_argument_error("multiplicity must be positive");
  unsigned a = cse.a, b = cse.b;
  unsigned rowsum = deg_P(cse, k), colsum = deg_Q(cse, k);
  std::vector<MDeg> out;
  MDeg cur{cse, k, {}};
  std::vector<unsigned> rowrem(a, rowsum), colrem(b, colsum);
  // DFS over cells in row-major order, candidate values ascending: the
  // output order is lexicographic by construction.
  auto rec = [&](auto&& self, unsigned cell) -> void {
    if (cell == a * b) {
      out.push_back(cur);
      return;
    }
    unsigned l = cell / b, r = cell % b;
    unsigned hi = std::min(rowrem[l], colrem[r]);
    for (unsigned v = 0; v <= hi; ++v) {
      if (r == b - 1 && rowrem[l] != v) continue;      // row must close out
      if (l == a - 1 && colrem[r] != v) continue;      // column must close out
      cur.at(l, r) = (std::uint8_t)v;
      rowrem[l] -= v;
      colrem[r] -= v;
      self(self, cell + 1);
      rowrem[l] += v;
      colrem[r] += v;
    }
    cur.at(l, r) = 0;
  };
  rec(rec, 0);
  return out;
}

// Degree matrix of the same pair read in the opposite order (j,i):
// M'^{l,r} = M^{(a-l) mod a, (b-r) mod b}.
inline MDeg swapped_pair(const MDeg& m) {
  MDeg out{m.cse, m.k, {}};
  for (unsigned l = 0; l < m.cse.a; ++l)
    for (unsigned r = 0; r < m.cse.b; ++r)
      out.at(l, r) = m.at((m.cse.a - l) % m.cse.a, (m.cse.b - r) % m.cse.b);
  return out;
}

// Off-diagonal Hermitian entry h determined by a degree matrix.
inline CycInt h_from_M(const MDeg& m) {
  std::int64_t k = m.k;
  unsigned c = m.cse.c;
  if (c == 4) {
    // h = k(1-z) - M00 - M12 + z*M01 + z*M13
    return {k - m.at(0, 0) - m.at(1, 2), -k + m.at(0, 1) + m.at(1, 3)};
  }
  if (c == 6) {
    // h = (4-2z)k - (2+2z)M00 + (4z-2)M12
    return {4 * k - 2 * m.at(0, 0) - 2 * m.at(1, 2),
            -2 * k - 2 * m.at(0, 0) + 4 * m.at(1, 2)};
  }
  // c = 3:  h = k(1+z) + (z^2*B - A)/(1-z)
  // with A = M00 + M12 + M21 (l+r = 0 mod 3), B = M11 + M02 + M20 (l+r = 2 mod 3)
  std::int64_t A = m.at(0, 0) + m.at(1, 2) + m.at(2, 1);
  std::int64_t B = m.at(1, 1) + m.at(0, 2) + m.at(2, 0);
  CycInt num = cyc_sub(cyc_scale(B, cyc_zeta_power(2, 3)), {A, 0});
  CycInt q = cyc_div_exact(num, cyc_sub({1, 0}, {0, 1}), 3);
  return cyc_add(cyc_scale(k, {1, 1}), q);
}

// All admissible off-diagonal entries for (case, k): the image of
// enumerate_M under h_from_M, deduplicated and sorted.
inline std::vector<CycInt> offdiag_set(const CurveCase& cse, unsigned k) {
  std::vector<CycInt> vals;
  for (const MDeg& m : enumerate_M(cse, k)) vals.push_back(h_from_M(m));
  std::sort(vals.begin(), vals.end(), cyc_less);
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  return vals;
}

// Preimages: all degree matrices mapping to h (possibly several for
// (3,3,3) and (2,4,4); exactly one for (2,3,6)).
inline std::vector<MDeg> M_from_h(const CurveCase& cse, unsigned k, CycInt h) {
  std::vector<MDeg> out;
  for (const MDeg& m : enumerate_M(cse, k))
    if (h_from_M(m) == h) out.push_back(m);
  return out;
}

}  // namespace curvecount
