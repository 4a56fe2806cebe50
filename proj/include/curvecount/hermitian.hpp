#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cyclotomic.hpp"
#include "errors.hpp"
#include "invariants.hpp"

namespace curvecount {

using HVec = std::vector<CycInt>;  // element of Z[zeta]^n

// Hermitian n x n matrix over Z[zeta_c]: H_{ji} = conj(H_{ij}).
struct HForm {
  unsigned c = 0, n = 0;
  std::vector<CycInt> e;  // row-major

  const CycInt& at(unsigned i, unsigned j) const { return e[i * n + j]; }
  CycInt& at(unsigned i, unsigned j) { return e[i * n + j]; }
  friend bool operator==(const HForm&, const HForm&) = default;
};

// General square matrix over Z[zeta_c] (basis transforms).
struct CycMat {
  unsigned c = 0, n = 0;
  std::vector<CycInt> e;  // row-major

  const CycInt& at(unsigned i, unsigned j) const { return e[i * n + j]; }
  CycInt& at(unsigned i, unsigned j) { return e[i * n + j]; }
};

inline HForm make_hform(unsigned c, unsigned n, std::vector<CycInt> entries) {
  cyc_check_order(c);
  if (entries.size() != (size_t)n * n) throw invalid_argument_error("entry count mismatch");
  HForm H{c, n, std::move(entries)};
  for (unsigned i = 0; i < n; ++i) {
    if (H.at(i, i).t != 0) throw invalid_argument_error("diagonal must be real");
    for (unsigned j = 0; j < n; ++j)
      if (!(H.at(j, i) == cyc_conj(H.at(i, j), c)))
        throw invalid_argument_error("matrix is not hermitian");
  }
  return H;
}

// v1^* H v2 (sesquilinear pairing; conjugation on the first argument).
inline CycInt hpair(const HForm& H, const HVec& v1, const HVec& v2) {
  CycInt acc{0, 0};
  for (unsigned i = 0; i < H.n; ++i) {
    CycInt row{0, 0};
    for (unsigned j = 0; j < H.n; ++j)
      row = cyc_add(row, cyc_mul(H.at(i, j), v2[j], H.c));
    acc = cyc_add(acc, cyc_mul(cyc_conj(v1[i], H.c), row, H.c));
  }
  return acc;
}

// q(v) = v^* H v; always a rational integer.
inline std::int64_t hnorm(const HForm& H, const HVec& v) {
  CycInt q = hpair(H, v, v);
  assert(q.t == 0);
  return q.s;
}

namespace detail {

// Fraction-free (Bareiss) elimination over Z[zeta].  Returns the leading
// principal minors det(H_k), k = 1..n, aborting with what it has when a
// pivot vanishes (the matrix is then not positive definite; determinants of
// such matrices go through the row-swapping variant below).
inline std::vector<CycInt> bareiss_minors(const HForm& H, bool* zero_pivot) {
  unsigned n = H.n;
  std::vector<CycInt> m = H.e;
  auto at = [&](unsigned i, unsigned j) -> CycInt& { return m[i * n + j]; };
  std::vector<CycInt> minors;
  CycInt prev{1, 0};
  *zero_pivot = false;
  for (unsigned k = 0; k < n; ++k) {
    CycInt piv = at(k, k);
    if (piv == CycInt{0, 0}) {
      *zero_pivot = true;
      return minors;
    }
    minors.push_back(piv);
    for (unsigned i = k + 1; i < n; ++i)
      for (unsigned j = k + 1; j < n; ++j) {
        CycInt num = cyc_sub(cyc_mul(piv, at(i, j), H.c),
                             cyc_mul(at(i, k), at(k, j), H.c));
        at(i, j) = cyc_div_exact(num, prev, H.c);
      }
    prev = piv;
  }
  return minors;
}

}  // namespace detail

// Exact determinant (an integer: the determinant of a Hermitian matrix is
// real, and Bareiss keeps it in Z[zeta] throughout).
inline std::int64_t hform_det(const HForm& H) {
  unsigned n = H.n;
  std::vector<CycInt> m = H.e;
  auto at = [&](unsigned i, unsigned j) -> CycInt& { return m[i * n + j]; };
  CycInt prev{1, 0};
  int sign = 1;
  for (unsigned k = 0; k < n; ++k) {
    if (at(k, k) == CycInt{0, 0}) {
      unsigned r = k + 1;
      while (r < n && at(r, k) == CycInt{0, 0}) ++r;
      if (r == n) return 0;
      for (unsigned j = 0; j < n; ++j) std::swap(at(k, j), at(r, j));
      sign = -sign;
    }
    CycInt piv = at(k, k);
    for (unsigned i = k + 1; i < n; ++i)
      for (unsigned j = k + 1; j < n; ++j) {
        CycInt num = cyc_sub(cyc_mul(piv, at(i, j), H.c),
                             cyc_mul(at(i, k), at(k, j), H.c));
        at(i, j) = cyc_div_exact(num, prev, H.c);
      }
    prev = piv;
  }
  CycInt det = at(n - 1, n - 1);
  if (det.t != 0) throw arithmetic_error("hermitian determinant is not real");
  return sign < 0 ? -det.s : det.s;
}

inline bool positive_definite(const HForm& H) {
  bool zero_pivot = false;
  auto minors = detail::bareiss_minors(H, &zero_pivot);
  if (zero_pivot || minors.size() != H.n) return false;
  for (const CycInt& m : minors) {
    if (m.t != 0) throw arithmetic_error("principal minor is not real");
    if (m.s <= 0) return false;
  }
  return true;
}

// Twice the real Gram matrix of H in the Z-basis {e_1, zeta e_1, ..., e_n,
// zeta e_n}: entries 2*Re(conj(zeta^alpha) H_{ij} zeta^beta), guaranteed
// integral.  q(v) = x^T G x / 2 for the coordinate vector x.
inline std::vector<std::vector<std::int64_t>> real_gram2(const HForm& H) {
  unsigned n = H.n, m = 2 * n;
  std::vector<std::vector<std::int64_t>> G(m, std::vector<std::int64_t>(m, 0));
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j)
      for (unsigned al = 0; al < 2; ++al)
        for (unsigned be = 0; be < 2; ++be) {
          CycInt t = cyc_mul(cyc_conj(cyc_zeta_power(al, H.c), H.c),
                             cyc_mul(H.at(i, j), cyc_zeta_power(be, H.c), H.c), H.c);
          // 2*Re(s + t*zeta_c) = 2s + t*(zeta + conj zeta):
          //   c=3: 2s - t;  c=4: 2s;  c=6: 2s + t
          std::int64_t tr = 2 * t.s + (H.c == 3 ? -t.t : (H.c == 4 ? 0 : t.t));
          G[2 * i + al][2 * j + be] = tr;
        }
  return G;
}

struct ShortVec {
  HVec v;
  std::int64_t norm = 0;
};

namespace detail {

// Shared Fincke-Pohst core: enumerate all x != 0 with q(x) <= bound.
// Floating Cholesky with slack for pruning; every emitted vector is
// rechecked exactly.  If `first_only`, stops after one vector.
template <class Emit>
inline void fp_enumerate(const HForm& H, std::int64_t bound, bool first_only, Emit&& emit) {
  if (bound < 0) return;
  unsigned m = 2 * H.n;
  auto G2 = real_gram2(H);
  // Cholesky-like decomposition q2(x) = sum_i d_i (x_i + sum_{j>i} u_ij x_j)^2
  // on the doubled form (so the target is 2*bound).
  std::vector<std::vector<double>> u(m, std::vector<double>(m, 0.0));
  std::vector<double> d(m, 0.0);
  for (unsigned i = 0; i < m; ++i) {
    double di = (double)G2[i][i];
    for (unsigned k = 0; k < i; ++k) di -= d[k] * u[k][i] * u[k][i];
    if (di <= 1e-9) throw invalid_argument_error("form is not positive definite");
    d[i] = di;
    for (unsigned j = i + 1; j < m; ++j) {
      double off = (double)G2[i][j];
      for (unsigned k = 0; k < i; ++k) off -= d[k] * u[k][i] * u[k][j];
      u[i][j] = off / di;
    }
  }
  const double budget = 2.0 * (double)bound + 0.5;
  std::vector<std::int64_t> x(m, 0);
  std::vector<double> center(m, 0.0), used(m + 1, 0.0);
  bool stop = false;
  // recurse from the last coordinate down to 0
  auto rec = [&](auto&& self, int i, double remaining) -> void {
    if (stop) return;
    if (i < 0) {
      bool nonzero = false;
      for (auto c : x) nonzero = nonzero || c != 0;
      if (!nonzero) return;
      // exact norm via the integer doubled Gram
      std::int64_t q2 = 0;
      for (unsigned a = 0; a < m; ++a)
        for (unsigned b = 0; b < m; ++b) q2 += G2[a][b] * x[a] * x[b];
      assert(q2 % 2 == 0);
      std::int64_t q = q2 / 2;
      assert(q > 0);
      if (q <= bound) {
        HVec v(H.n);
        for (unsigned t = 0; t < H.n; ++t) v[t] = {x[2 * t], x[2 * t + 1]};
        emit(std::move(v), q);
        if (first_only) stop = true;
      }
      return;
    }
    double c = 0.0;
    for (unsigned j = (unsigned)i + 1; j < m; ++j) c += u[i][j] * (double)x[j];
    double radius = std::sqrt(std::max(0.0, remaining / d[i]));
    std::int64_t lo = (std::int64_t)std::ceil(-c - radius - 1e-9);
    std::int64_t hi = (std::int64_t)std::floor(-c + radius + 1e-9);
    for (std::int64_t xi = lo; xi <= hi && !stop; ++xi) {
      x[i] = xi;
      double term = d[i] * ((double)xi + c) * ((double)xi + c);
      self(self, i - 1, remaining - term + 1e-9);
    }
    x[i] = 0;
  };
  rec(rec, (int)m - 1, budget);
}

inline bool hvec_less(const HVec& a, const HVec& b) {
  for (size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) return cyc_less(a[i], b[i]);
  return false;
}

}  // namespace detail

// All v != 0 with q(v) <= bound, each vector individually (not up to sign),
// sorted by (norm, lexicographic entries).
inline std::vector<ShortVec> short_vectors(const HForm& H, std::int64_t bound) {
  std::vector<ShortVec> out;
  detail::fp_enumerate(H, bound, false,
                       [&](HVec v, std::int64_t q) { out.push_back({std::move(v), q}); });
  std::sort(out.begin(), out.end(), [](const ShortVec& a, const ShortVec& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    return detail::hvec_less(a.v, b.v);
  });
  return out;
}

// Is there any nonzero vector of norm <= bound?
inline bool exists_vector_below(const HForm& H, std::int64_t bound) {
  bool found = false;
  detail::fp_enumerate(H, bound, true, [&](HVec, std::int64_t) { found = true; });
  return found;
}

struct NormSequence {
  std::int64_t granularity = 0;
  std::vector<std::int64_t> counts;  // counts.size() == shells, starting at norm 0
};

// Counts of vectors per norm shell.  The shell step is the gcd of the norms
// attained within the enumerated range (e.g. 6 when the attained norms are
// 12 and 18), so absent intermediate shells report 0.
inline NormSequence norm_count_sequence(const HForm& H, unsigned shells) {
  NormSequence seq;
  seq.counts.assign(shells, 0);
  seq.counts[0] = 1;  // the zero vector
  if (shells <= 1) {
    seq.granularity = 1;
    return seq;
  }
  // minimal attained norm first (bounded by the smallest diagonal entry)
  std::int64_t dmin = H.at(0, 0).s;
  for (unsigned i = 1; i < H.n; ++i) dmin = std::min(dmin, H.at(i, i).s);
  std::int64_t first = -1;
  for (const auto& sv : short_vectors(H, dmin)) {
    if (first < 0 || sv.norm < first) first = sv.norm;
  }
  assert(first > 0);  // e_i attains the smallest diagonal entry
  auto vecs = short_vectors(H, first * (std::int64_t)(shells - 1));
  std::int64_t g = 0;
  for (const auto& sv : vecs) g = std::gcd(g, sv.norm);
  seq.granularity = g;
  for (const auto& sv : vecs) {
    assert(sv.norm % g == 0);
    std::int64_t idx = sv.norm / g;
    if (idx < (std::int64_t)shells) ++seq.counts[idx];
  }
  return seq;
}

enum class LatticeId { Unknown, D6, E8, Lambda10 };

inline const char* lattice_name(LatticeId id) {
  switch (id) {
    case LatticeId::D6: return "D6";
    case LatticeId::E8: return "E8";
    case LatticeId::Lambda10: return "Lambda10";
    default: return "unknown";
  }
}

// Match the first four norm-shell counts against reference theta series.
inline LatticeId identify_lattice(const HForm& H) {
  auto seq = norm_count_sequence(H, 4);
  const std::vector<std::int64_t>& c = seq.counts;
  if (c == std::vector<std::int64_t>{1, 60, 252, 544}) return LatticeId::D6;
  if (c == std::vector<std::int64_t>{1, 240, 2160, 6720}) return LatticeId::E8;
  if (c == std::vector<std::int64_t>{1, 0, 336, 768}) return LatticeId::Lambda10;
  return LatticeId::Unknown;
}

namespace detail {

// Backtracking search for matrices g with g^* H1 g = H2, i.e. columns w_j
// with <w_i, w_j>_{H1} = (H2)_{ij}.  Candidate columns come from the norm
// shells of H1, computed lazily and cached (so one searcher can be reused
// against many targets).  Leading columns may be prescribed via `prefix`.
// Calls sink(cols) for every solution; sink returns false to stop.
class IsometrySearch {
 public:
  explicit IsometrySearch(const HForm& H1) : H1_(&H1) {}

  template <class Sink>
  bool run(const HForm& H2, const std::vector<HVec>& prefix, Sink&& sink) {
    assert(H2.c == H1_->c && H2.n == H1_->n);
    cols_ = prefix;
    cols_.resize(H2.n);
    return rec(H2, (unsigned)prefix.size(), sink);
  }

  const std::vector<HVec>& pool(std::int64_t norm) {
    auto it = pools_.find(norm);
    if (it == pools_.end()) {
      std::vector<HVec> p;
      for (auto& sv : short_vectors(*H1_, norm))
        if (sv.norm == norm) p.push_back(sv.v);
      it = pools_.emplace(norm, std::move(p)).first;
    }
    return it->second;
  }

 private:
  template <class Sink>
  bool rec(const HForm& H2, unsigned j, Sink& sink) {
    const HForm& H1 = *H1_;
    if (j == H2.n) return sink(cols_);
    for (const HVec& cand : pool(H2.at(j, j).s)) {
      bool ok = true;
      for (unsigned i = 0; i < j && ok; ++i)
        ok = hpair(H1, cols_[i], cand) == H2.at(i, j);
      if (!ok) continue;
      cols_[j] = cand;
      if (!rec(H2, j + 1, sink)) return false;
    }
    return true;
  }

  const HForm* H1_;
  std::map<std::int64_t, std::vector<HVec>> pools_;
  std::vector<HVec> cols_;
};

inline CycMat columns_to_mat(unsigned c, const std::vector<HVec>& cols) {
  unsigned n = (unsigned)cols.size();
  CycMat g{c, n, std::vector<CycInt>(n * n)};
  for (unsigned j = 0; j < n; ++j)
    for (unsigned i = 0; i < n; ++i) g.at(i, j) = cols[j][i];
  return g;
}

}  // namespace detail

// g^* H g as a form (g need not be invertible; the result is hermitian).
inline HForm transform_form(const HForm& H, const CycMat& g) {
  HForm out{H.c, H.n, std::vector<CycInt>(H.n * H.n)};
  std::vector<HVec> cols(H.n, HVec(H.n));
  for (unsigned j = 0; j < H.n; ++j)
    for (unsigned i = 0; i < H.n; ++i) cols[j][i] = g.at(i, j);
  for (unsigned i = 0; i < H.n; ++i)
    for (unsigned j = 0; j < H.n; ++j) out.at(i, j) = hpair(H, cols[i], cols[j]);
  return out;
}

// Transform g in GL_n(Z[zeta]) with g^* H1 g = H2, when one exists.  A
// solution over Z[zeta] is automatically invertible: |det g|^2 =
// det(H2)/det(H1) = 1.
inline std::optional<CycMat> isometric(const HForm& H1, const HForm& H2) {
  if (H1.c != H2.c || H1.n != H2.n) return std::nullopt;
  if (hform_det(H1) != hform_det(H2)) return std::nullopt;
  for (unsigned s = 2; s <= 3; ++s) {
    auto a = norm_count_sequence(H1, s).counts;
    auto b = norm_count_sequence(H2, s).counts;
    if (a != b) return std::nullopt;
  }
  detail::IsometrySearch search(H1);
  std::optional<CycMat> result;
  search.run(H2, {}, [&](const std::vector<HVec>& cols) {
    result = detail::columns_to_mat(H1.c, cols);
    return false;  // stop at the first solution
  });
  assert(!result || transform_form(H1, *result) == H2);
  return result;
}

struct AutGroup {
  std::uint64_t order = 0;
  std::vector<CycMat> generators;  // stabilizer-chain transversal elements
};

// Automorphism group {g : g^* H g = H}: exact order via the orbit-stabilizer
// chain over basis vectors, plus transversal generators (which generate the
// whole group).
inline AutGroup automorphism_group(const HForm& H) {
  AutGroup out;
  out.order = 1;
  detail::IsometrySearch search(H);
  std::vector<HVec> id_prefix;
  for (unsigned level = 0; level < H.n; ++level) {
    // orbit of e_level under the pointwise stabilizer of e_0..e_{level-1}:
    // candidates with correct pairings against the identity prefix that
    // extend to a full automorphism.
    std::uint64_t cnt = 0;
    std::vector<HVec> prefix = id_prefix;
    prefix.emplace_back();
    HVec e(H.n, CycInt{0, 0});
    e[level] = {1, 0};
    for (const HVec& cand : search.pool(H.at(level, level).s)) {
      bool ok = true;
      for (unsigned i = 0; i < level && ok; ++i)
        ok = hpair(H, id_prefix[i], cand) == H.at(i, level);
      if (!ok) continue;
      prefix[level] = cand;
      bool extendable = false;
      search.run(H, prefix, [&](const std::vector<HVec>& cols) {
        extendable = true;
        // record a transversal generator when the image differs from e_level
        if (!(cand == e)) out.generators.push_back(detail::columns_to_mat(H.c, cols));
        return false;  // first completion suffices
      });
      if (extendable) ++cnt;
    }
    assert(cnt >= 1);  // the identity always extends
    out.order *= cnt;
    id_prefix.push_back(e);
  }
  return out;
}

inline HVec apply_mat(const CycMat& g, const HVec& v) {
  HVec w(g.n, CycInt{0, 0});
  for (unsigned i = 0; i < g.n; ++i)
    for (unsigned j = 0; j < g.n; ++j)
      w[i] = cyc_add(w[i], cyc_mul(g.at(i, j), v[j], g.c));
  return w;
}

// Orbit partition of `vectors` (must be closed under the group action).
// Orbits and their members come out in canonical order.
inline std::vector<std::vector<HVec>> orbits(const std::vector<HVec>& vectors,
                                             const AutGroup& aut) {
  std::map<HVec, unsigned, bool (*)(const HVec&, const HVec&)> index(detail::hvec_less);
  for (unsigned i = 0; i < vectors.size(); ++i) index.emplace(vectors[i], i);
  std::vector<int> orbit_of(vectors.size(), -1);
  std::vector<std::vector<HVec>> out;
  // map keys are already canonically sorted
  for (auto& [start, si] : index) {
    if (orbit_of[si] >= 0) continue;
    int id = (int)out.size();
    std::vector<HVec> members;
    std::vector<unsigned> queue = {si};
    orbit_of[si] = id;
    while (!queue.empty()) {
      unsigned cur = queue.back();
      queue.pop_back();
      members.push_back(vectors[cur]);
      for (const CycMat& g : aut.generators) {
        HVec w = apply_mat(g, vectors[cur]);
        auto it = index.find(w);
        if (it == index.end())
          throw invalid_argument_error("vector set is not closed under the group");
        if (orbit_of[it->second] < 0) {
          orbit_of[it->second] = id;
          queue.push_back(it->second);
        }
      }
    }
    std::sort(members.begin(), members.end(), detail::hvec_less);
    out.push_back(std::move(members));
  }
  return out;
}

inline std::vector<std::vector<HVec>> orbits(const HForm& H, const std::vector<HVec>& vectors) {
  return orbits(vectors, automorphism_group(H));
}

namespace detail {

// Minimal-vector pairing condition: every non-proportional pair of norm-d
// vectors must pair into the admissible off-diagonal set.  |w|^2 = d^2 is
// the Cauchy-Schwarz equality case (proportional vectors), which is exempt.
inline bool pairing_condition_holds(const HForm& H, std::int64_t d,
                                    const std::vector<CycInt>& hset_sorted,
                                    const std::vector<HVec>& shell) {
  for (size_t aa = 0; aa < shell.size(); ++aa)
    for (size_t bb = aa + 1; bb < shell.size(); ++bb) {
      CycInt w = hpair(H, shell[aa], shell[bb]);
      if (cyc_norm(w, H.c) == d * d) continue;  // proportional pair
      if (!std::binary_search(hset_sorted.begin(), hset_sorted.end(), w, cyc_less))
        return false;
    }
  return true;
}

}  // namespace detail

// The admissibility conditions for a candidate form: exact diagonal,
// off-diagonal entries from the admissible set, positive definite, no vector
// shorter than the diagonal, and the minimal-vector pairing condition.
inline bool satisfies_classification_conditions(const HForm& H, const CurveCase& cse,
                                                unsigned k) {
  std::int64_t d = diag_degree(cse, k);
  for (unsigned i = 0; i < H.n; ++i)
    if (!(H.at(i, i) == CycInt{d, 0})) return false;
  auto hs = offdiag_set(cse, k);
  for (unsigned i = 0; i < H.n; ++i)
    for (unsigned j = i + 1; j < H.n; ++j)
      if (!std::binary_search(hs.begin(), hs.end(), H.at(i, j), cyc_less)) return false;
  if (!positive_definite(H)) return false;
  if (exists_vector_below(H, d - 1)) return false;
  std::vector<HVec> shell;
  for (auto& sv : short_vectors(H, d)) shell.push_back(sv.v);
  return detail::pairing_condition_holds(H, d, hs, shell);
}

// Which conditions cut down the classification.  The third- and fourth-root
// classifications are by positive definiteness alone; the sixth-root
// classification additionally requires that no vector is shorter than the
// diagonal and that minimal vectors pair into the admissible set.
enum class AdmissibilityConditions {
  positive_definite_only,
  with_minimal_vector_conditions,
};

struct ClassifyOptions {
  std::optional<std::int64_t> target_det;  // keep only this determinant
  std::uint64_t node_budget = 200000000;   // assignment nodes before giving up
  std::optional<AdmissibilityConditions> conditions;  // default depends on the case
};

// Representatives of GL_n(Z[zeta])-equivalence classes of admissible forms,
// sorted by determinant (then by entries).  Search: backtracking over the
// off-diagonal slots in column-major order with positive-definiteness,
// minimum-norm and determinant-bound pruning; dedup via the isometry test
// behind a (det, shell-counts) prefilter.
inline std::vector<HForm> classify_forms(const CurveCase& cse, unsigned n, unsigned k,
                                         const ClassifyOptions& opts = {}) {
  std::int64_t d = diag_degree(cse, k);
  unsigned c = cse.c;
  AdmissibilityConditions conds = opts.conditions.value_or(
      c == 6 ? AdmissibilityConditions::with_minimal_vector_conditions
             : AdmissibilityConditions::positive_definite_only);
  bool strict = conds == AdmissibilityConditions::with_minimal_vector_conditions;
  auto hs_full = offdiag_set(cse, k);
  std::vector<CycInt> hs;  // strict Cauchy-Schwarz only: |h|^2 < d^2
  for (CycInt h : hs_full)
    if (cyc_norm(h, c) < d * d) hs.push_back(h);

  // Rescaling column j by a unit u maps H_{0j} to H_{0j}*u and leaves every
  // other first-row slot alone, so each (0,j) slot may be restricted to the
  // minimal representative of its unit orbit.  When the admissible set is
  // not closed under unit multiplication, rescaling can push *other* column
  // entries out of the set, so the restriction is only sound for n = 2
  // (minimum taken within the set); for unit-closed sets it is sound for
  // every n.
  bool units_closed = true;
  auto in_hs = [&](CycInt w) {
    return std::binary_search(hs.begin(), hs.end(), w, cyc_less);
  };
  for (CycInt h : hs)
    for (CycInt u : cyc_units(c)) units_closed = units_closed && in_hs(cyc_mul(h, u, c));
  std::vector<CycInt> hs_canon;
  if (units_closed || n == 2) {
    for (CycInt h : hs) {
      CycInt best = h;
      for (CycInt u : cyc_units(c)) {
        CycInt w = cyc_mul(h, u, c);
        if (cyc_less(w, best) && (units_closed || in_hs(w))) best = w;
      }
      if (best == h) hs_canon.push_back(h);
    }
  } else {
    hs_canon = hs;
  }

  HForm H{c, n, std::vector<CycInt>(n * n, CycInt{0, 0})};
  for (unsigned i = 0; i < n; ++i) H.at(i, i) = {d, 0};

  // column-major slot order: column j gets slots (0,j), (1,j), ..., (j-1,j),
  // so each leading principal block completes as early as possible
  struct Slot {
    unsigned i, j;
  };
  std::vector<Slot> slots;
  for (unsigned j = 1; j < n; ++j)
    for (unsigned i = 0; i < j; ++i) slots.push_back({i, j});

  struct Key {
    std::int64_t det;
    std::int64_t shell_count;
    auto operator<=>(const Key&) const = default;
  };
  // class representatives (both admissible and not, so inadmissible
  // candidates are also deduplicated), each with a cached column searcher
  struct RepEntry {
    std::unique_ptr<HForm> form;
    std::unique_ptr<detail::IsometrySearch> search;
    bool admissible;
  };
  std::map<Key, std::vector<RepEntry>> reps;
  std::vector<HForm> out;
  std::uint64_t nodes = 0;

  auto leading_block = [&](unsigned m) {
    HForm B{c, m, std::vector<CycInt>(m * m)};
    for (unsigned i = 0; i < m; ++i)
      for (unsigned j = 0; j < m; ++j) B.at(i, j) = H.at(i, j);
    return B;
  };

  auto rec = [&](auto&& self, unsigned s) -> void {
    if (++nodes > opts.node_budget) {
      std::string progress = "nodes=" + std::to_string(nodes) +
                             " classes_found=" + std::to_string(out.size()) +
                             " depth=" + std::to_string(s);
      throw budget_exhausted_error("classification exceeded its node budget", progress);
    }
    if (s == slots.size()) {
      // positive definiteness and the minimum-norm condition were enforced
      // as each column closed; entries come from the admissible set by
      // construction.  Dedup first so the pairing condition (invariant
      // under isometry) runs once per class, not once per candidate.
      std::int64_t det = hform_det(H);
      if (opts.target_det && det != *opts.target_det) return;
      std::vector<HVec> shell;  // all vectors of norm <= d (== d in strict mode)
      for (auto& sv : short_vectors(H, d)) shell.push_back(sv.v);
      Key key{det, (std::int64_t)shell.size()};
      for (RepEntry& R : reps[key]) {
        bool iso = false;
        R.search->run(H, {}, [&](const std::vector<HVec>&) {
          iso = true;
          return false;
        });
        if (iso) return;  // known class
      }
      bool admissible = !strict || detail::pairing_condition_holds(H, d, hs_full, shell);
      auto form = std::make_unique<HForm>(H);
      auto searcher = std::make_unique<detail::IsometrySearch>(*form);
      if (admissible) out.push_back(*form);
      reps[key].push_back({std::move(form), std::move(searcher), admissible});
      return;
    }
    auto [i, j] = slots[s];
    bool closes_column = i + 1 == j;  // leading (j+1)-block complete after this
    for (CycInt h : (i == 0 ? hs_canon : hs)) {
      H.at(i, j) = h;
      H.at(j, i) = cyc_conj(h, c);
      if (closes_column) {
        HForm B = leading_block(j + 1);
        if (!positive_definite(B)) continue;
        if (strict && exists_vector_below(B, d - 1)) continue;
        if (opts.target_det) {
          // Fischer: det(H) <= det(B) * d^(n-j-1)
          std::int64_t bound = hform_det(B);
          for (unsigned t = j + 1; t < n; ++t) bound *= d;
          if (bound < *opts.target_det) continue;
        }
      }
      self(self, s + 1);
    }
    H.at(i, j) = {0, 0};
    H.at(j, i) = {0, 0};
  };
  rec(rec, 0);

  std::sort(out.begin(), out.end(), [](const HForm& A, const HForm& B) {
    std::int64_t da = hform_det(A), db = hform_det(B);
    if (da != db) return da < db;
    return std::lexicographical_compare(A.e.begin(), A.e.end(), B.e.begin(), B.e.end(),
                                        cyc_less);
  });
  return out;
}

}  // namespace curvecount
