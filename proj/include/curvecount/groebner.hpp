#pragma once

// Groebner bases over GF(p) in the degree-reverse-lexicographic order.
//
// The central object is `Ideal`: a generator list bound to a PolyRing,
// optionally carrying a computed reduced basis.  `groebner_basis` runs
// Buchberger's algorithm with sugar-degree pair selection, the product and
// chain criteria, and geobucket accumulators for the reduction cascades.
// Work is metered in reduction steps; when a step budget runs out the engine
// throws `budget_exhausted_error` carrying a plain-text snapshot that a later
// call can resume from, so long computations survive process restarts.

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "mpoly.hpp"
#include "rng.hpp"

namespace curvecount {

struct GroebnerStats {
  std::uint64_t pairs_enqueued = 0;
  std::uint64_t pairs_reduced = 0;
  std::uint64_t pairs_skipped_product = 0;
  std::uint64_t pairs_skipped_chain = 0;
  std::uint64_t reduction_steps = 0;
  std::uint64_t zero_reductions = 0;
  std::uint64_t max_queue = 0;
  std::uint64_t basis_size = 0;
};

struct GroebnerOptions {
  // Reduction steps this call may spend before throwing budget_exhausted_error.
  // Checked at pair boundaries: an in-flight reduction always runs to
  // completion (so every call makes progress), which means a call can overrun
  // the budget by the cost of one reduction cascade.
  std::uint64_t budget = UINT64_MAX;
  // Snapshot text from a previous budget_exhausted_error; empty = fresh start.
  std::string resume;
  // Optional counters, accumulated into by the engine.
  GroebnerStats* stats = nullptr;
};

namespace detail {
struct IdealAccess;
}

class Ideal {
 public:
  Ideal(const PolyRing& ring, std::vector<MPoly> generators)
      : ring_(&ring), gens_(std::move(generators)) {
    for (const MPoly& g : gens_) {
      if (&g.ring() != ring_) {
        throw context_error("ideal generator belongs to a different ring");
      }
    }
  }

  const PolyRing& ring() const { return *ring_; }
  const std::vector<MPoly>& generators() const { return gens_; }

  bool has_basis() const { return basis_.has_value(); }

  // The reduced basis.  Throws state_error until groebner_basis produced one.
  const std::vector<MPoly>& basis() const {
    if (!basis_) throw state_error("no basis has been computed for this ideal");
    return *basis_;
  }

 private:
  friend struct detail::IdealAccess;
  const PolyRing* ring_;
  std::vector<MPoly> gens_;
  std::optional<std::vector<MPoly>> basis_;
};

namespace detail {

struct IdealAccess {
  static void set_basis(Ideal& ideal, std::vector<MPoly> basis) {
    ideal.basis_ = std::move(basis);
  }
};

// 160-bit variable-support bitmask, for cheap divisibility prefiltering.
using SupportMask = std::array<std::uint64_t, 3>;

inline SupportMask support_mask(std::span<const std::uint8_t> e) {
  SupportMask m{0, 0, 0};
  for (std::size_t v = 0; v < e.size(); ++v) {
    if (e[v]) m[v >> 6] |= std::uint64_t{1} << (v & 63);
  }
  return m;
}

inline bool mask_subset(const SupportMask& a, const SupportMask& b) {
  return ((a[0] & ~b[0]) | (a[1] & ~b[1]) | (a[2] & ~b[2])) == 0;
}

inline bool exp_divides(const std::uint8_t* a, const std::uint8_t* b,
                        std::size_t nv) {
  for (std::size_t v = 0; v < nv; ++v) {
    if (a[v] > b[v]) return false;
  }
  return true;
}

// A sum of polynomials kept as O(log n) sorted strands of geometrically
// increasing capacity.  Adding a k-term polynomial costs O(k) amortized
// instead of O(size); pop_lead extracts the order-largest surviving term,
// combining equal leading monomials across strands so cancellation is exact.
class Geobucket {
 public:
  explicit Geobucket(const PolyRing& ring) : ring_(&ring), nv_(ring.nvars()) {}

  bool empty_hint() const {
    for (const Strand& s : strands_) {
      if (s.size()) return false;
    }
    return true;
  }

  void add_poly(const MPoly& f) {
    if (f.is_zero()) return;
    Strand s;
    auto e = f.raw_exps();
    auto c = f.raw_coeffs();
    auto d = f.raw_degs();
    s.exps.assign(e.begin(), e.end());
    s.coeffs.assign(c.begin(), c.end());
    s.degs.assign(d.begin(), d.end());
    insert(std::move(s));
  }

  // Adds coeff * x^delta * f (delta has ddeg = total degree of the shift).
  void add_scaled(const MPoly& f, const std::uint8_t* delta, unsigned ddeg,
                  std::uint32_t coeff) {
    if (f.is_zero() || coeff == 0) return;
    const FpCtx& fp = ring_->fp();
    Strand s;
    const std::size_t n = f.term_count();
    s.exps.resize(n * nv_);
    s.coeffs.resize(n);
    s.degs.resize(n);
    auto fe = f.raw_exps();
    auto fc = f.raw_coeffs();
    auto fd = f.raw_degs();
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t v = 0; v < nv_; ++v) {
        unsigned sum = unsigned{fe[t * nv_ + v]} + delta[v];
        if (sum > 255) throw arithmetic_error("exponent overflow in reduction");
        s.exps[t * nv_ + v] = static_cast<std::uint8_t>(sum);
      }
      s.coeffs[t] = fp.mul(fc[t], coeff);
      s.degs[t] = fd[t] + ddeg;
    }
    insert(std::move(s));
  }

  // Removes and returns the largest monomial with a nonzero combined
  // coefficient.  Returns false when the bucket sums to zero.
  bool pop_lead(std::vector<std::uint8_t>& exp_out, unsigned& deg_out,
                std::uint32_t& coeff_out) {
    const FpCtx& fp = ring_->fp();
    for (;;) {
      std::size_t best = strands_.size();
      for (std::size_t i = 0; i < strands_.size(); ++i) {
        Strand& s = strands_[i];
        if (!s.size()) continue;
        if (best == strands_.size() ||
            PolyRing::cmp_packed(s.degs[s.cur], s.exps.data() + s.cur * nv_,
                                 strands_[best].degs[strands_[best].cur],
                                 strands_[best].exps.data() +
                                     strands_[best].cur * nv_,
                                 nv_) > 0) {
          best = i;
        }
      }
      if (best == strands_.size()) return false;
      const Strand& b = strands_[best];
      exp_out.assign(b.exps.begin() + static_cast<std::ptrdiff_t>(b.cur * nv_),
                     b.exps.begin() +
                         static_cast<std::ptrdiff_t>((b.cur + 1) * nv_));
      deg_out = b.degs[b.cur];
      std::uint32_t acc = 0;
      for (Strand& s : strands_) {
        if (!s.size()) continue;
        if (s.degs[s.cur] == deg_out &&
            std::equal(exp_out.begin(), exp_out.end(),
                       s.exps.begin() + static_cast<std::ptrdiff_t>(s.cur * nv_))) {
          acc = fp.add(acc, s.coeffs[s.cur]);
          ++s.cur;
        }
      }
      if (acc != 0) {
        coeff_out = acc;
        return true;
      }
      // Exact cancellation across strands; keep looking.
    }
  }

 private:
  struct Strand {
    std::vector<std::uint8_t> exps;
    std::vector<std::uint32_t> coeffs;
    std::vector<unsigned> degs;
    std::size_t cur = 0;  // index of the first live term
    std::size_t size() const { return coeffs.size() - cur; }
  };

  static std::size_t capacity(std::size_t i) { return std::size_t{4} << (2 * i); }

  Strand merge(const Strand& a, const Strand& b) const {
    const FpCtx& fp = ring_->fp();
    Strand out;
    out.exps.reserve((a.size() + b.size()) * nv_);
    out.coeffs.reserve(a.size() + b.size());
    out.degs.reserve(a.size() + b.size());
    std::size_t i = a.cur, j = b.cur;
    auto emit = [&](const Strand& s, std::size_t t, std::uint32_t c) {
      out.exps.insert(out.exps.end(),
                      s.exps.begin() + static_cast<std::ptrdiff_t>(t * nv_),
                      s.exps.begin() + static_cast<std::ptrdiff_t>((t + 1) * nv_));
      out.coeffs.push_back(c);
      out.degs.push_back(s.degs[t]);
    };
    while (i < a.coeffs.size() && j < b.coeffs.size()) {
      int c = PolyRing::cmp_packed(a.degs[i], a.exps.data() + i * nv_,
                                   b.degs[j], b.exps.data() + j * nv_, nv_);
      if (c > 0) {
        emit(a, i, a.coeffs[i]);
        ++i;
      } else if (c < 0) {
        emit(b, j, b.coeffs[j]);
        ++j;
      } else {
        std::uint32_t s = fp.add(a.coeffs[i], b.coeffs[j]);
        if (s) emit(a, i, s);
        ++i;
        ++j;
      }
    }
    for (; i < a.coeffs.size(); ++i) emit(a, i, a.coeffs[i]);
    for (; j < b.coeffs.size(); ++j) emit(b, j, b.coeffs[j]);
    return out;
  }

  void insert(Strand&& s) {
    std::size_t i = 0;
    while (capacity(i) < s.size()) ++i;
    Strand carry = std::move(s);
    for (;;) {
      if (i >= strands_.size()) strands_.resize(i + 1);
      if (strands_[i].size()) {
        carry = merge(carry, strands_[i]);
        strands_[i] = Strand{};
      }
      if (carry.size() <= capacity(i)) {
        strands_[i] = std::move(carry);
        return;
      }
      ++i;
    }
  }

  const PolyRing* ring_;
  std::size_t nv_;
  std::vector<Strand> strands_;
};

class BuchbergerEngine {
 public:
  BuchbergerEngine(const PolyRing& ring, std::uint64_t budget,
                   GroebnerStats* stats)
      : ring_(&ring),
        fp_(&ring.fp()),
        nv_(ring.nvars()),
        queue_(PairOrder{ring.nvars()}),
        budget_(budget),
        stats_(stats) {}

  void seed(const std::vector<MPoly>& generators) {
    for (const MPoly& g : generators) {
      if (!g.is_zero()) add_element(make_monic(g), g.lead_degree());
    }
  }

  std::vector<MPoly> run() {
    while (!queue_.empty()) {
      if (overdrawn()) {
        throw budget_exhausted_error(
            "basis computation ran out of reduction steps", snapshot());
      }
      if (stats_ && queue_.size() > stats_->max_queue) {
        stats_->max_queue = queue_.size();
      }
      Pair p = *queue_.begin();
      queue_.erase(queue_.begin());
      pending_.erase({p.i, p.j});
      if (chain_skip(p)) {
        if (stats_) ++stats_->pairs_skipped_chain;
        continue;
      }
      process_pair(p);
    }
    interreduce();
    if (stats_) stats_->basis_size = basis_.size();
    return basis_;
  }

  // Plain-text state dump: enough to rebuild the engine in a fresh process.
  std::string snapshot() const {
    std::ostringstream os;
    os << "gb-checkpoint 1\n";
    os << "prime " << fp_->p() << "\n";
    os << "nvars " << nv_ << "\n";
    os << "basis " << basis_.size() << "\n";
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      const MPoly& g = basis_[k];
      os << sugars_[k] << " " << g.term_count();
      for (std::size_t t = 0; t < g.term_count(); ++t) {
        os << " " << fp_->from_mont(g.coeff(t));
        auto e = g.exp(t);
        for (std::size_t v = 0; v < nv_; ++v) os << " " << unsigned{e[v]};
      }
      os << "\n";
    }
    os << "pairs " << queue_.size() << "\n";
    for (const Pair& p : queue_) os << p.i << " " << p.j << "\n";
    os << "end\n";
    return os.str();
  }

  void restore(const std::string& snap) {
    std::istringstream is(snap);
    auto fail = [](const char* what) -> void {
      throw invalid_argument_error(std::string("bad checkpoint: ") + what);
    };
    std::string tag;
    unsigned version = 0;
    if (!(is >> tag >> version) || tag != "gb-checkpoint") fail("header");
    if (version != 1) fail("unsupported version");
    std::uint64_t prime = 0;
    std::size_t nvars = 0;
    if (!(is >> tag >> prime) || tag != "prime") fail("prime field");
    if (prime != fp_->p()) fail("prime does not match the ring");
    if (!(is >> tag >> nvars) || tag != "nvars") fail("variable count");
    if (nvars != nv_) fail("variable count does not match the ring");
    std::size_t nbasis = 0;
    if (!(is >> tag >> nbasis) || tag != "basis") fail("basis block");
    for (std::size_t k = 0; k < nbasis; ++k) {
      unsigned sugar = 0;
      std::size_t nterms = 0;
      if (!(is >> sugar >> nterms) || nterms == 0) fail("basis element");
      std::vector<std::pair<std::vector<std::uint8_t>, std::uint32_t>> terms;
      terms.reserve(nterms);
      for (std::size_t t = 0; t < nterms; ++t) {
        std::uint64_t c = 0;
        if (!(is >> c) || c == 0 || c >= prime) fail("coefficient");
        std::vector<std::uint8_t> e(nv_);
        for (std::size_t v = 0; v < nv_; ++v) {
          unsigned x = 0;
          if (!(is >> x) || x > 255) fail("exponent");
          e[v] = static_cast<std::uint8_t>(x);
        }
        terms.emplace_back(std::move(e), fp_->from_int(c));
      }
      MPoly g = MPoly::from_terms(*ring_, terms);
      if (g.term_count() != nterms || g.lead_coeff() != fp_->one()) {
        fail("basis element is not monic canonical");
      }
      push_element(std::move(g), sugar);
    }
    std::size_t npairs = 0;
    if (!(is >> tag >> npairs) || tag != "pairs") fail("pair block");
    for (std::size_t t = 0; t < npairs; ++t) {
      std::uint32_t i = 0, j = 0;
      if (!(is >> i >> j) || i >= j || j >= basis_.size()) fail("pair index");
      queue_.insert(make_pair(i, j));
      pending_.insert({i, j});
    }
    if (!(is >> tag) || tag != "end") fail("trailer");
  }

 private:
  struct Pair {
    std::uint32_t i, j;
    unsigned sugar, lcm_deg;
    std::vector<std::uint8_t> lcm;
  };

  struct PairOrder {
    std::size_t nv;
    bool operator()(const Pair& a, const Pair& b) const {
      if (a.sugar != b.sugar) return a.sugar < b.sugar;
      int c = PolyRing::cmp_packed(a.lcm_deg, a.lcm.data(), b.lcm_deg,
                                   b.lcm.data(), nv);
      if (c != 0) return c < 0;
      if (a.j != b.j) return a.j < b.j;
      return a.i < b.i;
    }
  };

  MPoly make_monic(const MPoly& f) const {
    return f.lead_coeff() == fp_->one() ? f : scale(f, fp_->inv(f.lead_coeff()));
  }

  void charge() {
    if (budget_ > 0) --budget_;
    if (stats_) ++stats_->reduction_steps;
  }

  bool overdrawn() const { return budget_ == 0; }

  // Appends a monic element without generating pairs (snapshot restore).
  void push_element(MPoly g, unsigned sugar) {
    masks_.push_back(support_mask(g.lead_exp()));
    tails_.push_back(g.term_count() > 1 ? g.tail() : MPoly::zero(*ring_));
    sugars_.push_back(sugar);
    basis_.push_back(std::move(g));
  }

  void add_element(MPoly g, unsigned sugar) {
    const std::uint32_t t = static_cast<std::uint32_t>(basis_.size());
    push_element(std::move(g), sugar);
    auto lt = basis_[t].lead_exp();
    for (std::uint32_t i = 0; i < t; ++i) {
      auto li = basis_[i].lead_exp();
      bool disjoint = true;
      for (std::size_t v = 0; v < nv_; ++v) {
        if (li[v] && lt[v]) {
          disjoint = false;
          break;
        }
      }
      if (disjoint) {
        // Product criterion: coprime leading monomials reduce to zero.
        if (stats_) ++stats_->pairs_skipped_product;
        continue;
      }
      queue_.insert(make_pair(i, t));
      pending_.insert({i, t});
      if (stats_) ++stats_->pairs_enqueued;
    }
  }

  Pair make_pair(std::uint32_t i, std::uint32_t j) const {
    Pair p;
    p.i = i;
    p.j = j;
    p.lcm.resize(nv_);
    auto ei = basis_[i].lead_exp();
    auto ej = basis_[j].lead_exp();
    unsigned deg = 0;
    for (std::size_t v = 0; v < nv_; ++v) {
      p.lcm[v] = std::max(ei[v], ej[v]);
      deg += p.lcm[v];
    }
    p.lcm_deg = deg;
    p.sugar = std::max(sugars_[i] + (deg - basis_[i].lead_degree()),
                       sugars_[j] + (deg - basis_[j].lead_degree()));
    return p;
  }

  // Chain criterion: drop (i,j) if some other basis element's lead divides
  // the pair lcm and both companion pairs have already left the queue.
  bool chain_skip(const Pair& p) const {
    SupportMask lcm_mask = support_mask({p.lcm.data(), nv_});
    for (std::uint32_t k = 0; k < basis_.size(); ++k) {
      if (k == p.i || k == p.j) continue;
      if (!mask_subset(masks_[k], lcm_mask)) continue;
      if (!exp_divides(basis_[k].lead_exp().data(), p.lcm.data(), nv_)) continue;
      auto key = [](std::uint32_t a, std::uint32_t b) {
        return std::pair<std::uint32_t, std::uint32_t>{std::min(a, b),
                                                       std::max(a, b)};
      };
      if (pending_.count(key(p.i, k)) || pending_.count(key(p.j, k))) continue;
      return true;
    }
    return false;
  }

  // First basis element (skipping `skip`) whose lead divides the monomial.
  int find_reducer(const std::uint8_t* m, unsigned deg, const SupportMask& mask,
                   int skip) const {
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      if (static_cast<int>(k) == skip) continue;
      if (basis_[k].lead_degree() > deg) continue;
      if (!mask_subset(masks_[k], mask)) continue;
      if (exp_divides(basis_[k].lead_exp().data(), m, nv_)) {
        return static_cast<int>(k);
      }
    }
    return -1;
  }

  // Fully reduces the bucket contents against the basis.  Returns the normal
  // form (canonical) and the accumulated sugar degree.
  std::pair<MPoly, unsigned> reduce(Geobucket& bucket, unsigned sugar,
                                    int skip) {
    std::vector<std::uint8_t> out_exps;
    std::vector<std::uint32_t> out_coeffs;
    std::vector<unsigned> out_degs;
    std::vector<std::uint8_t> m(nv_), delta(nv_);
    unsigned deg = 0;
    std::uint32_t c = 0;
    while (bucket.pop_lead(m, deg, c)) {
      SupportMask mm = support_mask({m.data(), nv_});
      int k = find_reducer(m.data(), deg, mm, skip);
      if (k < 0) {
        out_exps.insert(out_exps.end(), m.begin(), m.end());
        out_coeffs.push_back(c);
        out_degs.push_back(deg);
        continue;
      }
      charge();
      auto lk = basis_[static_cast<std::size_t>(k)].lead_exp();
      for (std::size_t v = 0; v < nv_; ++v) {
        delta[v] = static_cast<std::uint8_t>(m[v] - lk[v]);
      }
      unsigned ddeg = deg - basis_[static_cast<std::size_t>(k)].lead_degree();
      sugar = std::max(sugar, sugars_[static_cast<std::size_t>(k)] + ddeg);
      const MPoly& tail = tails_[static_cast<std::size_t>(k)];
      if (!tail.is_zero()) {
        bucket.add_scaled(tail, delta.data(), ddeg, fp_->neg(c));
      }
    }
    return {MPoly::from_canonical(*ring_, std::move(out_exps),
                                  std::move(out_degs), std::move(out_coeffs)),
            sugar};
  }

  void process_pair(const Pair& p) {
    Geobucket bucket(*ring_);
    std::vector<std::uint8_t> delta(nv_);
    auto shift = [&](std::uint32_t idx, std::uint32_t coeff) {
      auto le = basis_[idx].lead_exp();
      unsigned ddeg = 0;
      for (std::size_t v = 0; v < nv_; ++v) {
        delta[v] = static_cast<std::uint8_t>(p.lcm[v] - le[v]);
        ddeg += delta[v];
      }
      bucket.add_scaled(basis_[idx], delta.data(), ddeg, coeff);
    };
    shift(p.i, fp_->one());
    shift(p.j, fp_->neg(fp_->one()));
    auto [h, sugar] = reduce(bucket, p.sugar, -1);
    if (stats_) ++stats_->pairs_reduced;
    if (h.is_zero()) {
      if (stats_) ++stats_->zero_reductions;
      return;
    }
    add_element(make_monic(h), sugar);
  }

  // Minimalize (drop elements whose lead another lead divides), then
  // tail-reduce to a fixpoint and sort by decreasing lead.  The result is the
  // unique reduced basis.  Budget-charged; safe to snapshot mid-flight since
  // every intermediate state still generates the same ideal.
  void interreduce() {
    std::vector<std::size_t> order(basis_.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return PolyRing::cmp_packed(basis_[a].lead_degree(),
                                  basis_[a].lead_exp().data(),
                                  basis_[b].lead_degree(),
                                  basis_[b].lead_exp().data(), nv_) < 0;
    });
    std::vector<bool> alive(basis_.size(), true);
    for (std::size_t k : order) {
      for (std::size_t other = 0; other < basis_.size(); ++other) {
        if (other == k || !alive[other]) continue;
        if (basis_[other].lead_degree() > basis_[k].lead_degree()) continue;
        if (exp_divides(basis_[other].lead_exp().data(),
                        basis_[k].lead_exp().data(), nv_)) {
          alive[k] = false;
          break;
        }
      }
    }
    std::vector<MPoly> kept_basis, kept_tails;
    std::vector<SupportMask> kept_masks;
    std::vector<unsigned> kept_sugars;
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      if (!alive[k]) continue;
      kept_basis.push_back(std::move(basis_[k]));
      kept_tails.push_back(std::move(tails_[k]));
      kept_masks.push_back(masks_[k]);
      kept_sugars.push_back(sugars_[k]);
    }
    basis_ = std::move(kept_basis);
    tails_ = std::move(kept_tails);
    masks_ = std::move(kept_masks);
    sugars_ = std::move(kept_sugars);

    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t k = 0; k < basis_.size(); ++k) {
        if (overdrawn()) {
          // The partially tail-reduced basis still generates the ideal, so it
          // snapshots as-is; resuming re-enters here with the queue empty.
          throw budget_exhausted_error(
              "basis interreduction ran out of reduction steps", snapshot());
        }
        Geobucket bucket(*ring_);
        bucket.add_poly(basis_[k]);
        auto [h, sugar] =
            reduce(bucket, sugars_[k], static_cast<int>(k));
        if (!(h == basis_[k])) {
          assert(!h.is_zero() &&
                 std::equal(h.lead_exp().begin(), h.lead_exp().end(),
                            basis_[k].lead_exp().begin()));
          tails_[k] = h.term_count() > 1 ? h.tail() : MPoly::zero(*ring_);
          basis_[k] = std::move(h);
          sugars_[k] = sugar;
          changed = true;
        }
      }
    }
    order.resize(basis_.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return PolyRing::cmp_packed(basis_[a].lead_degree(),
                                  basis_[a].lead_exp().data(),
                                  basis_[b].lead_degree(),
                                  basis_[b].lead_exp().data(), nv_) > 0;
    });
    std::vector<MPoly> sorted;
    sorted.reserve(order.size());
    for (std::size_t idx : order) sorted.push_back(std::move(basis_[idx]));
    basis_ = std::move(sorted);
  }

  const PolyRing* ring_;
  const FpCtx* fp_;
  std::size_t nv_;
  std::vector<MPoly> basis_;
  std::vector<MPoly> tails_;
  std::vector<SupportMask> masks_;
  std::vector<unsigned> sugars_;
  std::set<Pair, PairOrder> queue_;
  std::set<std::pair<std::uint32_t, std::uint32_t>> pending_;
  std::uint64_t budget_;
  GroebnerStats* stats_;
};

inline Ideal run_engine(const PolyRing& ring, std::vector<MPoly> provenance,
                        const std::vector<MPoly>& seeds,
                        const GroebnerOptions& opt) {
  BuchbergerEngine engine(ring, opt.budget, opt.stats);
  if (!opt.resume.empty()) {
    engine.restore(opt.resume);
  } else {
    engine.seed(seeds);
  }
  Ideal out(ring, std::move(provenance));
  IdealAccess::set_basis(out, engine.run());
  return out;
}

}  // namespace detail

// Computes (or resumes computing) the reduced basis of I's ideal.
inline Ideal groebner_basis(const Ideal& I, const GroebnerOptions& opt = {}) {
  if (I.has_basis() && opt.resume.empty()) return I;
  return detail::run_engine(I.ring(), I.generators(), I.generators(), opt);
}

// Adds generators to an ideal, warm-starting from its basis when present.
inline Ideal extend(const Ideal& I, std::vector<MPoly> new_generators,
                    const GroebnerOptions& opt = {}) {
  for (const MPoly& g : new_generators) {
    if (&g.ring() != &I.ring()) {
      throw context_error("new generator belongs to a different ring");
    }
  }
  std::vector<MPoly> seeds =
      I.has_basis() ? I.basis() : I.generators();
  seeds.insert(seeds.end(), new_generators.begin(), new_generators.end());
  std::vector<MPoly> provenance = I.generators();
  provenance.insert(provenance.end(),
                    std::make_move_iterator(new_generators.begin()),
                    std::make_move_iterator(new_generators.end()));
  return detail::run_engine(I.ring(), std::move(provenance), seeds, opt);
}

// The unique remainder of f modulo the reduced basis of I.
inline MPoly normal_form(const MPoly& f, const Ideal& I) {
  if (&f.ring() != &I.ring()) {
    throw context_error("polynomial belongs to a different ring");
  }
  const std::vector<MPoly>& basis = I.basis();
  const PolyRing& ring = I.ring();
  const FpCtx& fp = ring.fp();
  const std::size_t nv = ring.nvars();
  std::vector<detail::SupportMask> masks;
  std::vector<MPoly> tails;
  masks.reserve(basis.size());
  tails.reserve(basis.size());
  for (const MPoly& g : basis) {
    masks.push_back(detail::support_mask(g.lead_exp()));
    tails.push_back(g.term_count() > 1 ? g.tail() : MPoly::zero(ring));
  }
  detail::Geobucket bucket(ring);
  bucket.add_poly(f);
  std::vector<std::uint8_t> out_exps, m(nv), delta(nv);
  std::vector<std::uint32_t> out_coeffs;
  std::vector<unsigned> out_degs;
  unsigned deg = 0;
  std::uint32_t c = 0;
  while (bucket.pop_lead(m, deg, c)) {
    detail::SupportMask mm = detail::support_mask({m.data(), nv});
    int hit = -1;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (basis[k].lead_degree() > deg) continue;
      if (!detail::mask_subset(masks[k], mm)) continue;
      if (detail::exp_divides(basis[k].lead_exp().data(), m.data(), nv)) {
        hit = static_cast<int>(k);
        break;
      }
    }
    if (hit < 0) {
      out_exps.insert(out_exps.end(), m.begin(), m.end());
      out_coeffs.push_back(c);
      out_degs.push_back(deg);
      continue;
    }
    const MPoly& g = basis[static_cast<std::size_t>(hit)];
    auto le = g.lead_exp();
    for (std::size_t v = 0; v < nv; ++v) {
      delta[v] = static_cast<std::uint8_t>(m[v] - le[v]);
    }
    // Basis elements are monic, so the cancelling multiple is just -c.
    const MPoly& tail = tails[static_cast<std::size_t>(hit)];
    if (!tail.is_zero()) {
      bucket.add_scaled(tail, delta.data(), deg - g.lead_degree(), fp.neg(c));
    }
  }
  return MPoly::from_canonical(ring, std::move(out_exps), std::move(out_degs),
                               std::move(out_coeffs));
}

// True iff the ideal is the whole ring (its reduced basis is {1}).
inline bool is_trivial(const Ideal& I) {
  for (const MPoly& g : I.basis()) {
    if (!g.is_zero() && g.is_constant()) return true;
  }
  return false;
}

// Dimension of R/I as a vector space: the number of monomials outside the
// leading-term ideal.  nullopt when that count is infinite.
inline std::optional<std::uint64_t> quotient_dimension(const Ideal& I) {
  const std::vector<MPoly>& basis = I.basis();
  if (is_trivial(I)) return 0;
  const std::size_t nv = I.ring().nvars();
  std::vector<std::vector<std::uint8_t>> leads;
  leads.reserve(basis.size());
  for (const MPoly& g : basis) {
    auto e = g.lead_exp();
    leads.emplace_back(e.begin(), e.end());
  }
  // Finiteness: every variable must appear as a pure power among the leads.
  for (std::size_t v = 0; v < nv; ++v) {
    bool found = false;
    for (std::size_t k = 0; k < leads.size(); ++k) {
      if (leads[k][v] > 0 && basis[k].lead_degree() == leads[k][v]) {
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  auto standard = [&](const std::vector<std::uint8_t>& m) {
    for (const auto& l : leads) {
      if (detail::exp_divides(l.data(), m.data(), nv)) return false;
    }
    return true;
  };
  std::set<std::vector<std::uint8_t>> seen;
  std::vector<std::vector<std::uint8_t>> stack;
  std::vector<std::uint8_t> origin(nv, 0);
  assert(standard(origin));
  seen.insert(origin);
  stack.push_back(std::move(origin));
  while (!stack.empty()) {
    std::vector<std::uint8_t> m = std::move(stack.back());
    stack.pop_back();
    for (std::size_t v = 0; v < nv; ++v) {
      if (m[v] == 255) throw arithmetic_error("exponent overflow in quotient");
      std::vector<std::uint8_t> up = m;
      ++up[v];
      if (standard(up) && seen.insert(up).second) stack.push_back(std::move(up));
    }
  }
  return seen.size();
}

// Probabilistic squarefree-ness certificate for a zero-dimensional quotient:
// takes a random linear form, computes its minimal polynomial on the cyclic
// subspace generated by 1, and reports whether that polynomial is squarefree.
// A `false` is proof of a non-reduced (fat) scheme; `true` on a random form
// is strong evidence of reducedness.
inline bool radical_spot_check(const Ideal& I, Rng& rng) {
  std::optional<std::uint64_t> dim = quotient_dimension(I);
  if (!dim) {
    throw not_zero_dimensional_error(
        "squarefree spot-check needs a finite-dimensional quotient");
  }
  const std::uint64_t D = *dim;
  if (D == 0) return true;
  const PolyRing& ring = I.ring();
  const FpCtx& fp = ring.fp();
  const std::size_t nv = ring.nvars();

  // Index the standard monomials.
  std::map<std::vector<std::uint8_t>, std::size_t> index;
  {
    const std::vector<MPoly>& basis = I.basis();
    std::vector<std::vector<std::uint8_t>> leads;
    for (const MPoly& g : basis) {
      auto e = g.lead_exp();
      leads.emplace_back(e.begin(), e.end());
    }
    auto standard = [&](const std::vector<std::uint8_t>& m) {
      for (const auto& l : leads) {
        if (detail::exp_divides(l.data(), m.data(), nv)) return false;
      }
      return true;
    };
    std::vector<std::vector<std::uint8_t>> stack{std::vector<std::uint8_t>(nv, 0)};
    index.emplace(stack.back(), 0);
    while (!stack.empty()) {
      std::vector<std::uint8_t> m = std::move(stack.back());
      stack.pop_back();
      for (std::size_t v = 0; v < nv; ++v) {
        std::vector<std::uint8_t> up = m;
        ++up[v];
        if (standard(up) && !index.count(up)) {
          index.emplace(up, index.size());
          stack.push_back(std::move(up));
        }
      }
    }
    assert(index.size() == D);
  }

  // Random linear form with all coefficients nonzero.
  MPoly ell = MPoly::zero(ring);
  for (std::size_t v = 0; v < nv; ++v) {
    std::uint64_t a = 1 + rng.below(fp.p() - 1);
    ell = add(ell, scale(MPoly::variable(ring, v), fp.from_int(a)));
  }

  auto coords = [&](const MPoly& f) {
    std::vector<std::uint32_t> w(D, 0);
    for (std::size_t t = 0; t < f.term_count(); ++t) {
      auto e = f.exp(t);
      auto it = index.find(std::vector<std::uint8_t>(e.begin(), e.end()));
      assert(it != index.end());
      w[it->second] = f.coeff(t);
    }
    return w;
  };

  struct Row {
    std::vector<std::uint32_t> vec;    // echelon row, pivot normalized to 1
    std::vector<std::uint32_t> combo;  // its expansion in powers of ell
    std::size_t pivot;
  };
  std::vector<Row> rows;
  MPoly f = MPoly::constant(ring, fp.one());
  for (std::uint64_t k = 0;; ++k) {
    std::vector<std::uint32_t> w = coords(f);
    std::vector<std::uint32_t> combo(k + 1, 0);
    combo[k] = fp.one();
    for (const Row& r : rows) {
      std::uint32_t factor = w[r.pivot];
      if (factor == 0) continue;
      for (std::size_t t = 0; t < D; ++t) {
        w[t] = fp.sub(w[t], fp.mul(factor, r.vec[t]));
      }
      for (std::size_t t = 0; t < r.combo.size(); ++t) {
        combo[t] = fp.sub(combo[t], fp.mul(factor, r.combo[t]));
      }
    }
    std::size_t pivot = D;
    for (std::size_t t = 0; t < D; ++t) {
      if (w[t] != 0) {
        pivot = t;
        break;
      }
    }
    if (pivot == D) {
      // Dependency: combo holds the monic minimal polynomial of ell on the
      // cyclic subspace of 1.  Squarefree iff gcd(h, h') is constant.
      std::vector<std::uint32_t> h = combo;  // ascending, h[k] == 1
      std::vector<std::uint32_t> hp(h.size() > 1 ? h.size() - 1 : 0);
      for (std::size_t t = 1; t < h.size(); ++t) {
        hp[t - 1] = fp.mul(h[t], fp.from_int(t % fp.p()));
      }
      auto trim = [](std::vector<std::uint32_t>& a) {
        while (!a.empty() && a.back() == 0) a.pop_back();
      };
      trim(h);
      trim(hp);
      while (!hp.empty()) {
        // h mod hp
        std::uint32_t lead_inv = fp.inv(hp.back());
        while (h.size() >= hp.size()) {
          std::uint32_t q = fp.mul(h.back(), lead_inv);
          std::size_t off = h.size() - hp.size();
          for (std::size_t t = 0; t < hp.size(); ++t) {
            h[off + t] = fp.sub(h[off + t], fp.mul(q, hp[t]));
          }
          trim(h);
          if (h.empty()) break;
        }
        std::swap(h, hp);
      }
      return h.size() <= 1;
    }
    if (k == D) break;  // cannot happen: D+1 vectors in a D-dim space
    std::uint32_t inv = fp.inv(w[pivot]);
    Row r;
    r.pivot = pivot;
    r.vec.resize(D);
    for (std::size_t t = 0; t < D; ++t) r.vec[t] = fp.mul(w[t], inv);
    r.combo.resize(combo.size());
    for (std::size_t t = 0; t < combo.size(); ++t) {
      r.combo[t] = fp.mul(combo[t], inv);
    }
    rows.push_back(std::move(r));
    f = normal_form(mul(f, ell), I);
  }
  throw arithmetic_error("minimal-polynomial search failed to terminate");
}

}  // namespace curvecount
