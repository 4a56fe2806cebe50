#pragma once

// Counting driver on top of the cell systems: staged bases per chart,
// weighted dimension bookkeeping, budgeted interruption/resume, divisor
// sampling, and the trial runners that aggregate counts into tables.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "builder.hpp"
#include "curve.hpp"
#include "cyclotomic.hpp"
#include "errors.hpp"
#include "groebner.hpp"
#include "hermitian.hpp"
#include "invariants.hpp"
#include "models.hpp"
#include "mpoly.hpp"
#include "rng.hpp"

namespace curvecount {

// ---------------------------------------------------------------------------
// Shared per-model state: curve context, variable allocation, polynomial
// ring, and the point-independent coprimality generators.  Read-only after
// construction, so one instance serves concurrent trials.
// ---------------------------------------------------------------------------

class ModelSystem {
 public:
  ModelSystem(CurveModel model, std::uint32_t prime)
      : model_(std::move(model)),
        curve_(model_.cse, prime),
        vars_(allocate_variables(model_)),
        ring_(prime, vars_.specs) {
    id_ = "case(" + std::to_string(model_.cse.a) + "," +
          std::to_string(model_.cse.b) + "," + std::to_string(model_.cse.c) +
          ") n=" + std::to_string(model_.n) + " k=" + std::to_string(model_.k) +
          " det=" + std::to_string(hform_det(model_.H)) + " M=";
    for (const auto& [pr, md] : model_.M) {
      id_ += std::to_string(pr.first) + std::to_string(pr.second) + ":";
      for (unsigned l = 0; l < model_.cse.a; ++l)
        for (unsigned r = 0; r < model_.cse.b; ++r)
          id_ += static_cast<char>('0' + md.at(l, r));
      id_ += ";";
    }
  }

  ModelSystem(const ModelSystem&) = delete;
  ModelSystem& operator=(const ModelSystem&) = delete;

  const CurveModel& model() const { return model_; }
  const CurveCtx& curve() const { return curve_; }
  const GaugedVariables& vars() const { return vars_; }
  const PolyRing& ring() const { return ring_; }
  const std::string& model_id() const { return id_; }

  // Point-independent, built on first use; safe under concurrent callers.
  const std::vector<MPoly>& gg_generators() const {
    std::call_once(gg_once_, [this] {
      gg_ = inequality_generators_GG(model_, ring_, vars_);
    });
    return gg_;
  }

 private:
  CurveModel model_;
  CurveCtx curve_;
  GaugedVariables vars_;
  PolyRing ring_;
  std::string id_;
  mutable std::once_flag gg_once_;
  mutable std::vector<MPoly> gg_;
};

// ---------------------------------------------------------------------------
// Reports and options
// ---------------------------------------------------------------------------

struct CellReport {
  std::size_t r = 0;
  unsigned stage_reached = 0;
  bool trivial = false;           // the chart carries no solutions at all
  bool zero_dimensional = true;   // false: counted as 0 and flagged
  std::uint64_t quotient_dimension = 0;
  unsigned weight = 1;            // rescaling weight of the pinned coefficient
  std::uint64_t cell_count = 0;   // quotient_dimension / weight
  bool division_exact = true;     // false: counted as 0 and flagged
  bool postverify_ran = false;
  std::uint64_t postverify_rejected = 0;
  double seconds = 0.0;
};

struct CountReport {
  std::string model_id;
  std::string point_id;
  std::uint32_t prime = 0;
  unsigned final_stage = 3;
  std::vector<CellReport> cells;
  std::uint64_t total = 0;
  bool multiplicity_anomaly = false;
  bool divisor_degenerate = false;
  bool incomplete = false;
  std::size_t resume_cell = 0;    // meaningful when incomplete
  unsigned resume_stage = 0;      // stage being attempted at interruption
  std::string resume_snapshot;    // engine state at interruption (diagnostic)
  GroebnerStats stats;
  unsigned resamples = 0;
  double seconds = 0.0;
};

struct CountOptions {
  // Reduction steps one count_curves call may spend across all cells.
  std::uint64_t budget = std::numeric_limits<std::uint64_t>::max();
  unsigned final_stage = 3;
  // At final_stage 2: re-check survivors against the coordinate-coprimality
  // extension, so the reported count matches the full pipeline.
  bool postverify = true;
  // Use the symbolic coordinate witnesses instead of reducing each
  // resultant modulo the stage-2 basis first (slower, same ideal).
  bool symbolic_pq = false;
  // Partial report from an interrupted run over the same inputs; completed
  // cells are kept and the interrupted cell restarts from its first stage.
  const CountReport* resume = nullptr;
  // Called with the running report after every finished cell.
  std::function<void(const CountReport&)> progress;
};

// ---------------------------------------------------------------------------
// Formatting and point sampling
// ---------------------------------------------------------------------------

inline std::string format_cyc(const CycInt& v) {
  if (v.t == 0) return std::to_string(v.s);
  std::string out;
  if (v.s != 0) {
    out += std::to_string(v.s);
    if (v.t > 0) out += "+";
  }
  if (v.t == 1)
    out += "z";
  else if (v.t == -1)
    out += "-z";
  else
    out += std::to_string(v.t) + "z";
  return out;
}

inline std::string format_divisor(std::span<const CycInt> v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_cyc(v[i]);
  }
  return out + ")";
}

inline std::string format_point_tuple(const CurveCtx& E,
                                      const std::vector<CurvePoint>& pts) {
  const FpCtx& fp = E.field();
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ";";
    if (pts[i].at_infinity)
      out += "inf" + std::to_string(pts[i].inf_index);
    else
      out += std::to_string(fp.from_mont(pts[i].x)) + "," +
             std::to_string(fp.from_mont(pts[i].y));
  }
  return out;
}

// A tuple is generic when all points are affine with nonzero coordinates and
// no two coordinates are related by a root of unity, i.e. every pair scalar
// of every degree matrix over this case is nonzero.
inline bool tuple_is_generic(const CurveCtx& E,
                             const std::vector<CurvePoint>& pts) {
  const FpCtx& fp = E.field();
  const CurveCase& cse = E.curve_case();
  for (const CurvePoint& p : pts)
    if (p.at_infinity || p.x == 0 || p.y == 0) return false;
  const unsigned stepP = cse.c / cse.a, stepQ = cse.c / cse.b;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      for (unsigned l = 0; l < cse.a; ++l)
        if (fp.sub(pts[i].x, fp.mul(E.zeta_pow(l * stepP), pts[j].x)) == 0)
          return false;
      for (unsigned r = 0; r < cse.b; ++r)
        if (fp.sub(pts[i].y, fp.mul(E.zeta_pow(r * stepQ), pts[j].y)) == 0)
          return false;
    }
  return true;
}

struct SampledTuple {
  std::vector<CurvePoint> points;
  unsigned resamples = 0;
};

inline SampledTuple sample_generic_tuple(const CurveCtx& E, unsigned n,
                                         Rng& rng,
                                         unsigned max_attempts = 1000) {
  SampledTuple out;
  for (unsigned att = 0; att < max_attempts; ++att) {
    std::vector<CurvePoint> pts;
    pts.reserve(n);
    for (unsigned i = 0; i < n; ++i) pts.push_back(E.sample_point(rng));
    if (tuple_is_generic(E, pts)) {
      out.points = std::move(pts);
      return out;
    }
    ++out.resamples;
  }
  throw degenerate_input_error("generic tuple sampling exhausted its retries");
}

// ---------------------------------------------------------------------------
// Per-point cached construction
// ---------------------------------------------------------------------------

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

inline std::uint64_t remaining_budget(const CountOptions& opt,
                                      const GroebnerStats& st) {
  if (opt.budget == std::numeric_limits<std::uint64_t>::max())
    return opt.budget;
  return st.reduction_steps >= opt.budget ? 0
                                          : opt.budget - st.reduction_steps;
}

// Cell-free pieces shared by every chart of one (model, point tuple) pair.
struct PointSystem {
  std::vector<MPoly> elim;
  // Sylvester entries of the reconstructed coordinate polynomials, one
  // matrix per point; filled when the reduced-resultant path is needed.
  std::vector<std::vector<std::vector<MPoly>>> syl;
  std::vector<MPoly> pq_symbolic;  // filled for the symbolic path
};

inline PointSystem prepare_point(const ModelSystem& sys,
                                 const std::vector<CurvePoint>& pts,
                                 const CountOptions& opt) {
  const CurveCtx& E = sys.curve();
  const CurveModel& m = sys.model();
  const PolyRing& R = sys.ring();
  const GaugedVariables& gv = sys.vars();
  PointSystem ps;
  ps.elim = eliminate_PQ(E, m, R, gv, pts);
  const bool reduced = (opt.final_stage >= 3 && !opt.symbolic_pq) ||
                       (opt.final_stage == 2 && opt.postverify);
  if (reduced) {
    ReconstructedPQ rec = reconstruct_PQ(E, m, R, gv, pts);
    for (unsigned i = 0; i < m.n; ++i)
      ps.syl.push_back(sylvester_matrix(R, rec.P[i], rec.Q[i]));
  }
  if (opt.final_stage >= 3 && opt.symbolic_pq)
    ps.pq_symbolic = inequality_generators_PQ(E, m, R, gv, pts);
  return ps;
}

inline std::vector<MPoly> chart_pins(const PolyRing& R, const Cell& cell) {
  std::vector<MPoly> out;
  out.reserve(cell.r + 1);
  for (std::size_t v = 0; v < cell.r; ++v)
    out.push_back(MPoly::variable(R, v));
  out.push_back(
      sub(MPoly::variable(R, cell.r), MPoly::constant(R, R.fp().one())));
  return out;
}

inline std::vector<MPoly> celled(const std::vector<MPoly>& gens,
                                 const GaugedVariables& gv, const Cell& cell) {
  std::vector<MPoly> out;
  out.reserve(gens.size());
  for (const MPoly& g : gens) out.push_back(cell_substitute(g, gv, cell));
  return out;
}

// Identical, generator for generator, to the one-shot cell construction;
// stage 3 here means the symbolic witness form.
inline std::vector<MPoly> assembled_generators(const ModelSystem& sys,
                                               const PointSystem& ps,
                                               const Cell& cell,
                                               unsigned stage) {
  const GaugedVariables& gv = sys.vars();
  std::vector<MPoly> gens = chart_pins(sys.ring(), cell);
  auto append = [&gens](std::vector<MPoly> more) {
    for (MPoly& g : more) gens.push_back(std::move(g));
  };
  append(celled(ps.elim, gv, cell));
  if (stage >= 2) append(celled(sys.gg_generators(), gv, cell));
  if (stage >= 3) append(celled(ps.pq_symbolic, gv, cell));
  return gens;
}

// Witness variables untouched below the final stage are spectators: pin them
// so the quotient dimension measures only the constrained coordinates.
inline std::vector<MPoly> spectator_pins(const ModelSystem& sys,
                                         unsigned stage) {
  const PolyRing& R = sys.ring();
  const GaugedVariables& gv = sys.vars();
  std::size_t from = R.nvars();
  if (stage <= 1)
    from = gv.coeff_count;
  else if (stage == 2)
    from = gv.pq_offset;
  std::vector<MPoly> out;
  for (std::size_t v = from; v < R.nvars(); ++v)
    out.push_back(MPoly::variable(R, v));
  return out;
}

// Coordinate-coprimality generators with each resultant first reduced
// modulo the current basis, keeping the witnesses small.
inline std::vector<MPoly> reduced_pq(const ModelSystem& sys,
                                     const PointSystem& ps, const Cell& cell,
                                     const Ideal& I) {
  const PolyRing& R = sys.ring();
  const GaugedVariables& gv = sys.vars();
  const FpCtx& fp = R.fp();
  std::vector<MPoly> out;
  for (std::size_t i = 0; i < ps.syl.size(); ++i) {
    std::vector<std::vector<MPoly>> mat = ps.syl[i];
    for (auto& row : mat)
      for (MPoly& e : row) e = cell_substitute(e, gv, cell);
    MPoly det = determinant_modulo(R, std::move(mat), I);
    out.push_back(sub(mul(MPoly::variable(R, gv.pq_offset + i), det),
                      MPoly::constant(R, fp.one())));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Counting through one point tuple
// ---------------------------------------------------------------------------

inline CountReport count_curves(const ModelSystem& sys,
                                const std::vector<CurvePoint>& pts,
                                const CountOptions& opt = {}) {
  if (opt.final_stage < 1 || opt.final_stage > 3)
    throw invalid_argument_error("final stage must be 1, 2 or 3");
  const PolyRing& R = sys.ring();
  const GaugedVariables& gv = sys.vars();
  const auto wall0 = std::chrono::steady_clock::now();

  CountReport rep;
  rep.model_id = sys.model_id();
  rep.point_id = format_point_tuple(sys.curve(), pts);
  rep.prime = R.fp().p();
  rep.final_stage = opt.final_stage;

  std::size_t start = 1;
  if (opt.resume != nullptr) {
    const CountReport& prev = *opt.resume;
    if (!prev.incomplete || prev.model_id != rep.model_id ||
        prev.point_id != rep.point_id || prev.prime != rep.prime ||
        prev.final_stage != rep.final_stage)
      throw invalid_argument_error(
          "resume report does not match this computation");
    for (const CellReport& c : prev.cells) {
      if (c.r >= prev.resume_cell) continue;
      rep.cells.push_back(c);
      rep.total += c.cell_count;
      if (!c.zero_dimensional || !c.division_exact)
        rep.multiplicity_anomaly = true;
    }
    rep.resamples = prev.resamples;
    start = prev.resume_cell;
  }

  detail::PointSystem ps = detail::prepare_point(sys, pts, opt);

  for (std::size_t r = start; r < gv.coeff_count; ++r) {
    const Cell cell{r};
    CellReport c;
    c.r = r;
    c.weight = gv.specs[r].weight;
    const auto cell0 = std::chrono::steady_clock::now();
    unsigned attempting = 1;
    try {
      GroebnerOptions go;
      go.stats = &rep.stats;
      go.budget = detail::remaining_budget(opt, rep.stats);
      Ideal I = groebner_basis(
          Ideal(R, detail::assembled_generators(sys, ps, cell, 1)), go);
      c.stage_reached = 1;
      if (opt.final_stage >= 2 && !is_trivial(I)) {
        attempting = 2;
        std::vector<MPoly> gg = detail::celled(sys.gg_generators(), gv, cell);
        if (!gg.empty()) {
          go.budget = detail::remaining_budget(opt, rep.stats);
          I = extend(I, std::move(gg), go);
        }
        c.stage_reached = 2;
      }
      if (opt.final_stage >= 3 && !is_trivial(I)) {
        attempting = 3;
        go.budget = detail::remaining_budget(opt, rep.stats);
        I = extend(I,
                   opt.symbolic_pq
                       ? detail::celled(ps.pq_symbolic, gv, cell)
                       : detail::reduced_pq(sys, ps, cell, I),
                   go);
        c.stage_reached = 3;
      }
      c.trivial = is_trivial(I);

      std::optional<std::uint64_t> dim = 0;
      if (!c.trivial) {
        std::vector<MPoly> pins = detail::spectator_pins(sys, opt.final_stage);
        if (pins.empty()) {
          dim = quotient_dimension(I);
        } else {
          go.budget = detail::remaining_budget(opt, rep.stats);
          dim = quotient_dimension(extend(I, std::move(pins), go));
        }
      }

      if (!c.trivial && opt.final_stage == 2 && opt.postverify && dim &&
          *dim > 0) {
        go.budget = detail::remaining_budget(opt, rep.stats);
        Ideal verified = extend(I, detail::reduced_pq(sys, ps, cell, I), go);
        std::optional<std::uint64_t> strict = quotient_dimension(verified);
        c.postverify_ran = true;
        if (strict && *strict <= *dim)
          c.postverify_rejected = *dim - *strict;
        else if (strict)
          rep.multiplicity_anomaly = true;  // verification grew the count
        dim = strict;
      }

      if (!dim) {
        c.zero_dimensional = false;
      } else {
        c.quotient_dimension = *dim;
        if (*dim % c.weight != 0)
          c.division_exact = false;
        else
          c.cell_count = *dim / c.weight;
      }
      if (!c.zero_dimensional || !c.division_exact)
        rep.multiplicity_anomaly = true;
    } catch (const budget_exhausted_error& e) {
      rep.incomplete = true;
      rep.resume_cell = r;
      rep.resume_stage = attempting;
      rep.resume_snapshot = e.snapshot;
      break;
    }
    c.seconds = detail::seconds_since(cell0);
    rep.total += c.cell_count;
    rep.cells.push_back(std::move(c));
    if (opt.progress) opt.progress(rep);
  }
  rep.seconds = detail::seconds_since(wall0);
  return rep;
}

// ---------------------------------------------------------------------------
// Counting through a sampled divisor point
// ---------------------------------------------------------------------------

inline CountReport count_on_divisor(const ModelSystem& sys,
                                    std::span<const CycInt> v, Rng& rng,
                                    const CountOptions& opt = {},
                                    unsigned max_attempts = 400) {
  const CurveCtx& E = sys.curve();
  if (v.size() != sys.model().n)
    throw invalid_argument_error("divisor length must match the point count");
  const auto wall0 = std::chrono::steady_clock::now();
  PointFilter generic = [&E](const std::vector<CurvePoint>& pts) {
    return tuple_is_generic(E, pts);
  };
  try {
    DivisorSample s = E.sample_divisor_point(v, rng, generic, max_attempts);
    CountReport rep = count_curves(sys, s.points, opt);
    rep.resamples += s.resamples;
    return rep;
  } catch (const degenerate_input_error&) {
    // The genericity filter never passed.  A divisor that forces two
    // coordinates onto the same root-of-unity line kills a pair scalar at
    // every one of its points, and a vanishing scalar is incompatible with
    // the fixed row sums of the degree matrices, so the count is zero.
    // Confirm the vanishing is structural before reporting that.
    PointFilter affine = [](const std::vector<CurvePoint>& pts) {
      for (const CurvePoint& p : pts)
        if (p.at_infinity || p.x == 0 || p.y == 0) return false;
      return true;
    };
    bool structural = true;
    for (unsigned probe = 0; probe < 8 && structural; ++probe) {
      try {
        DivisorSample s = E.sample_divisor_point(v, rng, affine, max_attempts);
        structural = !tuple_is_generic(E, s.points);
      } catch (const degenerate_input_error&) {
        // not even affine nonzero coordinates are reachable
      }
    }
    if (!structural) throw;
    CountReport rep;
    rep.model_id = sys.model_id();
    rep.point_id = "divisor:" + format_divisor(v);
    rep.prime = sys.ring().fp().p();
    rep.final_stage = opt.final_stage;
    rep.divisor_degenerate = true;
    rep.resamples = max_attempts;
    rep.seconds = detail::seconds_since(wall0);
    return rep;
  }
}

// ---------------------------------------------------------------------------
// Trial aggregation
// ---------------------------------------------------------------------------

struct TrialSummary {
  std::uint64_t majority = 0;
  unsigned outliers = 0;
};

inline TrialSummary majority_of(std::span<const std::uint64_t> counts) {
  if (counts.empty())
    throw invalid_argument_error("majority of an empty trial set");
  std::map<std::uint64_t, unsigned> freq;
  for (std::uint64_t c : counts) ++freq[c];
  std::uint64_t best = 0;
  unsigned best_freq = 0;
  for (const auto& [value, f] : freq) {
    if (f > best_freq) {  // ascending scan: a frequency tie keeps the smaller
      best_freq = f;
      best = value;
    }
  }
  TrialSummary s;
  s.majority = best;
  s.outliers = static_cast<unsigned>(counts.size()) - best_freq;
  return s;
}

struct TrialResult {
  unsigned trial = 0;
  std::uint64_t count = 0;
  bool anomaly = false;
  bool incomplete = false;
  bool degenerate = false;
  unsigned resamples = 0;
  double seconds = 0.0;
  bool redone = false;          // re-ran on a fresh tuple after disagreeing
  std::uint64_t redo_count = 0;  // the re-run's count (diagnostic only)
};

// Checkpoint hooks for long runs.  `preload` may fill a previously stored
// result and return true to skip recomputation; `on_trial` observes each
// finished (or re-run) trial.  Both are serialized by the runner.
struct RunHooks {
  std::function<bool(const std::string& key, unsigned trial, TrialResult& out)>
      preload;
  std::function<void(const std::string& key, unsigned trial,
                     const TrialResult& res)>
      on_trial;
};

struct AssignmentReport {
  std::size_t assignment = 0;
  std::string model_id;
  std::vector<TrialResult> trials;
  std::uint64_t majority = 0;
  unsigned outliers = 0;    // completed trials disagreeing with the majority
  unsigned unresolved = 0;  // re-runs that still disagree
};

namespace detail {

inline TrialResult run_single_trial(const ModelSystem& sys,
                                    const std::vector<CycInt>* divisor,
                                    std::uint64_t seed, std::uint64_t tag0,
                                    std::uint64_t tag1, unsigned trial,
                                    std::uint64_t fork_tag,
                                    const CountOptions& opt) {
  TrialResult res;
  res.trial = trial;
  Rng rng = Rng(seed).fork(tag0).fork(tag1).fork(fork_tag);
  const auto t0 = std::chrono::steady_clock::now();
  CountReport rep;
  if (divisor != nullptr) {
    rep = count_on_divisor(sys, *divisor, rng, opt);
  } else {
    SampledTuple tup = sample_generic_tuple(sys.curve(), sys.model().n, rng);
    rep = count_curves(sys, tup.points, opt);
    rep.resamples += tup.resamples;
  }
  res.count = rep.total;
  res.anomaly = rep.multiplicity_anomaly;
  res.incomplete = rep.incomplete;
  res.degenerate = rep.divisor_degenerate;
  res.resamples = rep.resamples;
  res.seconds = seconds_since(t0);
  return res;
}

inline AssignmentReport run_trials(const ModelSystem& sys,
                                   const std::vector<CycInt>* divisor,
                                   unsigned trials, std::uint64_t seed,
                                   std::uint64_t tag0, std::uint64_t tag1,
                                   unsigned jobs, const CountOptions& opt,
                                   const RunHooks* hooks) {
  AssignmentReport ar;
  ar.assignment = static_cast<std::size_t>(tag1);
  ar.model_id = sys.model_id();
  std::string key = ar.model_id;
  if (divisor != nullptr) key += " D=" + format_divisor(*divisor);
  ar.trials.assign(trials, TrialResult{});

  std::mutex hook_mu;
  std::atomic<unsigned> next{0};
  std::vector<std::exception_ptr> errors(trials);
  auto worker = [&]() {
    for (;;) {
      const unsigned t = next.fetch_add(1);
      if (t >= trials) return;
      try {
        bool loaded = false;
        if (hooks && hooks->preload) {
          TrialResult pre;
          {
            std::lock_guard<std::mutex> lock(hook_mu);
            loaded = hooks->preload(key, t, pre);
          }
          if (loaded) {
            pre.trial = t;
            ar.trials[t] = pre;
          }
        }
        if (!loaded) {
          ar.trials[t] =
              run_single_trial(sys, divisor, seed, tag0, tag1, t, t, opt);
          if (hooks && hooks->on_trial) {
            std::lock_guard<std::mutex> lock(hook_mu);
            hooks->on_trial(key, t, ar.trials[t]);
          }
        }
      } catch (...) {
        errors[t] = std::current_exception();
        return;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min(jobs, trials));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<std::uint64_t> counts;
  for (const TrialResult& tr : ar.trials)
    if (!tr.incomplete) counts.push_back(tr.count);
  if (!counts.empty()) {
    TrialSummary s = majority_of(counts);
    ar.majority = s.majority;
    ar.outliers = s.outliers;
  }
  // Re-run each disagreeing trial once on a fresh tuple: agreement points at
  // an unlucky sample, continued disagreement is surfaced as unresolved.
  for (TrialResult& tr : ar.trials) {
    if (tr.incomplete || tr.redone || tr.count == ar.majority) continue;
    TrialResult redo = run_single_trial(sys, divisor, seed, tag0, tag1,
                                        tr.trial, trials + tr.trial, opt);
    tr.redone = true;
    tr.redo_count = redo.count;
    tr.seconds += redo.seconds;
    tr.resamples += redo.resamples;
    if (hooks && hooks->on_trial) {
      std::lock_guard<std::mutex> lock(hook_mu);
      hooks->on_trial(key, tr.trial, tr);
    }
  }
  for (const TrialResult& tr : ar.trials)
    if (tr.redone && tr.redo_count != ar.majority) ++ar.unresolved;
  return ar;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment runners
// ---------------------------------------------------------------------------

struct ClassReport {
  HForm H;
  std::int64_t det = 0;
  std::vector<AssignmentReport> assignments;
  std::uint64_t aggregate = 0;  // sum of the assignment majorities
  unsigned outliers = 0;
};

struct TableReport {
  CurveCase cse;
  unsigned n = 0;
  unsigned k = 0;
  std::uint32_t prime = 0;
  std::uint64_t seed = 0;
  unsigned trials = 0;
  std::vector<ClassReport> classes;  // ascending determinant
  double seconds = 0.0;
};

inline TableReport run_table(const CurveCase& cse, unsigned n, unsigned trials,
                             std::uint32_t prime, std::uint64_t seed,
                             unsigned jobs = 1, const CountOptions& opt = {},
                             const RunHooks* hooks = nullptr) {
  if (trials == 0)
    throw invalid_argument_error("at least one trial is required");
  TableReport rep;
  rep.cse = cse;
  rep.n = n;
  rep.k = expected_k(cse.c, n);
  rep.prime = prime;
  rep.seed = seed;
  rep.trials = trials;
  const auto wall0 = std::chrono::steady_clock::now();
  std::vector<HForm> classes = classify_forms(cse, n, rep.k);
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    ClassReport cr;
    cr.H = classes[ci];
    cr.det = hform_det(classes[ci]);
    std::vector<CurveModel> fam = models::family(cse, classes[ci]);
    for (std::size_t ai = 0; ai < fam.size(); ++ai) {
      ModelSystem sys(fam[ai], prime);
      AssignmentReport ar = detail::run_trials(sys, nullptr, trials, seed, ci,
                                               ai, jobs, opt, hooks);
      cr.aggregate += ar.majority;
      cr.outliers += ar.outliers;
      cr.assignments.push_back(std::move(ar));
    }
    rep.classes.push_back(std::move(cr));
  }
  rep.seconds = detail::seconds_since(wall0);
  return rep;
}

struct ConjectureRow {
  std::string label;
  std::string model_id;
  bool on_divisor = false;
  std::vector<TrialResult> trials;
  std::uint64_t majority = 0;
  unsigned outliers = 0;
  unsigned unresolved = 0;
  bool success = false;
};

struct ConjectureReport {
  unsigned id = 0;
  std::uint32_t prime = 0;
  std::uint64_t seed = 0;
  unsigned trials = 0;
  unsigned allowance = 1;
  std::vector<ConjectureRow> rows;
  bool success = false;
  double seconds = 0.0;
};

// 1: the rank-four chain form, through generic tuples and through points of
//    the divisor (0,1,2,1).  2: the rank-five form through generic tuples.
// 3: the rank-five form through points of the divisor (1,0,z,0,-1).
// Each row succeeds when the majority count is exactly one and at most
// `allowance` trials disagree.
inline ConjectureReport run_conjecture(unsigned id, unsigned trials,
                                       std::uint32_t prime, std::uint64_t seed,
                                       unsigned jobs = 1,
                                       const CountOptions& opt = {},
                                       unsigned allowance = 1,
                                       const RunHooks* hooks = nullptr) {
  if (trials == 0)
    throw invalid_argument_error("at least one trial is required");
  if (id < 1 || id > 3)
    throw invalid_argument_error("conjecture id must be 1, 2 or 3");
  struct RowSpec {
    std::string label;
    std::optional<std::vector<CycInt>> divisor;
  };
  std::vector<RowSpec> rows;
  CurveModel model = (id == 1) ? models::model_236_n4(144)
                               : models::model_236_det13824();
  if (id == 1) {
    rows.push_back({"generic", std::nullopt});
    rows.push_back({"divisor(0,1,2,1)",
                    std::vector<CycInt>{{0, 0}, {1, 0}, {2, 0}, {1, 0}}});
  } else if (id == 2) {
    rows.push_back({"generic", std::nullopt});
  } else {
    rows.push_back(
        {"divisor(1,0,z,0,-1)",
         std::vector<CycInt>{{1, 0}, {0, 0}, {0, 1}, {0, 0}, {-1, 0}}});
  }

  ConjectureReport rep;
  rep.id = id;
  rep.prime = prime;
  rep.seed = seed;
  rep.trials = trials;
  rep.allowance = allowance;
  const auto wall0 = std::chrono::steady_clock::now();
  ModelSystem sys(std::move(model), prime);
  rep.success = true;
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    AssignmentReport ar = detail::run_trials(
        sys, rows[ri].divisor ? &*rows[ri].divisor : nullptr, trials, seed,
        100 + id, ri, jobs, opt, hooks);
    ConjectureRow row;
    row.label = rows[ri].label;
    row.model_id = ar.model_id;
    row.on_divisor = rows[ri].divisor.has_value();
    row.trials = std::move(ar.trials);
    row.majority = ar.majority;
    row.outliers = ar.outliers;
    row.unresolved = ar.unresolved;
    row.success = (row.majority == 1) && (row.outliers <= allowance);
    rep.success = rep.success && row.success;
    rep.rows.push_back(std::move(row));
  }
  rep.seconds = detail::seconds_since(wall0);
  return rep;
}

}  // namespace curvecount
