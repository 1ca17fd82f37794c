#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smgo/candidates.hpp"
#include "smgo/problems.hpp"
#include "smgo/surrogate.hpp"

namespace smgo {

struct SolverConfig {
    double alpha = 0.005;          // improvement threshold factor
    double delta = 0.20;           // risk factor blending lower bound vs central
    double beta = 0.1;             // uncertainty reward in the exploitation cost
    double phi = 1e-6;             // age weight in the exploration merit
    unsigned grid_b = 5;           // segment grid divisor
    std::size_t sobol_count = 500; // seed candidates and per-iteration fillers
    double trust_max = 0.1;        // initial and maximum trust size
    double trust_shrink = 0.5;     // contraction factor
    double trust_min = 9.765625e-5;
    std::size_t budget = 500;      // total evaluations including the start
    std::uint64_t seed = 0;
    bool noisy = false;
    double noise_radius = 0.0;     // 0 = 0.1 * sqrt(D)
    double gamma_floor = 1e-6;
    double rho_floor = 1e-6;
    std::optional<Vec> start;      // problem units; box center when absent

    void validate() const {
        if (!(alpha >= 0.0) || !(beta >= 0.0) || !(phi >= 0.0))
            throw std::invalid_argument("config: alpha, beta, phi must be >= 0");
        if (!(delta >= 0.0 && delta <= 1.0))
            throw std::invalid_argument("config: delta must be in [0, 1]");
        if (grid_b < 2)
            throw std::invalid_argument("config: grid divisor must be >= 2");
        if (!(trust_shrink > 0.0 && trust_shrink < 1.0))
            throw std::invalid_argument("config: trust shrink must be in (0, 1)");
        if (!(trust_min > 0.0 && trust_min <= trust_max && trust_max <= 1.0))
            throw std::invalid_argument("config: need 0 < trust_min <= trust_max <= 1");
        if (budget == 0)
            throw std::invalid_argument("config: budget must be >= 1");
        if (!(gamma_floor > 0.0) || !(rho_floor > 0.0))
            throw std::invalid_argument("config: estimate floors must be > 0");
        if (noise_radius < 0.0)
            throw std::invalid_argument("config: noise radius must be >= 0");
    }
};

/// Infinity-norm box around the incumbent best point.
struct TrustRegion {
    Vec center;
    double size = 0.0;
};

enum class Mode { initial, exploit, explore };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::initial: return "initial";
        case Mode::exploit: return "exploit";
        default: return "explore";
    }
}

/// What the sample chosen in the previous iteration turned out to be.
struct StepOutcome {
    Mode mode = Mode::explore;
    double new_z = 0.0;
    bool new_feasible = false;
    double best_z = 0.0;  // incumbent before this sample arrived
    double gamma = 0.0;   // estimate in force when the point was chosen
};

/// Contract the region after exploration or a failed exploitation, expand it
/// after an exploitation that improved by the full threshold, re-center on
/// the incumbent either way.
inline void update_trust(TrustRegion& tr, const StepOutcome& outcome,
                         const SolverConfig& cfg, const Vec& new_center) {
    if (outcome.mode == Mode::explore || outcome.new_z > outcome.best_z)
        tr.size = std::max(cfg.trust_min, cfg.trust_shrink * tr.size);
    else if (outcome.new_feasible &&
             outcome.new_z <= outcome.best_z - cfg.alpha * outcome.gamma)
        tr.size = std::min(cfg.trust_max, tr.size / cfg.trust_shrink);
    tr.center = new_center;
}

/// Expected-improvement gate for an exploitation candidate: its optimistic
/// bound must undercut the incumbent by alpha * gamma.
inline bool improvement_test(double lower_bound, double best_z, double alpha,
                             double gamma) {
    return lower_bound <= best_z - alpha * gamma;
}

/// Exploitation ranks candidates by central estimate minus an uncertainty
/// reward.
inline double exploitation_cost(const BoundsEval& f, double beta) {
    return f.central - beta * f.uncertainty;
}

/// The distance-scaled exploration merit. The cautious term rewards objective
/// uncertainty where the risk-blended constraints look satisfiable; the risk
/// term rewards constraint uncertainty, amplified where the central estimates
/// already look feasible. A tiny age bonus guarantees starved candidates
/// eventually win.
inline double exploration_merit(const PointEval& ev, const SurrogateState& state,
                                double delta, double phi, double age) {
    const double w_lambda =
        delta_feasible_bounds(ev.g, delta) ? ev.f.uncertainty : 0.0;
    double w_pi = 0.0;
    int sat = 0;
    for (std::size_t s = 0; s < ev.g.size(); ++s) {
        w_pi += ev.g[s].uncertainty / state.rho[s];
        if (ev.g[s].central >= 0.0)
            ++sat;
    }
    const double w_g = std::exp2(static_cast<double>(sat));
    return ev.dmin * ((1.0 - delta) * w_lambda + delta * w_pi * w_g) + phi * age;
}

struct IterationRecord {
    std::size_t n = 0;  // 1-based evaluation index
    Vec x;              // problem units
    double z = 0.0;
    Vec c;
    Mode mode = Mode::initial;
    bool feasible = false;
    std::optional<double> z_best;
    std::optional<double> trust_size;
    double gamma = 0.0;
    Vec rho;
    double eps_f = 0.0;
    Vec eps_c;
    double elapsed_ms = 0.0;
};

enum class RunStatus { ok, no_feasible, evaluation_failed };

struct RunResult {
    RunStatus status = RunStatus::no_feasible;
    std::vector<IterationRecord> records;
    bool found = false;
    Vec best_x;  // problem units
    double best_z = 0.0;
    Vec best_c;
    std::string error;
};

/// Driver for one optimization run. Use `run` with an evaluation callback,
/// or drive it manually through `ask` / `tell`.
class Solver {
  public:
    Solver(const ProblemSpec& problem, SolverConfig cfg)
        : problem_(problem), cfg_(std::move(cfg)), dim_(problem.dimension),
          n_con_(problem.n_constraints), data_(problem.dimension,
                                               problem.n_constraints),
          state_(problem.n_constraints),
          store_(seed_sobol(problem.dimension, cfg_.sobol_count, cfg_.seed)) {
        cfg_.validate();
        state_.gamma = cfg_.gamma_floor;
        state_.gamma_floor = cfg_.gamma_floor;
        state_.rho.assign(n_con_, cfg_.rho_floor);
        state_.rho_floor = cfg_.rho_floor;

        cs_cols_.resize(n_con_);
        pending_x_.assign(dim_, 0.5);
        if (cfg_.start) {
            if (cfg_.start->size() != dim_)
                throw std::invalid_argument("config: start dimension mismatch");
            for (std::size_t d = 0; d < dim_; ++d) {
                const double u = normalize(d, (*cfg_.start)[d]);
                if (u < -1e-9 || u > 1.0 + 1e-9)
                    throw std::invalid_argument("config: start outside the box");
                pending_x_[d] = std::min(1.0, std::max(0.0, u));
            }
        }
        pending_mode_ = Mode::initial;
        pending_gamma_ = state_.gamma;
        reset_caches();
        last_clock_ = Clock::now();
    }

    const ProblemSpec& problem() const { return problem_; }
    const SolverConfig& config() const { return cfg_; }
    const Dataset& dataset() const { return data_; }
    const SurrogateState& state() const { return state_; }
    const CandidateStore& candidates() const { return store_; }
    const std::optional<TrustRegion>& trust() const { return trust_; }
    const std::vector<IterationRecord>& records() const { return records_; }
    bool done() const { return data_.size() >= cfg_.budget; }

    /// Next point to evaluate, in problem units.
    Vec ask() const { return denormalize(pending_x_); }

    /// Feed back the observed values for the last `ask` point. Returns the
    /// finished iteration record.
    const IterationRecord& tell(double z, const Vec& c) {
        if (done())
            throw std::logic_error("tell: budget exhausted");
        ingest(z, c);
        if (!done())
            select_next();
        IterationRecord& rec = records_.back();
        rec.elapsed_ms = take_elapsed_ms();
        return rec;
    }

    /// Full run against an evaluation callback (problem units, 1-based draw
    /// index). Evaluation exceptions end the run with the partial history.
    RunResult run(const std::function<Evaluation(const Vec&, std::uint64_t)>& eval) {
        RunResult out;
        try {
            while (!done()) {
                const Vec x = ask();
                const Evaluation e = eval(x, data_.size() + 1);
                tell(e.z, e.c);
            }
            out.status = data_.best() ? RunStatus::ok : RunStatus::no_feasible;
        } catch (const std::exception& ex) {
            out.status = RunStatus::evaluation_failed;
            out.error = ex.what();
        }
        out.records = records_;
        if (data_.best()) {
            const Sample& b = data_.best_sample();
            out.found = true;
            out.best_x = denormalize(b.x);
            out.best_z = b.z;
            out.best_c = b.c;
        }
        return out;
    }

    RunResult run() {
        return run([this](const Vec& x, std::uint64_t) {
            return evaluate(problem_, x);
        });
    }

    /// Exploitation proposal among stored candidates inside the trust region
    /// plus fresh filler points: the cost minimizer over the risk-blend
    /// feasible ones, or nothing if no candidate passes the blend test.
    struct Proposal {
        Vec x;
        double cost = 0.0;
        double f_lower = 0.0;
    };

    std::optional<Proposal> exploit() {
        if (!trust_)
            return std::nullopt;
        const TrustRegion& tr = *trust_;
        std::optional<Proposal> best;
        PointEval ev;
        auto consider = [&](const double* x) {
            point_eval(x, ev);
            if (!delta_feasible_bounds(ev.g, cfg_.delta))
                return;
            const double cost = exploitation_cost(ev.f, cfg_.beta);
            if (!best || cost < best->cost ||
                (cost == best->cost && lex_less(x, best->x.data(), dim_))) {
                best = Proposal{Vec(x, x + dim_), cost, ev.f.lower};
            }
        };
        const std::size_t m = store_.size();
        for (std::size_t i = 0; i < m; ++i) {
            const double* x = store_.point(i);
            bool inside = true;
            for (std::size_t d = 0; d < dim_; ++d)
                if (std::abs(x[d] - tr.center[d]) > tr.size) {
                    inside = false;
                    break;
                }
            if (!inside)
                continue;
            if (!cfg_.noisy) {
                cached_eval(i, ev);
                if (!delta_feasible_bounds(ev.g, cfg_.delta))
                    continue;
                const double cost = exploitation_cost(ev.f, cfg_.beta);
                if (!best || cost < best->cost ||
                    (cost == best->cost && lex_less(x, best->x.data(), dim_)))
                    best = Proposal{Vec(x, x + dim_), cost, ev.f.lower};
            } else {
                consider(x);
            }
        }
        trust_fillers(tr.center.data(), tr.size, dim_, cfg_.sobol_count, cfg_.seed,
                      data_.size(), filler_buf_);
        for (std::size_t i = 0; i < cfg_.sobol_count; ++i)
            consider(&filler_buf_[i * dim_]);
        return best;
    }

    /// Surrogate bounds at a normalized point, for inspection and testing.
    PointEval probe(const Vec& u) const {
        if (u.size() != dim_)
            throw std::invalid_argument("probe: dimension mismatch");
        PointEval ev;
        point_eval(u.data(), ev);
        return ev;
    }

    /// Exploration proposal: merit argmax over the whole candidate store.
    std::size_t explore() {
        const std::size_t m = store_.size();
        if (m == 0)
            throw std::runtime_error("explore: candidate store is empty");
        const std::size_t n = data_.size();
        if (!cfg_.noisy)
            return explore_cached(n);
        return explore_bounded(n);
    }

  private:
    using Clock = std::chrono::steady_clock;

    double normalize(std::size_t d, double v) const {
        const double span = problem_.upper[d] - problem_.lower[d];
        return (v - problem_.lower[d]) / span;
    }

    Vec denormalize(const Vec& u) const {
        Vec x(dim_);
        for (std::size_t d = 0; d < dim_; ++d)
            x[d] = problem_.lower[d] + u[d] * (problem_.upper[d] - problem_.lower[d]);
        return x;
    }

    double take_elapsed_ms() {
        const auto now = Clock::now();
        const double ms =
            std::chrono::duration<double, std::milli>(now - last_clock_).count();
        last_clock_ = now;
        return ms;
    }

    void reset_caches() {
        const std::size_t m = store_.size();
        cd_.assign(m, std::numeric_limits<double>::infinity());
        cnear_.assign(m, 0);
        if (!cfg_.noisy) {
            cf_.assign(2 * m, 0.0);
            cg_.assign(2 * n_con_ * m, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                cf_[2 * i] = std::numeric_limits<double>::infinity();
                cf_[2 * i + 1] = -std::numeric_limits<double>::infinity();
                for (std::size_t s = 0; s < n_con_; ++s) {
                    cg_[(i * n_con_ + s) * 2] = std::numeric_limits<double>::infinity();
                    cg_[(i * n_con_ + s) * 2 + 1] =
                        -std::numeric_limits<double>::infinity();
                }
            }
        }
    }

    /// Exact surrogate evaluation at an arbitrary point. Arithmetic mirrors
    /// evaluate_point term by term, but runs over flat per-field arrays so
    /// the hot loops vectorize; results are bit-identical to the scan.
    void point_eval(const double* x, PointEval& ev) const {
        const std::size_t n = data_.size();
        if (n == 0)
            throw std::invalid_argument("evaluate_point: empty dataset");
        dbuf_.resize(n);
        const double* xs = sample_xs_.data();
        for (std::size_t k = 0; k < n; ++k)
            dbuf_[k] = distance(x, xs + k * dim_, dim_);

        double dmin = std::numeric_limits<double>::infinity();
        std::size_t nearest = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (dbuf_[k] < dmin) {
                dmin = dbuf_[k];
                nearest = k;
            }

        double f_up = std::numeric_limits<double>::infinity();
        double f_lo = -std::numeric_limits<double>::infinity();
        const double* zs = zs_.data();
        for (std::size_t k = 0; k < n; ++k) {
            const double cone = state_.gamma * dbuf_[k] + state_.eps_f;
            f_up = std::min(f_up, zs[k] + cone);
            f_lo = std::max(f_lo, zs[k] - cone);
        }

        ev.g.resize(n_con_);
        for (std::size_t s = 0; s < n_con_; ++s) {
            double g_up = std::numeric_limits<double>::infinity();
            double g_lo = -std::numeric_limits<double>::infinity();
            const double* cs_col = cs_cols_[s].data();
            const double rho = state_.rho[s];
            const double eps = state_.eps_c[s];
            for (std::size_t k = 0; k < n; ++k) {
                const double cs = rho * dbuf_[k] + eps;
                g_up = std::min(g_up, cs_col[k] + cs);
                g_lo = std::max(g_lo, cs_col[k] - cs);
            }
            ev.g[s] = detail::cone_bounds(g_up, g_lo);
        }
        ev.dmin = dmin;
        ev.nearest = nearest;
        ev.f = detail::cone_bounds(f_up, f_lo);
    }

    /// Surrogate evaluation of stored candidate i from the incremental
    /// caches (noiseless mode only; identical arithmetic to the scan).
    void cached_eval(std::size_t i, PointEval& ev) const {
        ev.dmin = cd_[i];
        ev.nearest = cnear_[i];
        ev.f = detail::cone_bounds(cf_[2 * i], cf_[2 * i + 1]);
        ev.g.resize(n_con_);
        for (std::size_t s = 0; s < n_con_; ++s)
            ev.g[s] = detail::cone_bounds(cg_[(i * n_con_ + s) * 2],
                                          cg_[(i * n_con_ + s) * 2 + 1]);
    }

    void fold_in_sample(const Sample& sample) {
        const std::size_t m = store_.size();
        const double* xn = sample.x.data();
        for (std::size_t i = 0; i < m; ++i) {
            const double d = distance(store_.point(i), xn, dim_);
            if (d < cd_[i]) {
                cd_[i] = d;
                cnear_[i] = static_cast<std::uint32_t>(data_.size() - 1);
            }
            if (cfg_.noisy)
                continue;
            const double cone = state_.gamma * d + state_.eps_f;
            cf_[2 * i] = std::min(cf_[2 * i], sample.z + cone);
            cf_[2 * i + 1] = std::max(cf_[2 * i + 1], sample.z - cone);
            for (std::size_t s = 0; s < n_con_; ++s) {
                const double cs = state_.rho[s] * d + state_.eps_c[s];
                double& up = cg_[(i * n_con_ + s) * 2];
                double& lo = cg_[(i * n_con_ + s) * 2 + 1];
                up = std::min(up, sample.c[s] + cs);
                lo = std::max(lo, sample.c[s] - cs);
            }
        }
    }

    void recompute_candidate(std::size_t i, PointEval& ev) {
        point_eval(store_.point(i), ev);
        cd_[i] = ev.dmin;
        cnear_[i] = static_cast<std::uint32_t>(ev.nearest);
        if (cfg_.noisy)
            return;
        cf_[2 * i] = ev.f.upper;
        cf_[2 * i + 1] = ev.f.lower;
        for (std::size_t s = 0; s < n_con_; ++s) {
            cg_[(i * n_con_ + s) * 2] = ev.g[s].upper;
            cg_[(i * n_con_ + s) * 2 + 1] = ev.g[s].lower;
        }
    }

    void recompute_all_candidates() {
        PointEval ev;
        const std::size_t m = store_.size();
        for (std::size_t i = 0; i < m; ++i)
            recompute_candidate(i, ev);
    }

    void apply_removals(const std::vector<SwapRemoval>& ops) {
        for (const SwapRemoval& op : ops) {
            if (op.removed != op.moved_from) {
                cd_[op.removed] = cd_[op.moved_from];
                cnear_[op.removed] = cnear_[op.moved_from];
                if (!cfg_.noisy) {
                    cf_[2 * op.removed] = cf_[2 * op.moved_from];
                    cf_[2 * op.removed + 1] = cf_[2 * op.moved_from + 1];
                    for (std::size_t s = 0; s < n_con_; ++s) {
                        cg_[(op.removed * n_con_ + s) * 2] =
                            cg_[(op.moved_from * n_con_ + s) * 2];
                        cg_[(op.removed * n_con_ + s) * 2 + 1] =
                            cg_[(op.moved_from * n_con_ + s) * 2 + 1];
                    }
                }
            }
            cd_.pop_back();
            cnear_.pop_back();
            if (!cfg_.noisy) {
                cf_.resize(cf_.size() - 2);
                cg_.resize(cg_.size() - 2 * n_con_);
            }
        }
    }

    void extend_caches() {
        const std::size_t m = store_.size();
        const std::size_t old = cd_.size();
        if (old == m)
            return;
        cd_.resize(m);
        cnear_.resize(m);
        if (!cfg_.noisy) {
            cf_.resize(2 * m);
            cg_.resize(2 * n_con_ * m);
        }
        PointEval ev;
        for (std::size_t i = old; i < m; ++i)
            recompute_candidate(i, ev);
    }

    void ingest(double z, const Vec& c) {
        Sample s;
        s.x = pending_x_;
        s.z = z;
        s.c = c;
        const Mode mode = pending_mode_;
        const std::optional<std::size_t> best_before = data_.best();
        const double best_z_before = best_before ? data_.best_sample().z : 0.0;

        data_.insert(std::move(s));
        const Sample& stored = data_.sample(data_.size() - 1);
        sample_xs_.insert(sample_xs_.end(), stored.x.begin(), stored.x.end());
        zs_.push_back(stored.z);
        for (std::size_t q = 0; q < n_con_; ++q)
            cs_cols_[q].push_back(stored.c[q]);

        const double gamma_old = state_.gamma;
        const Vec rho_old = state_.rho;
        if (cfg_.noisy) {
            const double r0 = cfg_.noise_radius > 0.0
                                  ? cfg_.noise_radius
                                  : 0.1 * std::sqrt(static_cast<double>(dim_));
            const NoiseEstimate ne = estimate_noise(data_, r0);
            state_.eps_f = ne.eps_f;
            state_.eps_c = ne.eps_c;
            update_lipschitz(data_, state_, true);
        } else {
            update_lipschitz(data_, state_, false);
        }

        if (trust_) {
            StepOutcome outcome;
            outcome.mode = mode;
            outcome.new_z = stored.z;
            outcome.new_feasible = stored.feasible();
            outcome.best_z = best_z_before;
            outcome.gamma = pending_gamma_;
            update_trust(*trust_, outcome, cfg_, data_.best_sample().x);
        } else if (data_.best()) {
            trust_ = TrustRegion{data_.best_sample().x, cfg_.trust_max};
        }

        if (!cfg_.noisy && (state_.gamma != gamma_old || state_.rho != rho_old))
            recompute_all_candidates();
        else
            fold_in_sample(stored);

        apply_removals(store_.prune_at(stored.x.data()));
        store_.add_from_sample(stored.x.data(), sample_xs_.data(),
                               data_.size() - 1, cfg_.grid_b, data_.size());
        extend_caches();

        IterationRecord rec;
        rec.n = data_.size();
        rec.x = denormalize(stored.x);
        rec.z = stored.z;
        rec.c = stored.c;
        rec.mode = mode;
        rec.feasible = stored.feasible();
        if (data_.best())
            rec.z_best = data_.best_sample().z;
        if (trust_)
            rec.trust_size = trust_->size;
        rec.gamma = state_.gamma;
        rec.rho = state_.rho;
        rec.eps_f = state_.eps_f;
        rec.eps_c = state_.eps_c;
        records_.push_back(std::move(rec));
    }

    void select_next() {
        pending_gamma_ = state_.gamma;
        if (data_.best()) {
            const std::optional<Proposal> prop = exploit();
            if (prop && improvement_test(prop->f_lower, data_.best_sample().z,
                                         cfg_.alpha, state_.gamma)) {
                pending_x_ = prop->x;
                pending_mode_ = Mode::exploit;
                return;
            }
        }
        const std::size_t winner = explore();
        const double* x = store_.point(winner);
        pending_x_.assign(x, x + dim_);
        pending_mode_ = Mode::explore;
    }

    std::size_t explore_cached(std::size_t n) {
        const std::size_t m = store_.size();
        PointEval ev;
        double best_merit = -std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < m; ++i) {
            cached_eval(i, ev);
            const double age = static_cast<double>(n - store_.birth(i));
            const double merit =
                exploration_merit(ev, state_, cfg_.delta, cfg_.phi, age);
            if (merit > best_merit ||
                (merit == best_merit &&
                 lex_less(store_.point(i), store_.point(best_i), dim_)))
                best_merit = merit, best_i = i;
        }
        return best_i;
    }

    /// Exact argmax via bound pruning: each candidate's merit is bounded
    /// above from its cached nearest-sample distance plus the observed value
    /// extremes, candidates are popped from a max-heap of bounds and
    /// evaluated exactly until the bound falls below the incumbent merit.
    /// The extremes matter: they keep the bound tight when a slope estimate
    /// collapses to its floor and uncertainty is dominated by the noise
    /// band, and they let the bound drop the uncertainty reward wherever
    /// the risk-blend test provably fails.
    std::size_t explore_bounded(std::size_t n) {
        const std::size_t m = store_.size();
        const double delta = cfg_.delta;
        const double diag = std::sqrt(static_cast<double>(dim_));

        double zmin = std::numeric_limits<double>::infinity();
        double zmax = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            zmin = std::min(zmin, zs_[k]);
            zmax = std::max(zmax, zs_[k]);
        }
        Vec cmin(n_con_, std::numeric_limits<double>::infinity());
        Vec cmax(n_con_, -std::numeric_limits<double>::infinity());
        for (std::size_t s = 0; s < n_con_; ++s) {
            const double* col = cs_cols_[s].data();
            for (std::size_t k = 0; k < n; ++k) {
                cmin[s] = std::min(cmin[s], col[k]);
                cmax[s] = std::max(cmax[s], col[k]);
            }
        }

        heap_.clear();
        heap_.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double d = cd_[i];
            const std::size_t near = cnear_[i];
            bool blend_possible = true;
            double risk = 0.0;
            int sat_possible = 0;
            for (std::size_t s = 0; s < n_con_; ++s) {
                const double rho = state_.rho[s];
                const double eps = state_.eps_c[s];
                const double cn = cs_cols_[s][near];
                const double g_up_ub =
                    std::min(cn + rho * d, cmin[s] + rho * diag) + eps;
                const double g_lo_lb =
                    std::max(cn - rho * d, cmax[s] - rho * diag) - eps;
                risk += (g_up_ub - g_lo_lb) / rho;
                const double g_lo_ub = std::min(cmax[s] - eps, g_up_ub);
                if (0.5 * (g_up_ub + g_lo_ub) >= 0.0)
                    ++sat_possible;
                if (0.5 * delta * g_up_ub + (1.0 - 0.5 * delta) * g_lo_ub < 0.0)
                    blend_possible = false;
            }
            const double age = static_cast<double>(n - store_.birth(i));
            double weight = delta * std::exp2(static_cast<double>(sat_possible)) * risk;
            if (blend_possible) {
                const double f_up_ub =
                    std::min(zs_[near] + state_.gamma * d,
                             zmin + state_.gamma * diag) +
                    state_.eps_f;
                const double f_lo_lb =
                    std::max(zs_[near] - state_.gamma * d,
                             zmax - state_.gamma * diag) -
                    state_.eps_f;
                weight += (1.0 - delta) * (f_up_ub - f_lo_lb);
            }
            heap_.emplace_back(d * weight + cfg_.phi * age,
                               static_cast<std::uint32_t>(i));
        }
        std::make_heap(heap_.begin(), heap_.end());

        PointEval ev;
        double best_merit = -std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        bool have = false;
        while (!heap_.empty() && heap_.front().first >= best_merit) {
            std::pop_heap(heap_.begin(), heap_.end());
            const std::size_t i = heap_.back().second;
            heap_.pop_back();
            point_eval(store_.point(i), ev);
            const double age = static_cast<double>(n - store_.birth(i));
            const double merit =
                exploration_merit(ev, state_, cfg_.delta, cfg_.phi, age);
            if (!have || merit > best_merit ||
                (merit == best_merit &&
                 lex_less(store_.point(i), store_.point(best_i), dim_))) {
                best_merit = merit;
                best_i = i;
                have = true;
            }
        }
        return best_i;
    }

    ProblemSpec problem_;
    SolverConfig cfg_;
    std::size_t dim_;
    std::size_t n_con_;
    Dataset data_;
    SurrogateState state_;
    CandidateStore store_;
    std::optional<TrustRegion> trust_;
    std::vector<IterationRecord> records_;

    std::vector<double> sample_xs_;   // flat mirror of sample coordinates
    std::vector<double> zs_;          // flat mirror of objective values
    std::vector<Vec> cs_cols_;        // one flat column per constraint
    mutable std::vector<double> dbuf_;  // distance scratch for point_eval
    Vec pending_x_;                  // normalized next point
    Mode pending_mode_ = Mode::initial;
    double pending_gamma_ = 0.0;

    // Per-candidate incremental caches, index-aligned with the store.
    std::vector<double> cd_;
    std::vector<std::uint32_t> cnear_;
    std::vector<double> cf_;  // upper, lower
    std::vector<double> cg_;  // upper, lower per constraint
    std::vector<std::pair<double, std::uint32_t>> heap_;
    std::vector<double> filler_buf_;

    Clock::time_point last_clock_;
};

} // namespace smgo
