#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace smgo {

using Vec = std::vector<double>;

inline double sq_distance(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

inline double distance(const double* a, const double* b, std::size_t dim) {
    return std::sqrt(sq_distance(a, b, dim));
}

inline bool lex_less(const double* a, const double* b, std::size_t dim) {
    for (std::size_t d = 0; d < dim; ++d) {
        if (a[d] < b[d]) return true;
        if (a[d] > b[d]) return false;
    }
    return false;
}

inline bool all_finite(const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

/// One evaluated point. Coordinates are normalized to the unit box.
struct Sample {
    Vec x;
    double z = 0.0;
    Vec c;

    bool feasible() const {
        for (double v : c)
            if (v < 0.0) return false;
        return true;
    }
};

/// Growing archive of samples with pairwise distances and best-point tracking.
///
/// The best index points at the feasible sample with the lowest objective;
/// exact ties resolve to the lexicographically smallest location.
class Dataset {
  public:
    Dataset(std::size_t dimension, std::size_t n_constraints)
        : dim_(dimension), n_con_(n_constraints) {
        if (dimension == 0)
            throw std::invalid_argument("Dataset: dimension must be positive");
    }

    std::size_t dimension() const { return dim_; }
    std::size_t n_constraints() const { return n_con_; }
    std::size_t size() const { return samples_.size(); }
    const Sample& sample(std::size_t i) const { return samples_[i]; }
    const std::vector<Sample>& samples() const { return samples_; }

    std::optional<std::size_t> best() const { return best_; }
    const Sample& best_sample() const { return samples_[*best_]; }

    /// Distance between samples i and j (i != j allowed in any order).
    double distance_between(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        if (i < j) std::swap(i, j);
        return dist_rows_[i][j];
    }

    void insert(Sample s) {
        if (s.x.size() != dim_ || s.c.size() != n_con_)
            throw std::invalid_argument("Dataset::insert: shape mismatch");
        if (!all_finite(s.x.data(), dim_) || !std::isfinite(s.z) ||
            !all_finite(s.c.data(), n_con_))
            throw std::invalid_argument("Dataset::insert: non-finite sample");
        for (double v : s.x)
            if (v < -1e-12 || v > 1.0 + 1e-12)
                throw std::invalid_argument("Dataset::insert: point outside unit box");

        const std::size_t i = samples_.size();
        std::vector<double> row(i);
        for (std::size_t j = 0; j < i; ++j)
            row[j] = distance(s.x.data(), samples_[j].x.data(), dim_);
        dist_rows_.push_back(std::move(row));

        const bool feas = s.feasible();
        samples_.push_back(std::move(s));
        if (feas) {
            const Sample& cand = samples_[i];
            if (!best_) {
                best_ = i;
            } else {
                const Sample& cur = samples_[*best_];
                if (cand.z < cur.z ||
                    (cand.z == cur.z && lex_less(cand.x.data(), cur.x.data(), dim_)))
                    best_ = i;
            }
        }
    }

  private:
    std::size_t dim_;
    std::size_t n_con_;
    std::vector<Sample> samples_;
    std::vector<std::vector<double>> dist_rows_;  // row i holds distances to j < i
    std::optional<std::size_t> best_;
};

/// Lipschitz and noise estimates that define the cone surrogate.
struct SurrogateState {
    double gamma = 0.0;
    Vec rho;
    double eps_f = 0.0;
    Vec eps_c;
    double gamma_floor = 1e-6;
    double rho_floor = 1e-6;
    std::size_t seen = 0;  // samples already folded into the noiseless update

    explicit SurrogateState(std::size_t n_constraints = 0)
        : gamma(1e-6), rho(n_constraints, 1e-6), eps_c(n_constraints, 0.0) {}
};

/// Upper/lower cone envelope values at one query point.
struct BoundsEval {
    double upper = 0.0;
    double lower = 0.0;
    double central = 0.0;
    double uncertainty = 0.0;
};

struct NoiseEstimate {
    double eps_f = 0.0;
    Vec eps_c;
    double radius_used = 0.0;
};

/// Bounded-noise amplitude estimate from near-coincident samples.
///
/// Each sample's neighborhood is every sample within `radius`; the estimate
/// is the mean over samples of the worst in-neighborhood deviation. If all
/// neighborhoods are singletons the radius doubles, capped at sqrt(D) (the
/// unit-box diameter, where every sample is a neighbor of every other).
inline NoiseEstimate estimate_noise(const Dataset& data, double radius) {
    const std::size_t n = data.size();
    const std::size_t n_con = data.n_constraints();
    NoiseEstimate out;
    out.eps_c.assign(n_con, 0.0);
    out.radius_used = radius;
    if (n < 2)
        return out;
    if (!(radius > 0.0))
        throw std::invalid_argument("estimate_noise: radius must be positive");

    const double cap = std::sqrt(static_cast<double>(data.dimension()));
    double r = std::min(radius, cap);
    while (true) {
        bool any_pair = false;
        for (std::size_t i = 1; i < n && !any_pair; ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (data.distance_between(i, j) <= r) {
                    any_pair = true;
                    break;
                }
        if (any_pair || r >= cap)
            break;
        r = std::min(2.0 * r, cap);
    }
    out.radius_used = r;

    double acc_f = 0.0;
    Vec acc_c(n_con, 0.0);
    Vec dev_c(n_con, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double dev_f = 0.0;
        std::fill(dev_c.begin(), dev_c.end(), 0.0);
        const Sample& si = data.sample(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && data.distance_between(i, j) > r)
                continue;
            const Sample& sj = data.sample(j);
            dev_f = std::max(dev_f, std::abs(si.z - sj.z));
            for (std::size_t s = 0; s < n_con; ++s)
                dev_c[s] = std::max(dev_c[s], std::abs(si.c[s] - sj.c[s]));
        }
        acc_f += dev_f;
        for (std::size_t s = 0; s < n_con; ++s)
            acc_c[s] += dev_c[s];
    }
    out.eps_f = acc_f / static_cast<double>(n);
    for (std::size_t s = 0; s < n_con; ++s)
        out.eps_c[s] = acc_c[s] / static_cast<double>(n);
    return out;
}

/// Refresh the Lipschitz estimates after new samples arrived.
///
/// Noiseless: folds in only the samples past `state.seen` (the running max
/// over pair quotients never loses previous pairs), so gamma and rho are
/// non-decreasing. Noisy: recomputes every pair with the deflated quotient
/// (|dz| - 2 eps) / dist, skipping pairs whose deviation is inside the noise
/// band; estimates may shrink between calls. Zero-distance pairs are skipped.
inline void update_lipschitz(const Dataset& data, SurrogateState& state, bool noisy) {
    const std::size_t n = data.size();
    const std::size_t n_con = data.n_constraints();
    if (state.rho.size() != n_con || state.eps_c.size() != n_con)
        throw std::invalid_argument("update_lipschitz: state shape mismatch");

    if (!noisy) {
        double g = std::max(state.gamma, state.gamma_floor);
        Vec r(n_con);
        for (std::size_t s = 0; s < n_con; ++s)
            r[s] = std::max(state.rho[s], state.rho_floor);
        for (std::size_t i = std::max<std::size_t>(state.seen, 1); i < n; ++i) {
            const Sample& si = data.sample(i);
            for (std::size_t j = 0; j < i; ++j) {
                const double d = data.distance_between(i, j);
                if (d <= 0.0)
                    continue;
                const Sample& sj = data.sample(j);
                g = std::max(g, std::abs(si.z - sj.z) / d);
                for (std::size_t s = 0; s < n_con; ++s)
                    r[s] = std::max(r[s], std::abs(si.c[s] - sj.c[s]) / d);
            }
        }
        state.gamma = g;
        state.rho = std::move(r);
        state.seen = n;
        return;
    }

    double g = state.gamma_floor;
    Vec r(n_con, state.rho_floor);
    const double band_f = 2.0 * state.eps_f;
    for (std::size_t i = 1; i < n; ++i) {
        const Sample& si = data.sample(i);
        for (std::size_t j = 0; j < i; ++j) {
            const double d = data.distance_between(i, j);
            if (d <= 0.0)
                continue;
            const Sample& sj = data.sample(j);
            const double dz = std::abs(si.z - sj.z);
            if (dz >= band_f)
                g = std::max(g, (dz - band_f) / d);
            for (std::size_t s = 0; s < n_con; ++s) {
                const double dc = std::abs(si.c[s] - sj.c[s]);
                const double band = 2.0 * state.eps_c[s];
                if (dc >= band)
                    r[s] = std::max(r[s], (dc - band) / d);
            }
        }
    }
    state.gamma = g;
    state.rho = std::move(r);
    state.seen = n;
}

namespace detail {

inline BoundsEval cone_bounds(double value_best_up, double value_best_lo) {
    BoundsEval b;
    // Where the tightest upper and lower cones meet (the envelope collapses
    // to a line through two samples), rounding of the slope estimate can let
    // the computed bounds cross by an ulp. Order them so width stays >= 0.
    b.upper = std::max(value_best_up, value_best_lo);
    b.lower = std::min(value_best_up, value_best_lo);
    b.central = 0.5 * (b.upper + b.lower);
    b.uncertainty = b.upper - b.lower;
    return b;
}

} // namespace detail

/// Distance, objective bounds, and all constraint bounds at one point,
/// computed in a single pass over the samples.
struct PointEval {
    double dmin = std::numeric_limits<double>::infinity();
    std::size_t nearest = 0;
    BoundsEval f;
    std::vector<BoundsEval> g;
};

inline void evaluate_point(const Dataset& data, const SurrogateState& state,
                           const double* x, PointEval& out) {
    const std::size_t n = data.size();
    if (n == 0)
        throw std::invalid_argument("evaluate_point: empty dataset");
    const std::size_t dim = data.dimension();
    const std::size_t n_con = data.n_constraints();

    double f_up = std::numeric_limits<double>::infinity();
    double f_lo = -std::numeric_limits<double>::infinity();
    out.g.resize(n_con);
    for (BoundsEval& b : out.g) {
        b.upper = std::numeric_limits<double>::infinity();
        b.lower = -std::numeric_limits<double>::infinity();
    }

    double dmin = std::numeric_limits<double>::infinity();
    std::size_t nearest = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const Sample& sk = data.sample(k);
        const double d = distance(x, sk.x.data(), dim);
        if (d < dmin) {
            dmin = d;
            nearest = k;
        }
        const double cone = state.gamma * d + state.eps_f;
        f_up = std::min(f_up, sk.z + cone);
        f_lo = std::max(f_lo, sk.z - cone);
        for (std::size_t s = 0; s < n_con; ++s) {
            const double cs = state.rho[s] * d + state.eps_c[s];
            out.g[s].upper = std::min(out.g[s].upper, sk.c[s] + cs);
            out.g[s].lower = std::max(out.g[s].lower, sk.c[s] - cs);
        }
    }
    out.dmin = dmin;
    out.nearest = nearest;
    if (dmin == 0.0) {
        // Exact hit on a stored sample: every other cone term is at least as
        // wide in exact arithmetic, but its rounded value can undercut the
        // stored one by an ulp. Take the degenerate branch exactly.
        const Sample& sk = data.sample(nearest);
        f_up = sk.z + state.eps_f;
        f_lo = sk.z - state.eps_f;
        for (std::size_t s = 0; s < n_con; ++s) {
            out.g[s].upper = sk.c[s] + state.eps_c[s];
            out.g[s].lower = sk.c[s] - state.eps_c[s];
        }
    }
    out.f = detail::cone_bounds(f_up, f_lo);
    for (std::size_t s = 0; s < n_con; ++s)
        out.g[s] = detail::cone_bounds(out.g[s].upper, out.g[s].lower);
}

/// Objective cone bounds at x: upper = min_k (z_k + eps + gamma d_k),
/// lower = max_k (z_k - eps - gamma d_k); central is their midpoint.
inline BoundsEval objective_bounds(const Dataset& data, const SurrogateState& state,
                                   const double* x) {
    PointEval ev;
    evaluate_point(data, state, x, ev);
    return ev.f;
}

inline BoundsEval objective_bounds(const Dataset& data, const SurrogateState& state,
                                   const Vec& x) {
    return objective_bounds(data, state, x.data());
}

/// Per-constraint cone bounds at x (same construction with rho_s, eps_s).
inline std::vector<BoundsEval> constraint_bounds(const Dataset& data,
                                                 const SurrogateState& state,
                                                 const double* x) {
    PointEval ev;
    evaluate_point(data, state, x, ev);
    return std::move(ev.g);
}

inline std::vector<BoundsEval> constraint_bounds(const Dataset& data,
                                                 const SurrogateState& state,
                                                 const Vec& x) {
    return constraint_bounds(data, state, x.data());
}

/// Risk-blended feasibility test: delta-weighted mix of the central estimate
/// and the cautious lower bound must be non-negative for every constraint.
inline bool delta_feasible_bounds(const std::vector<BoundsEval>& g, double delta) {
    for (const BoundsEval& b : g)
        if (delta * b.central + (1.0 - delta) * b.lower < 0.0)
            return false;
    return true;
}

inline bool delta_feasible(const Dataset& data, const SurrogateState& state,
                           const double* x, double delta) {
    if (data.n_constraints() == 0)
        return true;
    PointEval ev;
    evaluate_point(data, state, x, ev);
    return delta_feasible_bounds(ev.g, delta);
}

inline bool delta_feasible(const Dataset& data, const SurrogateState& state,
                           const Vec& x, double delta) {
    return delta_feasible(data, state, x.data(), delta);
}

} // namespace smgo
