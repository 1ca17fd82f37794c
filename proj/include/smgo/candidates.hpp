#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "smgo/sobol.hpp"
#include "smgo/surrogate.hpp"

namespace smgo {

/// One store mutation from a prune: the element at `removed` was deleted and,
/// unless it was the back element, the back element (`moved_from`) now lives
/// at `removed`. Callers keeping parallel arrays replay these in order.
struct SwapRemoval {
    std::size_t removed;
    std::size_t moved_from;
};

/// Pool of untested candidate points in the unit box.
///
/// Points closer than `tolerance` (Euclidean) to a stored candidate are
/// dropped on insertion; a spatial hash grid keeps that check O(1).
/// Every candidate remembers the iteration it was generated at, so the
/// exploration merit can favor long-ignored points.
class CandidateStore {
  public:
    explicit CandidateStore(std::size_t dimension, double tolerance = 1e-9)
        : dim_(dimension), tol_(tolerance), cell_(16.0 * tolerance) {
        if (dimension == 0)
            throw std::invalid_argument("CandidateStore: dimension must be positive");
        if (!(tolerance > 0.0))
            throw std::invalid_argument("CandidateStore: tolerance must be positive");
    }

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return birth_.size(); }
    const double* point(std::size_t i) const { return &xs_[i * dim_]; }
    std::size_t birth(std::size_t i) const { return birth_[i]; }
    const std::vector<double>& coords() const { return xs_; }
    const std::vector<std::uint32_t>& births() const { return birth_; }

    /// Appends x unless a stored candidate sits within tolerance of it.
    bool try_add(const double* x, std::size_t birth) {
        for (std::size_t d = 0; d < dim_; ++d)
            if (!(x[d] >= 0.0 && x[d] <= 1.0))
                throw std::invalid_argument("CandidateStore: point outside unit box");
        if (near_existing(x))
            return false;
        const std::size_t idx = size();
        xs_.insert(xs_.end(), x, x + dim_);
        birth_.push_back(static_cast<std::uint32_t>(birth));
        const std::uint64_t key = cell_key(x);
        key_.push_back(key);
        grid_[key].push_back(static_cast<std::uint32_t>(idx));
        return true;
    }

    /// Removes every candidate within tolerance of x. Returns the swap
    /// mutations applied, in order.
    std::vector<SwapRemoval> prune_at(const double* x) {
        std::vector<std::uint32_t> hits;
        probe_cells(x, [&](std::uint32_t idx) {
            if (sq_distance(x, point(idx), dim_) <= tol_ * tol_)
                hits.push_back(idx);
        });
        std::sort(hits.begin(), hits.end(), std::greater<>());
        std::vector<SwapRemoval> ops;
        ops.reserve(hits.size());
        for (std::uint32_t idx : hits) {
            const std::size_t last = size() - 1;
            detach(idx);
            if (idx != last) {
                for (std::size_t d = 0; d < dim_; ++d)
                    xs_[idx * dim_ + d] = xs_[last * dim_ + d];
                birth_[idx] = birth_[last];
                key_[idx] = key_[last];
                relabel(key_[last], static_cast<std::uint32_t>(last), idx);
            }
            xs_.resize(last * dim_);
            birth_.pop_back();
            key_.pop_back();
            ops.push_back({idx, last});
        }
        return ops;
    }

    /// Axis-ray and segment grid points spawned by a new sample.
    ///
    /// Along every axis direction the free reach up to the box face is
    /// gridded at fractions k/B (k = 1..B-1); a zero reach contributes
    /// nothing. The segment toward each previous sample is gridded the same
    /// way. Points landing on the sample itself or on an existing candidate
    /// are dropped. Returns the number of points actually stored.
    std::size_t add_from_sample(const double* x_new, const double* prev,
                                std::size_t n_prev, unsigned grid_b,
                                std::size_t birth) {
        if (grid_b < 2)
            throw std::invalid_argument("add_from_sample: grid divisor must be >= 2");
        std::size_t added = 0;
        std::vector<double> p(dim_);
        const double tol2 = tol_ * tol_;
        auto offer = [&](const double* q) {
            if (sq_distance(q, x_new, dim_) <= tol2)
                return;
            if (try_add(q, birth))
                ++added;
        };
        for (std::size_t d = 0; d < dim_; ++d) {
            for (int sign = 0; sign < 2; ++sign) {
                const double reach = sign == 0 ? 1.0 - x_new[d] : x_new[d];
                if (reach <= 0.0)
                    continue;
                for (unsigned k = 1; k < grid_b; ++k) {
                    p.assign(x_new, x_new + dim_);
                    const double step =
                        reach * static_cast<double>(k) / static_cast<double>(grid_b);
                    p[d] = sign == 0 ? x_new[d] + step : x_new[d] - step;
                    offer(p.data());
                }
            }
        }
        for (std::size_t j = 0; j < n_prev; ++j) {
            const double* xj = prev + j * dim_;
            for (unsigned k = 1; k < grid_b; ++k) {
                const double t = static_cast<double>(k) / static_cast<double>(grid_b);
                for (std::size_t d = 0; d < dim_; ++d)
                    p[d] = x_new[d] + t * (xj[d] - x_new[d]);
                offer(p.data());
            }
        }
        return added;
    }

  private:
    bool near_existing(const double* x) const {
        bool found = false;
        probe_cells(x, [&](std::uint32_t idx) {
            if (sq_distance(x, point(idx), dim_) <= tol_ * tol_)
                found = true;
        });
        return found;
    }

    std::int64_t cell_coord(double v) const {
        return static_cast<std::int64_t>(std::floor(v / cell_));
    }

    static std::uint64_t mix_key(std::uint64_t h, std::int64_t c) {
        h ^= static_cast<std::uint64_t>(c) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
        return h;
    }

    std::uint64_t cell_key(const double* x) const {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (std::size_t d = 0; d < dim_; ++d)
            h = mix_key(h, cell_coord(x[d]));
        return h;
    }

    /// Visits candidates in every grid cell a tolerance ball around x can
    /// touch. Almost always a single cell; near a cell face per axis, two.
    template <typename Fn>
    void probe_cells(const double* x, Fn&& fn) const {
        std::vector<std::int64_t> base(dim_);
        std::vector<int> extra(dim_, 0);  // -1, 0, +1 second cell offset
        for (std::size_t d = 0; d < dim_; ++d) {
            base[d] = cell_coord(x[d]);
            const double frac = x[d] - static_cast<double>(base[d]) * cell_;
            if (frac <= tol_)
                extra[d] = -1;
            else if (cell_ - frac <= tol_)
                extra[d] = +1;
        }
        std::vector<int> pick(dim_, 0);  // 0 = base cell, 1 = offset cell
        while (true) {
            std::uint64_t h = 0xCBF29CE484222325ULL;
            for (std::size_t d = 0; d < dim_; ++d)
                h = mix_key(h, base[d] + (pick[d] ? extra[d] : 0));
            if (auto it = grid_.find(h); it != grid_.end())
                for (std::uint32_t idx : it->second)
                    fn(idx);
            std::size_t d = 0;
            for (; d < dim_; ++d) {
                if (pick[d] == 0 && extra[d] != 0) {
                    pick[d] = 1;
                    break;
                }
                pick[d] = 0;
            }
            if (d == dim_)
                break;
        }
    }

    void detach(std::uint32_t idx) { relabel_remove(key_[idx], idx); }

    void relabel_remove(std::uint64_t key, std::uint32_t idx) {
        auto& bucket = grid_[key];
        for (std::size_t i = 0; i < bucket.size(); ++i)
            if (bucket[i] == idx) {
                bucket[i] = bucket.back();
                bucket.pop_back();
                break;
            }
        if (bucket.empty())
            grid_.erase(key);
    }

    void relabel(std::uint64_t key, std::uint32_t from, std::uint32_t to) {
        auto& bucket = grid_[key];
        for (auto& v : bucket)
            if (v == from) {
                v = to;
                break;
            }
    }

    std::size_t dim_;
    double tol_;
    double cell_;
    std::vector<double> xs_;
    std::vector<std::uint32_t> birth_;
    std::vector<std::uint64_t> key_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid_;
};

/// Store pre-seeded with the first `count` points of the shifted Sobol
/// sequence (indices 1..count), all with birth iteration 0.
inline CandidateStore seed_sobol(std::size_t dimension, std::size_t count,
                                 std::uint64_t seed) {
    CandidateStore store(dimension);
    if (count == 0)
        return store;
    SobolSequence seq(dimension, seed == 0 ? 0 : derive_seed(seed, 0x5EEDu));
    std::vector<double> p(dimension);
    for (std::size_t i = 1; i <= count; ++i) {
        seq.point(i, p.data());
        store.try_add(p.data(), 0);
    }
    return store;
}

/// `count` quasi-random points inside the trust box around `center`
/// intersected with the unit box. The unit pattern depends on (seed,
/// iteration); the affine placement depends on (center, size), so a resized
/// region scales the same pattern toward its center.
inline void trust_fillers(const double* center, double size, std::size_t dimension,
                          std::size_t count, std::uint64_t seed,
                          std::size_t iteration, std::vector<double>& out) {
    if (!(size > 0.0))
        throw std::invalid_argument("trust_fillers: size must be positive");
    out.resize(count * dimension);
    if (count == 0)
        return;
    SobolSequence seq(dimension,
                      derive_seed(seed ^ 0xF177ED5ULL, 0x1000u + iteration));
    std::vector<double> lo(dimension), width(dimension), p(dimension);
    for (std::size_t d = 0; d < dimension; ++d) {
        const double a = std::max(0.0, center[d] - size);
        const double b = std::min(1.0, center[d] + size);
        lo[d] = a;
        width[d] = b - a;
    }
    for (std::size_t i = 0; i < count; ++i) {
        seq.point(i + 1, p.data());
        for (std::size_t d = 0; d < dimension; ++d)
            out[i * dimension + d] = lo[d] + p[d] * width[d];
    }
}

} // namespace smgo
