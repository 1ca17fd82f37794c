#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smgo/sobol.hpp"
#include "smgo/surrogate.hpp"

namespace smgo {

/// Black-box benchmark problem: box, objective, and constraints in the
/// "satisfied when >= 0" convention, all in problem units.
struct ProblemSpec {
    std::string name;
    std::size_t dimension = 0;
    std::size_t n_constraints = 0;
    Vec lower;
    Vec upper;
    std::optional<double> known_optimum;
    void (*eval)(const double* x, double& z, double* c) = nullptr;
};

/// Uniform bounded disturbance added per evaluation channel.
struct NoiseSpec {
    double amp_f = 0.0;
    Vec amp_c;
    std::uint64_t seed = 0;
};

struct Evaluation {
    double z = 0.0;
    Vec c;
};

inline Evaluation evaluate(const ProblemSpec& p, const double* x) {
    for (std::size_t d = 0; d < p.dimension; ++d) {
        const double span = p.upper[d] - p.lower[d];
        const double slack = 1e-9 * std::max(1.0, std::abs(span));
        if (x[d] < p.lower[d] - slack || x[d] > p.upper[d] + slack)
            throw std::domain_error("evaluate: point outside the search box of " +
                                    p.name);
    }
    Evaluation out;
    out.c.resize(p.n_constraints);
    p.eval(x, out.z, out.c.data());
    if (!std::isfinite(out.z) || !all_finite(out.c.data(), p.n_constraints))
        throw std::runtime_error("evaluate: non-finite value from " + p.name);
    return out;
}

inline Evaluation evaluate(const ProblemSpec& p, const Vec& x) {
    if (x.size() != p.dimension)
        throw std::invalid_argument("evaluate: dimension mismatch for " + p.name);
    return evaluate(p, x.data());
}

/// Noisy evaluation: channel values are perturbed by independent uniform
/// draws in [-amp, +amp], reproducible from (seed, draw_index, channel).
inline Evaluation evaluate_noisy(const ProblemSpec& p, const double* x,
                                 const NoiseSpec& noise, std::uint64_t draw_index) {
    Evaluation out = evaluate(p, x);
    if (noise.amp_c.size() != p.n_constraints && !noise.amp_c.empty())
        throw std::invalid_argument("evaluate_noisy: noise amplitude shape mismatch");
    auto draw = [&](std::uint64_t channel) {
        std::uint64_t s = derive_seed(noise.seed, draw_index * 64 + channel);
        return 2.0 * u64_to_unit(splitmix64(s)) - 1.0;
    };
    if (noise.amp_f != 0.0)
        out.z += noise.amp_f * draw(0);
    for (std::size_t s = 0; s < noise.amp_c.size(); ++s)
        if (noise.amp_c[s] != 0.0)
            out.c[s] += noise.amp_c[s] * draw(s + 1);
    return out;
}

inline Evaluation evaluate_noisy(const ProblemSpec& p, const Vec& x,
                                 const NoiseSpec& noise, std::uint64_t draw_index) {
    return evaluate_noisy(p, x.data(), noise, draw_index);
}

namespace bench {

inline constexpr double two_pi = 6.28318530717958647692528676655900577;

inline void styb2(const double* x, double& z, double* c) {
    z = 80.0;
    for (int i = 0; i < 2; ++i) {
        const double v = x[i];
        z += 0.5 * (v * v * v * v - 16.0 * v * v + 5.0 * v);
    }
    const double d1 = std::hypot(x[0] + 2.90, x[1] - 2.90);
    c[0] = -4.0 + d1;
    const double d2 = std::hypot(x[0] + 2.90, x[1] + 2.90);
    c[1] = std::cos(2.0 * d2);
}

inline void g04(const double* x, double& z, double* c) {
    z = 5.3578547 * x[2] * x[2] + 0.8356891 * x[0] * x[4] + 37.293239 * x[0] -
        40792.141;
    const double u =
        85.334407 + 0.0056858 * x[1] * x[4] + 0.0006262 * x[0] * x[3] -
        0.0022053 * x[2] * x[4];
    const double v =
        80.51249 + 0.0071317 * x[1] * x[4] + 0.0029955 * x[0] * x[1] +
        0.0021813 * x[2] * x[2];
    const double w =
        9.300961 + 0.0047026 * x[2] * x[4] + 0.0012547 * x[0] * x[2] +
        0.0019085 * x[2] * x[3];
    c[0] = 92.0 - u;
    c[1] = u;
    c[2] = 110.0 - v;
    c[3] = v - 90.0;
    c[4] = 25.0 - w;
    c[5] = w - 20.0;
}

inline void g05mod(const double* x, double& z, double* c) {
    z = 3.0 * x[0] + 1e-6 * x[0] * x[0] * x[0] + 2.0 * x[1] +
        (2e-6 / 3.0) * x[1] * x[1] * x[1];
    c[0] = 0.55 - (x[2] - x[3]);
    c[1] = 0.55 - (x[3] - x[2]);
    c[2] = x[0] - 894.8 - 1000.0 * std::sin(-x[2] - 0.25) -
           1000.0 * std::sin(-x[3] - 0.25);
    c[3] = x[1] - 894.8 - 1000.0 * std::sin(x[2] - 0.25) -
           1000.0 * std::sin(x[2] - x[3] - 0.25);
    c[4] = -1294.8 - 1000.0 * std::sin(x[3] - 0.25) -
           1000.0 * std::sin(x[3] - x[2] - 0.25);
}

inline void g08(const double* x, double& z, double* c) {
    // sin(2 pi x1)^3 / x1^3 and sin(2 pi x2) / (x1 + x2) with their
    // removable singularities at zero filled by the limits.
    const double r = x[0] > 0.0 ? std::sin(two_pi * x[0]) / x[0] : two_pi;
    const double t =
        x[0] + x[1] > 0.0 ? std::sin(two_pi * x[1]) / (x[0] + x[1]) : two_pi;
    z = -r * r * r * t;
    c[0] = x[1] - x[0] * x[0] - 1.0;
    c[1] = x[0] - 1.0 - (x[1] - 4.0) * (x[1] - 4.0);
}

inline void g09(const double* x, double& z, double* c) {
    const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4],
                 x6 = x[5], x7 = x[6];
    z = (x1 - 10.0) * (x1 - 10.0) + 5.0 * (x2 - 12.0) * (x2 - 12.0) +
        x3 * x3 * x3 * x3 + 3.0 * (x4 - 11.0) * (x4 - 11.0) +
        10.0 * std::pow(x5, 6) + 7.0 * x6 * x6 + std::pow(x7, 4) -
        4.0 * x6 * x7 - 10.0 * x6 - 8.0 * x7;
    c[0] = 127.0 - 2.0 * x1 * x1 - 3.0 * std::pow(x2, 4) - x3 - 4.0 * x4 * x4 -
           5.0 * x5;
    c[1] = 282.0 - 7.0 * x1 - 3.0 * x2 - 10.0 * x3 * x3 - x4 + x5;
    c[2] = 196.0 - 23.0 * x1 - x2 * x2 - 6.0 * x6 * x6 + 8.0 * x7;
    c[3] = -(4.0 * x1 * x1 + x2 * x2 - 3.0 * x1 * x2 + 2.0 * x3 * x3 +
             5.0 * x6 - 11.0 * x7);
}

inline void g12(const double* x, double& z, double* c) {
    z = -(100.0 - (x[0] - 5.0) * (x[0] - 5.0) - (x[1] - 5.0) * (x[1] - 5.0) -
          (x[2] - 5.0) * (x[2] - 5.0)) /
        100.0;
    // Feasible set is a grid of balls around integer centers 1..9; the
    // distance to the nearest center decomposes per axis.
    double dist2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        double nearest = std::round(x[i]);
        nearest = std::min(9.0, std::max(1.0, nearest));
        dist2 += (x[i] - nearest) * (x[i] - nearest);
    }
    c[0] = 0.0625 - dist2;
}

inline void g23mod(const double* x, double& z, double* c) {
    z = -9.0 * x[4] - 15.0 * x[7] + 6.0 * x[0] + 16.0 * x[1] +
        10.0 * (x[5] + x[6]);
    c[0] = -(x[8] * x[2] + 0.02 * x[5] - 0.025 * x[4]);
    c[1] = -(x[8] * x[3] + 0.02 * x[6] - 0.015 * x[7]);
}

inline void g24(const double* x, double& z, double* c) {
    const double x1 = x[0], x2 = x[1];
    z = -x1 - x2;
    c[0] = 2.0 * std::pow(x1, 4) - 8.0 * std::pow(x1, 3) + 8.0 * x1 * x1 - x2 +
           2.0;
    c[1] = 4.0 * std::pow(x1, 4) - 32.0 * std::pow(x1, 3) + 88.0 * x1 * x1 -
           96.0 * x1 - x2 + 36.0;
}

inline void t1(const double* x, double& z, double* c) {
    z = x[0] + x[1];
    c[0] = 0.5 * std::sin(two_pi * (x[0] * x[0] - 2.0 * x[1])) + x[0] +
           2.0 * x[1] - 1.5;
    c[1] = -x[0] * x[0] - x[1] * x[1] + 1.5;
}

inline void t2(const double* x, double& z, double* c) {
    z = std::sin(x[0]) + x[1];
    c[0] = -std::sin(x[0]) * std::sin(x[1]) - 0.95;
}

inline void t3(const double* x, double& z, double* c) {
    z = std::cos(2.0 * x[0]) * std::cos(x[1]) + std::sin(x[0]);
    c[0] = -std::cos(x[0]) * std::cos(x[1]) + std::sin(x[0]) * std::sin(x[1]) +
           0.5;
}

} // namespace bench

/// The built-in benchmark set. STYB2 is the constrained Styblinski-Tang
/// problem used for the behavioral studies; the rest are the classic
/// constrained test problems (inequality-only variants where noted by the
/// MOD suffix), all converted to the >= 0 satisfaction convention.
inline const std::vector<ProblemSpec>& registry() {
    static const std::vector<ProblemSpec> problems = [] {
        std::vector<ProblemSpec> v;
        v.push_back({"STYB2", 2, 2, {-5, -5}, {5, 5}, 1.6676685924572, bench::styb2});
        v.push_back({"G04", 5, 6, {78, 33, 27, 27, 27}, {102, 45, 45, 45, 45},
                     -3.0665e4, bench::g04});
        v.push_back({"G05MOD", 4, 5, {0, 0, -0.55, -0.55}, {1200, 1200, 0.55, 0.55},
                     5.1265e3, bench::g05mod});
        v.push_back({"G08", 2, 2, {0, 0}, {10, 10}, -0.0958, bench::g08});
        v.push_back({"G09", 7, 4, Vec(7, -10.0), Vec(7, 10.0), 680.6301, bench::g09});
        v.push_back({"G12", 3, 1, {0, 0, 0}, {9, 9, 9}, -1.0, bench::g12});
        v.push_back({"G23MOD", 9, 2, {0, 0, 0, 0, 0, 0, 0, 0, 0.01},
                     {300, 300, 100, 200, 100, 300, 100, 200, 0.03}, std::nullopt,
                     bench::g23mod});
        v.push_back({"G24", 2, 2, {0, 0}, {3, 4}, -5.5080, bench::g24});
        v.push_back({"T1", 2, 2, {0, 0}, {1, 1}, std::nullopt, bench::t1});
        v.push_back({"T2", 2, 1, {0, 0}, {6, 6}, std::nullopt, bench::t2});
        v.push_back({"T3", 2, 1, {0, 0}, {6, 6}, std::nullopt, bench::t3});
        return v;
    }();
    return problems;
}

/// Case-insensitive lookup; STYBLINSKI2D is accepted as an alias for STYB2.
inline const ProblemSpec& find_problem(const std::string& name) {
    std::string key = name;
    for (char& ch : key)
        ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (key == "STYBLINSKI2D")
        key = "STYB2";
    for (const ProblemSpec& p : registry())
        if (p.name == key)
            return p;
    throw std::invalid_argument("unknown problem: " + name);
}

} // namespace smgo
