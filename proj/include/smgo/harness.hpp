#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "smgo/problems.hpp"
#include "smgo/solver.hpp"
#include "smgo/trace.hpp"

namespace smgo {

/// A batch of repeated seeded runs on one problem. Per-run seeds, starting
/// points, and noise streams all derive deterministically from the master
/// seed and the run index, never from the parameter values, so sweeps that
/// vary alpha or delta face identical run conditions in every cell.
struct BatchSpec {
    std::string problem;
    SolverConfig config;        // seed and start are overwritten per run
    std::size_t runs = 1;
    bool random_starts = false; // false: every run starts at config.start
    std::uint64_t master_seed = 0;
    double noise_f = 0.0;       // injected noise amplitudes (0 = clean)
    Vec noise_c;
    std::size_t workers = 1;
    std::string out_dir;        // empty: keep traces in memory only
};

struct RunMetrics {
    RunStatus status = RunStatus::no_feasible;
    bool found = false;
    double best_z = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    bool started_feasible = false;
    std::optional<std::size_t> first_feasible;  // 1-based iteration index
    double pct_infeasible = 0.0;
    double pct_exploit = 0.0;
    std::size_t n_records = 0;
    std::string error;
};

struct BatchSummary {
    std::string problem;
    double alpha = 0.0;
    double delta = 0.0;
    std::size_t runs = 0;
    double mean_gap = std::numeric_limits<double>::quiet_NaN();
    double median_gap = std::numeric_limits<double>::quiet_NaN();
    double std_gap = 0.0;
    double mean_first_feasible = std::numeric_limits<double>::quiet_NaN();
    double pct_infeasible = 0.0;
    double pct_exploit = 0.0;
    std::vector<RunMetrics> per_run;
};

inline std::uint64_t run_seed(std::uint64_t master, std::size_t run_index) {
    return derive_seed(master, run_index);
}

inline std::uint64_t noise_seed(std::uint64_t master, std::size_t run_index) {
    return derive_seed(master ^ 0xA0153ULL, run_index);
}

/// Starting point for run `run_index`: uniform in the box, keyed on the
/// master seed and the run index only.
inline Vec draw_start(const ProblemSpec& p, std::uint64_t master,
                      std::size_t run_index) {
    std::uint64_t st = derive_seed(master ^ 0x57A27ULL, run_index);
    Vec x(p.dimension);
    for (std::size_t d = 0; d < p.dimension; ++d)
        x[d] = p.lower[d] + u64_to_unit(splitmix64(st)) * (p.upper[d] - p.lower[d]);
    return x;
}

/// Effective per-run solver configuration.
inline SolverConfig make_run_config(const BatchSpec& spec, const ProblemSpec& prob,
                                    std::size_t run_index) {
    SolverConfig cfg = spec.config;
    cfg.seed = run_seed(spec.master_seed, run_index);
    if (spec.random_starts)
        cfg.start = draw_start(prob, spec.master_seed, run_index);
    return cfg;
}

/// Metrics are a pure function of the iteration records (plus the problem's
/// known optimum for the gap). The gap falls back to the raw best value when
/// no optimum is known. Runs that never find a feasible point keep a NaN gap.
inline RunMetrics compute_metrics(const std::vector<IterationRecord>& records,
                                  std::optional<double> known_optimum) {
    RunMetrics m;
    m.n_records = records.size();
    if (records.empty())
        return m;
    m.started_feasible = records.front().feasible;
    std::size_t infeasible = 0;
    std::size_t exploit = 0;
    for (const IterationRecord& r : records) {
        if (!r.feasible)
            ++infeasible;
        else if (!m.first_feasible)
            m.first_feasible = r.n;
        if (r.mode == Mode::exploit)
            ++exploit;
        if (r.feasible && (!m.found || r.z < m.best_z)) {
            m.found = true;
            m.best_z = r.z;
        }
    }
    if (m.found)
        m.gap = known_optimum ? m.best_z - *known_optimum : m.best_z;
    m.status = m.found ? RunStatus::ok : RunStatus::no_feasible;
    const double n = static_cast<double>(records.size());
    m.pct_infeasible = 100.0 * static_cast<double>(infeasible) / n;
    m.pct_exploit = 100.0 * static_cast<double>(exploit) / n;
    return m;
}

inline RunMetrics compute_metrics(const Trace& trace,
                                  std::optional<double> known_optimum) {
    RunMetrics m = compute_metrics(trace.records, known_optimum);
    m.status = trace.meta.status;
    m.error = trace.meta.error;
    return m;
}

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2)
        return 0.0;
    const double mu = mean_of(v);
    double acc = 0.0;
    for (double x : v)
        acc += (x - mu) * (x - mu);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

} // namespace detail

/// Aggregate per-run metrics. Gap statistics cover the runs that found a
/// feasible point; the first-feasible mean covers only runs that started
/// infeasible and recovered.
inline BatchSummary summarize(const std::string& problem, double alpha,
                              double delta, std::vector<RunMetrics> per_run) {
    BatchSummary s;
    s.problem = problem;
    s.alpha = alpha;
    s.delta = delta;
    s.runs = per_run.size();
    std::vector<double> gaps, firsts, inf_pct, exp_pct;
    for (const RunMetrics& m : per_run) {
        if (m.found)
            gaps.push_back(m.gap);
        if (!m.started_feasible && m.first_feasible)
            firsts.push_back(static_cast<double>(*m.first_feasible));
        inf_pct.push_back(m.pct_infeasible);
        exp_pct.push_back(m.pct_exploit);
    }
    s.mean_gap = detail::mean_of(gaps);
    s.median_gap = detail::median_of(gaps);
    s.std_gap = detail::sample_std(gaps);
    s.mean_first_feasible = detail::mean_of(firsts);
    s.pct_infeasible = detail::mean_of(inf_pct);
    s.pct_exploit = detail::mean_of(exp_pct);
    s.per_run = std::move(per_run);
    return s;
}

inline std::string trace_file_name(std::size_t run_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "run_%04zu.jsonl", run_index);
    return buf;
}

/// Execute one run of a batch and persist its trace when requested.
inline RunMetrics execute_run(const BatchSpec& spec, const ProblemSpec& prob,
                              std::size_t run_index) {
    const SolverConfig cfg = make_run_config(spec, prob, run_index);
    NoiseSpec noise;
    noise.amp_f = spec.noise_f;
    noise.amp_c = spec.noise_c;
    noise.seed = noise_seed(spec.master_seed, run_index);
    bool inject = spec.noise_f != 0.0;
    for (double a : spec.noise_c)
        inject = inject || a != 0.0;

    Solver solver(prob, cfg);
    RunResult result = solver.run([&](const Vec& x, std::uint64_t draw) {
        return inject ? evaluate_noisy(prob, x, noise, draw) : evaluate(prob, x);
    });

    if (!spec.out_dir.empty()) {
        Trace t;
        t.meta = make_meta(spec.problem, cfg, spec.noise_f, spec.noise_c, result);
        t.records = std::move(result.records);
        write_trace(std::filesystem::path(spec.out_dir) /
                        trace_file_name(run_index),
                    t);
        RunMetrics m = compute_metrics(t.records, prob.known_optimum);
        m.status = result.status;
        m.error = result.error;
        return m;
    }
    RunMetrics m = compute_metrics(result.records, prob.known_optimum);
    m.status = result.status;
    m.error = result.error;
    return m;
}

/// Run the whole batch, farming runs out to worker threads. Aggregation is
/// ordered by run index, so the summary does not depend on scheduling.
inline BatchSummary run_batch(const BatchSpec& spec) {
    if (spec.runs == 0)
        throw std::invalid_argument("run_batch: need at least one run");
    const ProblemSpec& prob = find_problem(spec.problem);
    if (!spec.out_dir.empty())
        std::filesystem::create_directories(spec.out_dir);

    std::vector<RunMetrics> metrics(spec.runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.runs)
                return;
            try {
                metrics[i] = execute_run(spec, prob, i);
            } catch (const std::exception& ex) {
                metrics[i] = RunMetrics{};
                metrics[i].status = RunStatus::evaluation_failed;
                metrics[i].error = ex.what();
            }
        }
    };
    const std::size_t n_workers =
        std::max<std::size_t>(1, std::min(spec.workers, spec.runs));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }
    return summarize(spec.problem, spec.config.alpha, spec.config.delta,
                     std::move(metrics));
}

inline std::string sweep_cell_name(double alpha, double delta) {
    return "a" + format_double(alpha) + "_d" + format_double(delta);
}

/// Grid sweep over (alpha, delta), row-major over alphas then deltas. Every
/// cell reuses the same per-run seeds and starting points.
inline std::vector<BatchSummary> run_sweep(const BatchSpec& base,
                                           const std::vector<double>& alphas,
                                           const std::vector<double>& deltas) {
    if (alphas.empty() || deltas.empty())
        throw std::invalid_argument("run_sweep: grid must be non-empty");
    std::vector<BatchSummary> rows;
    rows.reserve(alphas.size() * deltas.size());
    for (double a : alphas) {
        for (double d : deltas) {
            BatchSpec cell = base;
            cell.config.alpha = a;
            cell.config.delta = d;
            if (!base.out_dir.empty())
                cell.out_dir = (std::filesystem::path(base.out_dir) /
                                sweep_cell_name(a, d))
                                   .string();
            rows.push_back(run_batch(cell));
        }
    }
    return rows;
}

inline std::string summary_csv(const std::vector<BatchSummary>& rows) {
    std::string out = "problem,alpha,delta,runs,mean_gap,median_gap,std_gap,"
                      "mean_first_feasible,pct_infeasible,pct_exploit\n";
    for (const BatchSummary& s : rows) {
        out += s.problem;
        out += ',';
        out += format_double(s.alpha);
        out += ',';
        out += format_double(s.delta);
        out += ',';
        out += std::to_string(s.runs);
        out += ',';
        out += format_double(s.mean_gap);
        out += ',';
        out += format_double(s.median_gap);
        out += ',';
        out += format_double(s.std_gap);
        out += ',';
        out += format_double(s.mean_first_feasible);
        out += ',';
        out += format_double(s.pct_infeasible);
        out += ',';
        out += format_double(s.pct_exploit);
        out += '\n';
    }
    return out;
}

inline void write_summary_csv(const std::filesystem::path& path,
                              const std::vector<BatchSummary>& rows) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open summary file for writing: " +
                                 path.string());
    out << summary_csv(rows);
    if (!out)
        throw std::runtime_error("failed writing summary file: " + path.string());
}

inline std::vector<std::filesystem::path>
list_trace_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("not a directory: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("run_", 0) == 0 && entry.path().extension() == ".jsonl")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

/// Rebuild a batch summary purely from its archived traces.
inline BatchSummary recompute_batch(const std::filesystem::path& dir) {
    const std::vector<std::filesystem::path> files = list_trace_files(dir);
    if (files.empty())
        throw std::runtime_error("no trace files under: " + dir.string());
    std::vector<RunMetrics> metrics;
    metrics.reserve(files.size());
    std::string problem;
    double alpha = 0.0;
    double delta = 0.0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const Trace t = read_trace(files[i]);
        if (i == 0) {
            problem = t.meta.problem;
            alpha = t.meta.alpha;
            delta = t.meta.delta;
        }
        metrics.push_back(
            compute_metrics(t, find_problem(t.meta.problem).known_optimum));
    }
    return summarize(problem, alpha, delta, std::move(metrics));
}

/// Rebuild all sweep-cell summaries from a sweep directory. Rows come back
/// sorted by (alpha, delta), which matches emission order for ascending
/// grids.
inline std::vector<BatchSummary>
recompute_sweep(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> cells;
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("not a directory: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_directory())
            cells.push_back(entry.path());
    if (cells.empty())
        throw std::runtime_error("no sweep cells under: " + dir.string());
    std::vector<BatchSummary> rows;
    rows.reserve(cells.size());
    for (const auto& cell : cells)
        rows.push_back(recompute_batch(cell));
    std::sort(rows.begin(), rows.end(),
              [](const BatchSummary& a, const BatchSummary& b) {
                  if (a.alpha != b.alpha)
                      return a.alpha < b.alpha;
                  return a.delta < b.delta;
              });
    return rows;
}

} // namespace smgo
