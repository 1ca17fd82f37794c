// Command-line front end: problem listing, single runs, batches, and
// (alpha, delta) sweeps, with JSON config files and JSONL/CSV outputs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smgo/smgo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEvaluation = 3;
constexpr int kExitNoFeasible = 4;

struct Settings {
    std::string problem;
    smgo::SolverConfig cfg;
    double noise_f = 0.0;
    std::vector<double> noise_c;
    std::size_t runs = 1;
    bool random_starts = false;
    std::size_t workers = 1;
    std::string out;
    std::vector<double> start;
    std::vector<double> alphas;
    std::vector<double> deltas;
};

std::string default_out_dir() {
    if (const char* env = std::getenv("SMGO_OUT_DIR"); env && *env)
        return env;
    return "out";
}

/// Apply a JSON config document. Every key must be known; values use the
/// same names as the config-file schema in the README.
void apply_config_file(const std::string& path, Settings& s) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot read config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object())
        throw std::invalid_argument("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "problem")
            s.problem = value.get<std::string>();
        else if (key == "budget")
            s.cfg.budget = value.get<std::size_t>();
        else if (key == "seed")
            s.cfg.seed = value.get<std::uint64_t>();
        else if (key == "alpha")
            s.cfg.alpha = value.get<double>();
        else if (key == "delta")
            s.cfg.delta = value.get<double>();
        else if (key == "beta")
            s.cfg.beta = value.get<double>();
        else if (key == "phi")
            s.cfg.phi = value.get<double>();
        else if (key == "B")
            s.cfg.grid_b = value.get<unsigned>();
        else if (key == "L")
            s.cfg.sobol_count = value.get<std::size_t>();
        else if (key == "tr_max")
            s.cfg.trust_max = value.get<double>();
        else if (key == "tr_shrink")
            s.cfg.trust_shrink = value.get<double>();
        else if (key == "tr_min")
            s.cfg.trust_min = value.get<double>();
        else if (key == "noisy")
            s.cfg.noisy = value.get<bool>();
        else if (key == "noise_f")
            s.noise_f = value.get<double>();
        else if (key == "noise_c")
            s.noise_c = value.get<std::vector<double>>();
        else if (key == "runs")
            s.runs = value.get<std::size_t>();
        else if (key == "random_starts")
            s.random_starts = value.get<bool>();
        else if (key == "workers")
            s.workers = value.get<std::size_t>();
        else if (key == "out")
            s.out = value.get<std::string>();
        else if (key == "start")
            s.start = value.get<std::vector<double>>();
        else if (key == "alphas")
            s.alphas = value.get<std::vector<double>>();
        else if (key == "deltas")
            s.deltas = value.get<std::vector<double>>();
        else
            throw std::invalid_argument("unknown config key: " + key);
    }
}

std::string box_string(const smgo::ProblemSpec& p) {
    std::string out;
    for (std::size_t d = 0; d < p.dimension; ++d) {
        if (d)
            out += " x ";
        out += "[" + smgo::format_double(p.lower[d]) + ", " +
               smgo::format_double(p.upper[d]) + "]";
    }
    return out;
}

int cmd_list_problems(const std::string& format) {
    const auto& problems = smgo::registry();
    if (format == "csv") {
        std::cout << "name,dimension,n_constraints,box,z_star\n";
        for (const auto& p : problems) {
            std::cout << p.name << ',' << p.dimension << ',' << p.n_constraints
                      << ",\"" << box_string(p) << "\",";
            if (p.known_optimum)
                std::cout << smgo::format_double(*p.known_optimum);
            else
                std::cout << "N/A";
            std::cout << '\n';
        }
        return kExitOk;
    }
    std::printf("%-8s %3s %3s  %-52s %s\n", "name", "D", "S", "box", "z*");
    for (const auto& p : problems) {
        const std::string z = p.known_optimum
                                  ? smgo::format_double(*p.known_optimum)
                                  : std::string("N/A");
        std::printf("%-8s %3zu %3zu  %-52s %s\n", p.name.c_str(), p.dimension,
                    p.n_constraints, box_string(p).c_str(), z.c_str());
    }
    return kExitOk;
}

void finalize(Settings& s) {
    if (s.out.empty())
        s.out = default_out_dir();
    if (!s.start.empty())
        s.cfg.start = s.start;
}

smgo::BatchSpec make_batch_spec(const Settings& s, const std::string& subdir) {
    smgo::BatchSpec spec;
    spec.problem = s.problem;
    spec.config = s.cfg;
    spec.runs = s.runs;
    spec.random_starts = s.random_starts;
    spec.master_seed = s.cfg.seed;
    spec.noise_f = s.noise_f;
    spec.noise_c = s.noise_c;
    spec.workers = s.workers;
    spec.out_dir = (std::filesystem::path(s.out) / subdir).string();
    return spec;
}

int cmd_run(Settings s) {
    finalize(s);
    const smgo::ProblemSpec& prob = smgo::find_problem(s.problem);

    smgo::NoiseSpec noise;
    noise.amp_f = s.noise_f;
    noise.amp_c = s.noise_c;
    noise.seed = smgo::noise_seed(s.cfg.seed, 0);
    bool inject = s.noise_f != 0.0;
    for (double a : s.noise_c)
        inject = inject || a != 0.0;

    smgo::Solver solver(prob, s.cfg);
    smgo::RunResult result =
        solver.run([&](const smgo::Vec& x, std::uint64_t draw) {
            return inject ? smgo::evaluate_noisy(prob, x, noise, draw)
                          : smgo::evaluate(prob, x);
        });

    const std::filesystem::path trace_path =
        std::filesystem::path(s.out) /
        ("trace_" + prob.name + "_seed" + std::to_string(s.cfg.seed) + ".jsonl");
    smgo::Trace trace;
    trace.meta = smgo::make_meta(prob.name, s.cfg, s.noise_f, s.noise_c, result);
    trace.records = result.records;
    smgo::write_trace(trace_path, trace);

    std::cout << "problem: " << prob.name << '\n';
    std::cout << "status: " << smgo::run_status_name(result.status) << '\n';
    std::cout << "iterations: " << result.records.size() << '\n';
    if (result.found) {
        std::cout << "best z: " << smgo::format_double(result.best_z) << '\n';
        std::cout << "best x:";
        for (double v : result.best_x)
            std::cout << ' ' << smgo::format_double(v);
        std::cout << '\n';
    }
    if (!result.error.empty())
        std::cerr << "error: " << result.error << '\n';
    std::cout << "trace: " << trace_path.string() << '\n';

    switch (result.status) {
        case smgo::RunStatus::ok: return kExitOk;
        case smgo::RunStatus::evaluation_failed: return kExitEvaluation;
        default: return kExitNoFeasible;
    }
}

int cmd_batch(Settings s, bool recompute) {
    finalize(s);
    smgo::find_problem(s.problem);  // fail early on unknown names
    const smgo::BatchSpec spec = make_batch_spec(s, "batch_" + s.problem);
    const std::filesystem::path dir = spec.out_dir;
    const smgo::BatchSummary summary =
        recompute ? smgo::recompute_batch(dir) : smgo::run_batch(spec);
    smgo::write_summary_csv(dir / "summary.csv", {summary});
    std::cout << smgo::summary_csv({summary});
    std::cout << "summary: " << (dir / "summary.csv").string() << '\n';
    return kExitOk;
}

int cmd_sweep(Settings s, bool recompute) {
    finalize(s);
    smgo::find_problem(s.problem);
    if (!recompute && (s.alphas.empty() || s.deltas.empty()))
        throw std::invalid_argument("sweep needs --alphas and --deltas");
    smgo::BatchSpec base = make_batch_spec(s, "sweep_" + s.problem);
    const std::filesystem::path dir = base.out_dir;
    const std::vector<smgo::BatchSummary> rows =
        recompute ? smgo::recompute_sweep(dir)
                  : smgo::run_sweep(base, s.alphas, s.deltas);
    smgo::write_summary_csv(dir / "summary.csv", rows);
    std::cout << smgo::summary_csv(rows);
    std::cout << "summary: " << (dir / "summary.csv").string() << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained global optimization with set-membership "
                 "surrogate bounds"};
    app.require_subcommand(1);

    std::string format = "table";
    CLI::App* list = app.add_subcommand("list-problems",
                                        "Print the built-in problem registry");
    list->add_option("--format", format, "table or csv")
        ->check(CLI::IsMember({"table", "csv"}));

    Settings s;
    std::string config_path;
    bool recompute = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--problem", s.problem, "problem name (see list-problems)");
        cmd->add_option("--budget", s.cfg.budget, "total evaluations");
        cmd->add_option("--seed", s.cfg.seed, "master seed");
        cmd->add_option("--alpha", s.cfg.alpha, "improvement threshold factor");
        cmd->add_option("--delta", s.cfg.delta, "constraint risk factor in [0,1]");
        cmd->add_option("--beta", s.cfg.beta, "exploitation uncertainty reward");
        cmd->add_option("--phi", s.cfg.phi, "exploration age weight");
        cmd->add_option("--grid-B", s.cfg.grid_b, "segment grid divisor");
        cmd->add_option("--sobol-L", s.cfg.sobol_count,
                        "seed candidate / filler count");
        cmd->add_option("--tr-max", s.cfg.trust_max, "maximum trust size");
        cmd->add_option("--tr-shrink", s.cfg.trust_shrink,
                        "trust contraction factor");
        cmd->add_option("--tr-min", s.cfg.trust_min, "minimum trust size");
        cmd->add_flag("--noisy", s.cfg.noisy,
                      "estimate noise bands and deflate slope estimates");
        cmd->add_option("--noise-f", s.noise_f, "injected objective noise bound");
        cmd->add_option("--noise-c", s.noise_c,
                        "injected per-constraint noise bounds")
            ->delimiter(',');
        cmd->add_option("--start", s.start, "starting point, problem units")
            ->delimiter(',');
        cmd->add_option("--out", s.out,
                        "output directory (default $SMGO_OUT_DIR or ./out)");
    };

    CLI::App* run = app.add_subcommand("run", "One optimization run");
    add_common(run);

    CLI::App* batch =
        app.add_subcommand("batch", "Repeated seeded runs with a summary");
    add_common(batch);
    batch->add_option("--runs", s.runs, "number of runs");
    batch->add_flag("--random-starts", s.random_starts,
                    "draw a start per run instead of a fixed one");
    batch->add_option("--workers", s.workers, "parallel run workers");
    batch->add_flag("--recompute", recompute,
                    "rebuild summary.csv from archived traces, no new runs");

    CLI::App* sweep =
        app.add_subcommand("sweep", "Batch per (alpha, delta) grid cell");
    add_common(sweep);
    sweep->add_option("--runs", s.runs, "runs per cell");
    sweep->add_flag("--random-starts", s.random_starts,
                    "draw a start per run instead of a fixed one");
    sweep->add_option("--workers", s.workers, "parallel run workers");
    sweep->add_option("--alphas", s.alphas, "alpha grid values")->delimiter(',');
    sweep->add_option("--deltas", s.deltas, "delta grid values")->delimiter(',');
    sweep->add_flag("--recompute", recompute,
                    "rebuild summary.csv from archived traces, no new runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        // Config file first, then every flag given on the command line wins.
        if (!config_path.empty()) {
            Settings from_file = s;
            apply_config_file(config_path, from_file);
            CLI::App* active = app.get_subcommands().front();
            auto given = [&](const std::string& flag) {
                const CLI::Option* opt = active->get_option_no_throw(flag);
                return opt != nullptr && opt->count() > 0;
            };
            auto keep = [&](const std::string& flag, auto member) {
                if (given(flag))
                    from_file.*member = s.*member;
            };
            keep("--problem", &Settings::problem);
            keep("--noise-f", &Settings::noise_f);
            keep("--noise-c", &Settings::noise_c);
            keep("--runs", &Settings::runs);
            keep("--random-starts", &Settings::random_starts);
            keep("--workers", &Settings::workers);
            keep("--out", &Settings::out);
            keep("--start", &Settings::start);
            keep("--alphas", &Settings::alphas);
            keep("--deltas", &Settings::deltas);
            auto keep_cfg = [&](const std::string& flag, auto member) {
                if (given(flag))
                    from_file.cfg.*member = s.cfg.*member;
            };
            keep_cfg("--budget", &smgo::SolverConfig::budget);
            keep_cfg("--seed", &smgo::SolverConfig::seed);
            keep_cfg("--alpha", &smgo::SolverConfig::alpha);
            keep_cfg("--delta", &smgo::SolverConfig::delta);
            keep_cfg("--beta", &smgo::SolverConfig::beta);
            keep_cfg("--phi", &smgo::SolverConfig::phi);
            keep_cfg("--grid-B", &smgo::SolverConfig::grid_b);
            keep_cfg("--sobol-L", &smgo::SolverConfig::sobol_count);
            keep_cfg("--tr-max", &smgo::SolverConfig::trust_max);
            keep_cfg("--tr-shrink", &smgo::SolverConfig::trust_shrink);
            keep_cfg("--tr-min", &smgo::SolverConfig::trust_min);
            keep_cfg("--noisy", &smgo::SolverConfig::noisy);
            s = from_file;
        }

        if (list->parsed())
            return cmd_list_problems(format);
        if (s.problem.empty())
            throw std::invalid_argument("a problem name is required");
        if (run->parsed())
            return cmd_run(s);
        if (batch->parsed())
            return cmd_batch(s, recompute);
        return cmd_sweep(s, recompute);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEvaluation;
    }
}
