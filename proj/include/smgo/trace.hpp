#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smgo/solver.hpp"

namespace smgo {

/// Everything needed to re-derive a run's metrics and summary row from its
/// trace file alone: the effective configuration plus the final outcome.
struct TraceMeta {
    std::string problem;
    std::size_t budget = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    double delta = 0.0;
    double beta = 0.0;
    double phi = 0.0;
    unsigned grid_b = 0;
    std::size_t sobol_count = 0;
    double trust_max = 0.0;
    double trust_shrink = 0.0;
    double trust_min = 0.0;
    bool noisy = false;
    double noise_f = 0.0;
    Vec noise_c;
    std::optional<Vec> start;  // problem units
    RunStatus status = RunStatus::no_feasible;
    bool found = false;
    Vec best_x;
    double best_z = 0.0;
    Vec best_c;
    std::string error;
};

struct Trace {
    TraceMeta meta;
    std::vector<IterationRecord> records;
};

inline const char* run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::no_feasible: return "no_feasible";
        default: return "evaluation_failed";
    }
}

inline RunStatus run_status_from_name(const std::string& s) {
    if (s == "ok")
        return RunStatus::ok;
    if (s == "no_feasible")
        return RunStatus::no_feasible;
    if (s == "evaluation_failed")
        return RunStatus::evaluation_failed;
    throw std::invalid_argument("unknown run status: " + s);
}

inline Mode mode_from_name(const std::string& s) {
    if (s == "initial")
        return Mode::initial;
    if (s == "exploit")
        return Mode::exploit;
    if (s == "explore")
        return Mode::explore;
    throw std::invalid_argument("unknown mode: " + s);
}

inline nlohmann::json record_to_json(const IterationRecord& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["x"] = r.x;
    j["z"] = r.z;
    j["c"] = r.c;
    j["mode"] = mode_name(r.mode);
    j["feasible"] = r.feasible;
    j["z_best"] = r.z_best ? nlohmann::json(*r.z_best) : nlohmann::json(nullptr);
    j["trust"] = r.trust_size ? nlohmann::json(*r.trust_size) : nlohmann::json(nullptr);
    j["gamma"] = r.gamma;
    j["rho"] = r.rho;
    j["eps_f"] = r.eps_f;
    j["eps_c"] = r.eps_c;
    j["elapsed_ms"] = r.elapsed_ms;
    return j;
}

inline IterationRecord record_from_json(const nlohmann::json& j) {
    IterationRecord r;
    r.n = j.at("n").get<std::size_t>();
    r.x = j.at("x").get<Vec>();
    r.z = j.at("z").get<double>();
    r.c = j.at("c").get<Vec>();
    r.mode = mode_from_name(j.at("mode").get<std::string>());
    r.feasible = j.at("feasible").get<bool>();
    if (!j.at("z_best").is_null())
        r.z_best = j.at("z_best").get<double>();
    if (!j.at("trust").is_null())
        r.trust_size = j.at("trust").get<double>();
    r.gamma = j.at("gamma").get<double>();
    r.rho = j.at("rho").get<Vec>();
    r.eps_f = j.at("eps_f").get<double>();
    r.eps_c = j.at("eps_c").get<Vec>();
    r.elapsed_ms = j.at("elapsed_ms").get<double>();
    return r;
}

inline nlohmann::json meta_to_json(const TraceMeta& m) {
    nlohmann::json j;
    j["problem"] = m.problem;
    j["budget"] = m.budget;
    j["seed"] = m.seed;
    j["alpha"] = m.alpha;
    j["delta"] = m.delta;
    j["beta"] = m.beta;
    j["phi"] = m.phi;
    j["grid_b"] = m.grid_b;
    j["sobol_count"] = m.sobol_count;
    j["trust_max"] = m.trust_max;
    j["trust_shrink"] = m.trust_shrink;
    j["trust_min"] = m.trust_min;
    j["noisy"] = m.noisy;
    j["noise_f"] = m.noise_f;
    j["noise_c"] = m.noise_c;
    j["start"] = m.start ? nlohmann::json(*m.start) : nlohmann::json(nullptr);
    j["status"] = run_status_name(m.status);
    j["found"] = m.found;
    j["best_x"] = m.best_x;
    j["best_z"] = m.best_z;
    j["best_c"] = m.best_c;
    j["error"] = m.error;
    return j;
}

inline TraceMeta meta_from_json(const nlohmann::json& j) {
    TraceMeta m;
    m.problem = j.at("problem").get<std::string>();
    m.budget = j.at("budget").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.alpha = j.at("alpha").get<double>();
    m.delta = j.at("delta").get<double>();
    m.beta = j.at("beta").get<double>();
    m.phi = j.at("phi").get<double>();
    m.grid_b = j.at("grid_b").get<unsigned>();
    m.sobol_count = j.at("sobol_count").get<std::size_t>();
    m.trust_max = j.at("trust_max").get<double>();
    m.trust_shrink = j.at("trust_shrink").get<double>();
    m.trust_min = j.at("trust_min").get<double>();
    m.noisy = j.at("noisy").get<bool>();
    m.noise_f = j.at("noise_f").get<double>();
    m.noise_c = j.at("noise_c").get<Vec>();
    if (!j.at("start").is_null())
        m.start = j.at("start").get<Vec>();
    m.status = run_status_from_name(j.at("status").get<std::string>());
    m.found = j.at("found").get<bool>();
    m.best_x = j.at("best_x").get<Vec>();
    m.best_z = j.at("best_z").get<double>();
    m.best_c = j.at("best_c").get<Vec>();
    m.error = j.at("error").get<std::string>();
    return m;
}

inline TraceMeta make_meta(const std::string& problem, const SolverConfig& cfg,
                           double noise_f, const Vec& noise_c,
                           const RunResult& result) {
    TraceMeta m;
    m.problem = problem;
    m.budget = cfg.budget;
    m.seed = cfg.seed;
    m.alpha = cfg.alpha;
    m.delta = cfg.delta;
    m.beta = cfg.beta;
    m.phi = cfg.phi;
    m.grid_b = cfg.grid_b;
    m.sobol_count = cfg.sobol_count;
    m.trust_max = cfg.trust_max;
    m.trust_shrink = cfg.trust_shrink;
    m.trust_min = cfg.trust_min;
    m.noisy = cfg.noisy;
    m.noise_f = noise_f;
    m.noise_c = noise_c;
    m.start = cfg.start;
    m.status = result.status;
    m.found = result.found;
    m.best_x = result.best_x;
    m.best_z = result.best_z;
    m.best_c = result.best_c;
    m.error = result.error;
    return m;
}

/// One JSON object per line: every iteration record, then a summary line
/// wrapping the meta object.
inline void write_trace(const std::filesystem::path& path, const Trace& trace) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open trace file for writing: " +
                                 path.string());
    for (const IterationRecord& r : trace.records)
        out << record_to_json(r).dump() << '\n';
    nlohmann::json s;
    s["summary"] = meta_to_json(trace.meta);
    out << s.dump() << '\n';
    if (!out)
        throw std::runtime_error("failed writing trace file: " + path.string());
}

inline Trace read_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open trace file: " + path.string());
    Trace t;
    bool have_meta = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.contains("summary")) {
            t.meta = meta_from_json(j.at("summary"));
            have_meta = true;
        } else {
            t.records.push_back(record_from_json(j));
        }
    }
    if (!have_meta)
        throw std::runtime_error("trace file has no summary line: " +
                                 path.string());
    return t;
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace smgo
