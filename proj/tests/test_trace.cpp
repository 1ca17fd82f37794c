#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "smgo/smgo.hpp"
#include "smgo/trace.hpp"

using namespace smgo;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("trace_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Trace sample_trace() {
    SolverConfig cfg;
    cfg.budget = 25;
    cfg.seed = 13;
    Solver solver(find_problem("G24"), cfg);
    const RunResult result = solver.run();
    Trace t;
    t.meta = make_meta("G24", cfg, 0.0, {}, result);
    t.records = result.records;
    return t;
}

bool records_equal(const IterationRecord& a, const IterationRecord& b) {
    return a.n == b.n && a.x == b.x && a.z == b.z && a.c == b.c &&
           a.mode == b.mode && a.feasible == b.feasible &&
           a.z_best == b.z_best && a.trust_size == b.trust_size &&
           a.gamma == b.gamma && a.rho == b.rho && a.eps_f == b.eps_f &&
           a.eps_c == b.eps_c && a.elapsed_ms == b.elapsed_ms;
}

} // namespace

TEST_CASE("iteration records survive a JSON round trip unchanged") {
    const Trace t = sample_trace();
    REQUIRE(t.records.size() == 25);
    for (const IterationRecord& rec : t.records) {
        const IterationRecord back = record_from_json(record_to_json(rec));
        CHECK(records_equal(rec, back));
    }
}

TEST_CASE("meta survives a JSON round trip unchanged") {
    Trace t = sample_trace();
    t.meta.noise_f = 0.25;
    t.meta.noise_c = {0.1, 0.05};
    t.meta.start = Vec{1.0, 2.0};
    t.meta.error = "late failure";
    const TraceMeta back = meta_from_json(meta_to_json(t.meta));
    CHECK(back.problem == t.meta.problem);
    CHECK(back.budget == t.meta.budget);
    CHECK(back.seed == t.meta.seed);
    CHECK(back.alpha == t.meta.alpha);
    CHECK(back.delta == t.meta.delta);
    CHECK(back.beta == t.meta.beta);
    CHECK(back.phi == t.meta.phi);
    CHECK(back.grid_b == t.meta.grid_b);
    CHECK(back.sobol_count == t.meta.sobol_count);
    CHECK(back.trust_max == t.meta.trust_max);
    CHECK(back.trust_shrink == t.meta.trust_shrink);
    CHECK(back.trust_min == t.meta.trust_min);
    CHECK(back.noisy == t.meta.noisy);
    CHECK(back.noise_f == t.meta.noise_f);
    CHECK(back.noise_c == t.meta.noise_c);
    CHECK(back.start == t.meta.start);
    CHECK(back.status == t.meta.status);
    CHECK(back.found == t.meta.found);
    CHECK(back.best_x == t.meta.best_x);
    CHECK(back.best_z == t.meta.best_z);
    CHECK(back.best_c == t.meta.best_c);
    CHECK(back.error == t.meta.error);
}

TEST_CASE("absent optionals serialize as null and read back absent") {
    Trace t = sample_trace();
    IterationRecord rec = t.records.front();
    rec.z_best.reset();
    rec.trust_size.reset();
    const nlohmann::json j = record_to_json(rec);
    CHECK(j.at("z_best").is_null());
    CHECK(j.at("trust").is_null());
    const IterationRecord back = record_from_json(j);
    CHECK_FALSE(back.z_best.has_value());
    CHECK_FALSE(back.trust_size.has_value());

    t.meta.start.reset();
    CHECK(meta_to_json(t.meta).at("start").is_null());
    CHECK_FALSE(meta_from_json(meta_to_json(t.meta)).start.has_value());
}

TEST_CASE("trace files round trip through disk") {
    TempDir tmp;
    const Trace t = sample_trace();
    const fs::path file = tmp.path / "nested" / "dir" / "trace.jsonl";
    write_trace(file, t);  // creates parent directories on demand

    const Trace back = read_trace(file);
    REQUIRE(back.records.size() == t.records.size());
    for (std::size_t i = 0; i < t.records.size(); ++i)
        CHECK(records_equal(t.records[i], back.records[i]));
    CHECK(back.meta.problem == t.meta.problem);
    CHECK(back.meta.best_z == t.meta.best_z);
    CHECK(back.meta.status == t.meta.status);

    // Round trip is byte stable: writing what was read reproduces the file.
    const fs::path copy = tmp.path / "copy.jsonl";
    write_trace(copy, back);
    std::ifstream a(file), b(copy);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
}

TEST_CASE("the summary line is last and carries the meta object") {
    TempDir tmp;
    const Trace t = sample_trace();
    const fs::path file = tmp.path / "trace.jsonl";
    write_trace(file, t);

    std::ifstream in(file);
    std::string line, last;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        last = line;
    }
    CHECK(lines == t.records.size() + 1);
    const nlohmann::json j = nlohmann::json::parse(last);
    REQUIRE(j.contains("summary"));
    CHECK(j.at("summary").at("problem") == "G24");
}

TEST_CASE("a trace without a summary line is rejected") {
    TempDir tmp;
    const fs::path file = tmp.path / "headless.jsonl";
    {
        const Trace t = sample_trace();
        std::ofstream out(file);
        for (const IterationRecord& rec : t.records)
            out << record_to_json(rec).dump() << '\n';
    }
    CHECK_THROWS_AS(read_trace(file), std::runtime_error);
    CHECK_THROWS_AS(read_trace(tmp.path / "missing.jsonl"), std::runtime_error);
}

TEST_CASE("unknown enum names are rejected") {
    CHECK_THROWS_AS(mode_from_name("wander"), std::invalid_argument);
    CHECK_THROWS_AS(run_status_from_name("fine"), std::invalid_argument);
    CHECK(mode_from_name("initial") == Mode::initial);
    CHECK(mode_from_name("exploit") == Mode::exploit);
    CHECK(mode_from_name("explore") == Mode::explore);
    CHECK(run_status_from_name("ok") == RunStatus::ok);
    CHECK(run_status_from_name("no_feasible") == RunStatus::no_feasible);
    CHECK(run_status_from_name("evaluation_failed") ==
          RunStatus::evaluation_failed);
}

TEST_CASE("format_double emits shortest exact decimals") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-2.0) == "-2");
    CHECK(format_double(0.1) == "0.1");
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> wide(-1e6, 1e6);
    for (int i = 0; i < 500; ++i) {
        const double v = wide(rng);
        CHECK(std::stod(format_double(v)) == v);
    }
}
