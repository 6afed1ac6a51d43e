#include <cmath>
#include <fstream>
#include <sstream>

#include "mecopt/experiment.hpp"
#include "support.hpp"

using namespace mecopt;

TEST_CASE("CSV rows round-trip") {
    CsvRow r;
    r.seed = 12345678901234ull;
    r.K = 20;
    r.N = 512;
    r.T_s = 2e-3;
    r.algorithm = "PA";
    r.status = "ok";
    r.total_energy_J = 3.0912345678901234;
    r.mean_offload_ratio = 0.1 + 0.2;
    r.outer_iterations = 7;
    r.wall_ms = 0.0;
    r.violations = "deadline@3;capacity";
    const auto line = format_row(r);
    CHECK(line.find(' ') == std::string::npos);
    const auto back = parse_row(line);
    CHECK(back.seed == r.seed);
    CHECK(back.K == r.K);
    CHECK(back.N == r.N);
    CHECK(back.T_s == r.T_s);
    CHECK(back.algorithm == r.algorithm);
    CHECK(back.status == r.status);
    CHECK(back.total_energy_J == r.total_energy_J);
    CHECK(back.mean_offload_ratio == r.mean_offload_ratio);
    CHECK(back.outer_iterations == r.outer_iterations);
    CHECK(back.violations == r.violations);

    r.total_energy_J = NAN;
    CHECK(std::isnan(parse_row(format_row(r)).total_energy_J));

    std::stringstream ss;
    write_csv(ss, {r, r});
    const auto text = ss.str();
    CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    CHECK(text.back() == '\n');
    CHECK(read_csv(ss).size() == 2);
}

TEST_CASE("CSV header order") {
    CHECK(std::string(kCsvHeader) ==
          "seed,K,N,T_s,algorithm,status,total_energy_J,mean_offload_ratio,outer_iterations,wall_ms,violations");
}

TEST_CASE("malformed CSV") {
    CHECK_THROWS_AS(parse_row("1,2,3"), BadSpec);
    CHECK_THROWS_AS(parse_row("x,2,3,0.002,PA,ok,1,0.5,3,0,"), BadSpec);
    std::stringstream no_header("1,2,3,0.002,PA,ok,1,0.5,3,0,\n");
    CHECK_THROWS_AS(read_csv(no_header), BadSpec);
}

TEST_CASE("names and axes") {
    CHECK(parse_algorithms("PA,LC,FR").size() == 3);
    CHECK(parse_algorithm("LC") == Algorithm::LC);
    CHECK_THROWS_AS(parse_algorithm("XX"), BadSpec);
    CHECK_THROWS_AS(parse_axis("power"), BadSpec);
    ScenarioSpec s;
    apply_axis(s, Axis::users, 25);
    apply_axis(s, Axis::subcarriers, 128);
    apply_axis(s, Axis::deadline, 1.5e-3);
    CHECK(s.K == 25);
    CHECK(s.N == 128);
    CHECK(s.T == 1.5e-3);
}

TEST_CASE("sweep validation") {
    SweepSpec s;
    s.values = {10, 20, 20};
    CHECK_THROWS_AS(validate(s), BadSpec);
    s.values = {};
    CHECK_THROWS_AS(validate(s), BadSpec);
    s.values = {30, 20, 10};
    CHECK_NOTHROW(validate(s));
    s.repetitions = 0;
    CHECK_THROWS_AS(validate(s), BadSpec);
}

namespace {

SweepSpec tiny_sweep() {
    SweepSpec s;
    s.axis = Axis::users;
    s.values = {2, 4};
    s.repetitions = 2;
    s.base.N = 16;
    s.base.rng_seed = 7;
    return s;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream os;
    write_csv(os, rows_of(r.records));
    return os.str();
}

}  // namespace

TEST_CASE("sweeps are reproducible and consistent") {
    const auto spec = tiny_sweep();
    RunOptions one;
    one.threads = 1;
    RunOptions many;
    many.threads = 4;
    const auto a = run_sweep(spec, one);
    const auto b = run_sweep(spec, many);
    CHECK(csv_of(a) == csv_of(b));
    REQUIRE(a.records.size() == 2 * 2 * 3);
    CHECK(a.records[0].row.algorithm == "PA");
    CHECK(a.records[1].row.algorithm == "LC");
    CHECK(a.records[2].row.algorithm == "FR");

    // Every row's energy is reproduced by regenerating its instance.
    const auto points = expand(spec);
    for (const auto& rec : a.records) {
        if (!rec.report) continue;
        auto scenario = points[rec.row.K == 2 ? 0 : 1].scenario;
        scenario.rng_seed = rec.row.seed;
        const double e = recompute_energy(scenario, *rec.report);
        CHECK(std::abs(e - rec.row.total_energy_J) <= 0.01 * std::abs(rec.row.total_energy_J));
    }
    REQUIRE(a.summary.size() == 2 * 3);
    for (const auto& p : a.summary) {
        CHECK(p.runs == 2);
        if (p.algorithm == "PA") CHECK(p.saving_vs_lc.has_value());
    }
}

TEST_CASE("seed policies") {
    auto s = tiny_sweep();
    CHECK(point_seed(s, 7, 1, 1) == 7 + 10007 + 1);
    s.seeds = SeedPolicy::common;
    CHECK(point_seed(s, 7, 1, 1) == 8);
}

TEST_CASE("series expansion") {
    auto s = tiny_sweep();
    s.axis = Axis::subcarriers;
    s.values = {8, 16};
    s.series_axis = Axis::users;
    s.series_values = {2, 3};
    const auto points = expand(s);
    REQUIRE(points.size() == 4);
    CHECK(points[0].scenario.K == 2);
    CHECK(points[0].scenario.N == 8);
    CHECK(points[1].scenario.N == 16);
    CHECK(points[2].scenario.K == 3);
}

TEST_CASE("sweep files") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto good = dir / "mecopt_sweep_ok.yaml";
    std::ofstream(good) << "sweep:\n  axis: deadline\n  values: [1.5e-3, 2.0e-3]\n  repetitions: 3\n"
                           "  algorithms: [PA, LC]\nscenario:\n  K: 4\n  N: 16\nsolver:\n  z_max: 50\n";
    const auto s = load_sweep(good);
    CHECK(s.axis == Axis::deadline);
    CHECK(s.values.size() == 2);
    CHECK(s.repetitions == 3);
    CHECK(s.algorithms.size() == 2);
    CHECK(s.base.K == 4);
    CHECK(parse_schedule(good).z_max == 50);

    const auto bad = dir / "mecopt_sweep_bad.yaml";
    std::ofstream(bad) << "sweep:\n  axis: users\n  values: [10, 10]\nscenario: {}\n";
    CHECK_THROWS_AS(load_sweep(bad), BadSpec);
    std::ofstream(bad) << "sweep: [\n";
    CHECK_THROWS_AS(load_sweep(bad), BadSpec);
    std::filesystem::remove(good);
    std::filesystem::remove(bad);
}
