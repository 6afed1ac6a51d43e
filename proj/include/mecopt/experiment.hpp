#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mecopt/baselines.hpp"
#include "mecopt/orchestrator.hpp"
#include "mecopt/scenario.hpp"

namespace mecopt {

enum class Algorithm { PA, LC, FR };
enum class Axis { users, deadline, subcarriers };

std::string to_string(Algorithm a);
std::string to_string(Axis a);
Algorithm parse_algorithm(const std::string& name);
Axis parse_axis(const std::string& name);
/// Comma-separated list such as "PA,LC".
std::vector<Algorithm> parse_algorithms(const std::string& list);

/// Applies an axis value to a scenario: users -> K, subcarriers -> N,
/// deadline -> T in seconds.
void apply_axis(ScenarioSpec& spec, Axis axis, double value);

/// How per-point seeds are derived.
///  - per_point: base + point_index * 10007 + repetition
///  - common:    base + repetition, shared by every point of the sweep
enum class SeedPolicy { per_point, common };

struct SweepSpec {
    Axis axis = Axis::users;
    std::vector<double> values;
    std::size_t repetitions = 1;
    ScenarioSpec base;
    std::vector<Algorithm> algorithms{Algorithm::PA, Algorithm::LC, Algorithm::FR};
    /// Optional outer series, e.g. one curve per user count while sweeping N.
    std::optional<Axis> series_axis;
    std::vector<double> series_values;
    SeedPolicy seeds = SeedPolicy::per_point;
};

/// Throws BadSpec unless values are nonempty and strictly monotone,
/// repetitions >= 1 and the algorithm list is nonempty.
void validate(const SweepSpec& spec);
SweepSpec load_sweep(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::uint64_t> seed;               // replaces the scenario's rng_seed
    std::optional<std::vector<Algorithm>> algorithms;
    SolveSchedule schedule;
    FrPolicy fr;
    std::size_t threads = 0;  // 0 = hardware concurrency
    bool timing = false;      // record wall-clock times; off keeps output byte-stable
};

/// Solver settings from an optional `solver` section: z_max, precision,
/// dual_sign, step_rule.
SolveSchedule parse_schedule(const std::filesystem::path& path, const SolveSchedule& base = {});

struct CsvRow {
    std::uint64_t seed = 0;
    std::size_t K = 0;
    std::size_t N = 0;
    double T_s = 0.0;
    std::string algorithm;
    std::string status;  // ok, violated, infeasible, no_feasible_primal, error
    double total_energy_J = 0.0;
    double mean_offload_ratio = 0.0;
    std::size_t outer_iterations = 0;
    double wall_ms = 0.0;
    std::string violations;  // "constraint@index" entries joined by ';'
};

inline constexpr const char* kCsvHeader =
    "seed,K,N,T_s,algorithm,status,total_energy_J,mean_offload_ratio,outer_iterations,wall_ms,violations";

std::string format_row(const CsvRow& row);
CsvRow parse_row(const std::string& line);
void write_csv(std::ostream& os, const std::vector<CsvRow>& rows);
std::vector<CsvRow> read_csv(std::istream& is);

std::string format_violations(const std::vector<Violation>& violations);

/// One algorithm on one instance.
struct RunRecord {
    CsvRow row;
    std::optional<SolveReport> report;  // absent when the solver threw
    std::string message;                // diagnosis for non-ok rows
};

RunRecord run_algorithm(Algorithm algorithm, const Instance& instance, std::uint64_t seed,
                        const RunOptions& options);

struct PointSummary {
    std::size_t point = 0;
    double axis_value = 0.0;
    std::optional<double> series_value;
    std::string algorithm;
    std::size_t runs = 0;
    std::size_t ok = 0;                 // feasible runs
    double mean_energy_J = 0.0;         // over runs with status ok or violated
    double mean_offload_ratio = 0.0;
    /// 1 - sum E_PA / sum E_LC over seeds where PA is ok and LC has an energy
    std::optional<double> saving_vs_lc;
    std::optional<double> saving_vs_fr;
};

struct SweepResult {
    std::vector<RunRecord> records;  // (point, repetition, algorithm) order
    std::vector<PointSummary> summary;
};

struct SweepPoint {
    std::size_t index = 0;
    double axis_value = 0.0;
    std::optional<double> series_value;
    ScenarioSpec scenario;
};

std::vector<SweepPoint> expand(const SweepSpec& spec);
std::uint64_t point_seed(const SweepSpec& spec, std::uint64_t base, std::size_t point, std::size_t repetition);

SweepResult run_sweep(const SweepSpec& spec, const RunOptions& options);

std::vector<CsvRow> rows_of(const std::vector<RunRecord>& records);
void write_summary_csv(std::ostream& os, const std::vector<PointSummary>& summary);
void print_summary(std::ostream& os, const SweepSpec& spec, const std::vector<PointSummary>& summary);

/// Regenerates the row's instance and re-evaluates the stored allocation.
/// Returns the recomputed total energy.
double recompute_energy(const ScenarioSpec& scenario, const SolveReport& report);

}  // namespace mecopt
