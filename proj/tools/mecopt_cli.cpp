// mecopt: single solves, sweeps and oracle comparisons from YAML files.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>

#include "mecopt/experiment.hpp"

using namespace mecopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitInfeasible = 2;

struct Flags {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string summary;
    std::string algorithms;
    std::string dual_sign;
    std::optional<double> precision;
    std::optional<std::size_t> z_max;
    std::size_t threads = 0;
    bool timing = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--seed", f.seed, "Base RNG seed (replaces scenario.rng_seed)");
    cmd->add_option("--out", f.out, "CSV output path (default: stdout)");
    cmd->add_option("--algorithms", f.algorithms, "Comma-separated subset of PA,LC,FR");
    cmd->add_option("--dual-sign", f.dual_sign, "Multiplier step sign")->check(CLI::IsMember({"paper", "ascent"}));
    cmd->add_option("--precision", f.precision, "Relative-change stop of the outer and dual loops")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--z-max", f.z_max, "Outer iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    cmd->add_flag("--timing", f.timing, "Record wall-clock times (CSV is no longer byte-stable)");
}

RunOptions options_from(const Flags& f, const std::string& file) {
    RunOptions o;
    o.schedule = parse_schedule(file);
    o.seed = f.seed;
    if (!f.algorithms.empty()) o.algorithms = parse_algorithms(f.algorithms);
    if (f.dual_sign == "paper") o.schedule.ps.sign = DualSign::paper;
    if (f.dual_sign == "ascent") o.schedule.ps.sign = DualSign::ascent;
    if (f.precision) {
        o.schedule.precision = *f.precision;
        o.schedule.ps.precision = *f.precision;
    }
    if (f.z_max) o.schedule.z_max = *f.z_max;
    o.threads = f.threads;
    o.timing = f.timing;
    return o;
}

void emit_csv(const Flags& f, const std::vector<CsvRow>& rows) {
    if (f.out.empty()) {
        write_csv(std::cout, rows);
        return;
    }
    std::ofstream os(f.out, std::ios::binary);
    if (!os) throw BadSpec("cannot write " + f.out);
    write_csv(os, rows);
}

// Human-readable output goes to stdout only when the CSV does not.
std::ostream& human(const Flags& f) { return f.out.empty() ? std::cerr : std::cout; }

void describe(std::ostream& os, const RunRecord& rec) {
    const auto& r = rec.row;
    os << fmt::format("{:<6} {:<18} E={:.9g} J  mean ratio={:.4f}  outer={}", r.algorithm, r.status,
                      r.total_energy_J, r.mean_offload_ratio, r.outer_iterations);
    if (!r.violations.empty()) os << "  violations=" << r.violations;
    os << '\n';
    if (!rec.message.empty()) os << "       " << rec.message << '\n';
    if (rec.report && !rec.report->notes.empty()) os << "       " << rec.report->notes << '\n';
}

int run_solve(const std::string& file, const Flags& f) {
    auto scenario = load_scenario(file);
    const auto options = options_from(f, file);
    if (options.seed) scenario.rng_seed = *options.seed;
    const auto instance = generate(scenario);
    const auto algorithms = options.algorithms.value_or(std::vector<Algorithm>{Algorithm::PA});

    std::vector<RunRecord> records;
    for (const auto a : algorithms) records.push_back(run_algorithm(a, instance, scenario.rng_seed, options));
    emit_csv(f, rows_of(records));

    auto& os = human(f);
    os << fmt::format("K={} N={} T={} s seed={}\n", scenario.K, scenario.N, scenario.T, scenario.rng_seed);
    for (const auto& rec : records) describe(os, rec);

    const auto& pa = std::find_if(records.begin(), records.end(),
                                  [](const RunRecord& r) { return r.row.algorithm == "PA"; });
    const auto& primary = pa != records.end() ? *pa : records.front();
    return primary.row.status == "ok" ? kExitOk : kExitInfeasible;
}

int run_sweep_cmd(const std::string& file, const Flags& f) {
    const auto spec = load_sweep(file);
    const auto options = options_from(f, file);
    const auto result = run_sweep(spec, options);
    emit_csv(f, rows_of(result.records));
    if (!f.summary.empty()) {
        std::ofstream os(f.summary, std::ios::binary);
        if (!os) throw BadSpec("cannot write " + f.summary);
        write_summary_csv(os, result.summary);
    }
    print_summary(human(f), spec, result.summary);
    return kExitOk;
}

int run_oracle_compare(const std::string& file, const Flags& f) {
    auto scenario = load_scenario(file);
    const auto options = options_from(f, file);
    if (options.seed) scenario.rng_seed = *options.seed;
    const auto instance = generate(scenario);
    const auto oracle = solve_oracle(instance.tasks, instance.channel, instance.config, {}, options.threads);

    std::vector<RunRecord> records;
    RunRecord o;
    o.row = {scenario.rng_seed, scenario.K, scenario.N, scenario.T, "ORACLE", oracle.found ? "ok" : "infeasible",
             oracle.best_energy, oracle.found ? oracle.best_allocation.mean_offload_ratio() : NAN, 0, 0.0, ""};
    o.message = oracle.diagnosis;
    records.push_back(o);
    const auto algorithms =
        options.algorithms.value_or(std::vector<Algorithm>{Algorithm::PA, Algorithm::LC, Algorithm::FR});
    for (const auto a : algorithms) records.push_back(run_algorithm(a, instance, scenario.rng_seed, options));
    emit_csv(f, rows_of(records));

    auto& os = human(f);
    os << fmt::format("K={} N={} T={} s seed={}  oracle grid: lambda step {}, f step {:.6g}, {} assignments\n",
                      scenario.K, scenario.N, scenario.T, scenario.rng_seed, oracle.grid_resolution.lambda_step,
                      oracle.grid_resolution.f_step, oracle.assignments);
    for (const auto& rec : records) {
        describe(os, rec);
        if (oracle.found && rec.report && rec.row.algorithm == "PA") {
            const double gap = grid_gap(instance.tasks, instance.channel, instance.config, rec.report->allocation);
            os << fmt::format("       PA / oracle = {:.6f}, grid gap {:.3g} J\n",
                              rec.row.total_energy_J / oracle.best_energy, gap);
        }
    }
    return oracle.found ? kExitOk : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-minimal partial offloading and OFDMA resource allocation"};
    app.require_subcommand(1);
    Flags flags;
    std::string file;

    auto* solve_cmd = app.add_subcommand("solve", "Solve one generated instance");
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
    auto* oracle_cmd = app.add_subcommand("oracle-compare", "Compare against exhaustive search (K<=3, N<=4)");
    for (auto* cmd : {solve_cmd, sweep_cmd, oracle_cmd}) {
        cmd->add_option("file", file, "YAML configuration")->required();
        add_common(cmd, flags);
    }
    sweep_cmd->add_option("--summary", flags.summary, "Per-point aggregate CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (*solve_cmd) return run_solve(file, flags);
        if (*sweep_cmd) return run_sweep_cmd(file, flags);
        return run_oracle_compare(file, flags);
    } catch (const BadSpec& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const TooLarge& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    }
}
