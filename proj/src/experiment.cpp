#include "mecopt/experiment.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "mecopt/parallel.hpp"

namespace mecopt {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::PA: return "PA";
        case Algorithm::LC: return "LC";
        case Algorithm::FR: return "FR";
    }
    return "?";
}

std::string to_string(Axis a) {
    switch (a) {
        case Axis::users: return "users";
        case Axis::deadline: return "deadline";
        case Axis::subcarriers: return "subcarriers";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "PA") return Algorithm::PA;
    if (name == "LC") return Algorithm::LC;
    if (name == "FR") return Algorithm::FR;
    throw BadSpec("unknown algorithm `" + name + "` (expected PA, LC or FR)");
}

Axis parse_axis(const std::string& name) {
    if (name == "users") return Axis::users;
    if (name == "deadline") return Axis::deadline;
    if (name == "subcarriers") return Axis::subcarriers;
    throw BadSpec("unknown axis `" + name + "` (expected users, deadline or subcarriers)");
}

std::vector<Algorithm> parse_algorithms(const std::string& list) {
    std::vector<Algorithm> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_algorithm(item));
    }
    if (out.empty()) throw BadSpec("algorithm list is empty");
    return out;
}

void apply_axis(ScenarioSpec& spec, Axis axis, double value) {
    auto whole = [&](const char* what) {
        if (value < 0.0 || value != std::floor(value)) {
            throw BadSpec(std::string(what) + " axis values must be non-negative integers");
        }
        return static_cast<std::size_t>(value);
    };
    switch (axis) {
        case Axis::users: spec.K = whole("users"); break;
        case Axis::subcarriers: spec.N = whole("subcarriers"); break;
        case Axis::deadline: spec.T = value; break;
    }
}

void validate(const SweepSpec& spec) {
    auto monotone = [](const std::vector<double>& v, const char* what) {
        if (v.empty()) throw BadSpec(std::string(what) + " must not be empty");
        const bool up = std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
        const bool down = std::adjacent_find(v.begin(), v.end(), std::less_equal<>()) == v.end();
        if (!up && !down) throw BadSpec(std::string(what) + " must be strictly monotone");
    };
    monotone(spec.values, "values");
    if (spec.series_axis) {
        monotone(spec.series_values, "series values");
        if (*spec.series_axis == spec.axis) throw BadSpec("series axis must differ from the sweep axis");
    }
    if (spec.repetitions < 1) throw BadSpec("repetitions must be at least 1");
    if (spec.algorithms.empty()) throw BadSpec("algorithms must not be empty");
}

namespace {

std::vector<double> numbers(const YAML::Node& node, const char* key) {
    if (!node || !node.IsSequence()) throw BadSpec(std::string("`") + key + "` must be a list");
    std::vector<double> out;
    for (const auto& v : node) {
        try {
            out.push_back(v.as<double>());
        } catch (const YAML::Exception&) {
            throw BadSpec(std::string("`") + key + "` must hold numbers");
        }
    }
    return out;
}

YAML::Node load_yaml(const std::filesystem::path& path) {
    try {
        return YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw BadSpec("cannot read " + path.string() + ": " + e.what());
    }
}

}  // namespace

SweepSpec load_sweep(const std::filesystem::path& path) {
    const auto doc = load_yaml(path);
    if (!doc.IsMap() || !doc["sweep"] || !doc["sweep"].IsMap()) {
        throw BadSpec(path.string() + ": missing `sweep` section");
    }
    const auto s = doc["sweep"];
    SweepSpec spec;
    try {
        if (!s["axis"]) throw BadSpec("sweep needs an `axis`");
        spec.axis = parse_axis(s["axis"].as<std::string>());
        spec.values = numbers(s["values"], "values");
        if (s["repetitions"]) {
            const auto r = s["repetitions"].as<long long>();
            if (r < 1) throw BadSpec("repetitions must be at least 1");
            spec.repetitions = static_cast<std::size_t>(r);
        }
        if (s["algorithms"]) {
            spec.algorithms.clear();
            for (const auto& a : s["algorithms"]) spec.algorithms.push_back(parse_algorithm(a.as<std::string>()));
        }
        if (s["series"]) {
            const auto series = s["series"];
            if (!series.IsMap() || !series["axis"]) throw BadSpec("`series` needs an `axis` and `values`");
            spec.series_axis = parse_axis(series["axis"].as<std::string>());
            spec.series_values = numbers(series["values"], "series values");
        }
        if (s["seeds"]) {
            const auto policy = s["seeds"].as<std::string>();
            if (policy == "per_point") {
                spec.seeds = SeedPolicy::per_point;
            } else if (policy == "common") {
                spec.seeds = SeedPolicy::common;
            } else {
                throw BadSpec("`seeds` must be per_point or common");
            }
        }
    } catch (const YAML::Exception& e) {
        throw BadSpec(path.string() + ": " + e.what());
    }
    if (doc["scenario"]) spec.base = parse_scenario(doc["scenario"]);
    validate(spec);
    return spec;
}

SolveSchedule parse_schedule(const std::filesystem::path& path, const SolveSchedule& base) {
    const auto doc = load_yaml(path);
    SolveSchedule out = base;
    if (!doc.IsMap() || !doc["solver"]) return out;
    const auto s = doc["solver"];
    try {
        if (s["z_max"]) out.z_max = s["z_max"].as<std::size_t>();
        if (s["precision"]) {
            out.precision = s["precision"].as<double>();
            out.ps.precision = out.precision;
        }
        if (s["dual_sign"]) {
            const auto v = s["dual_sign"].as<std::string>();
            if (v == "ascent") {
                out.ps.sign = DualSign::ascent;
            } else if (v == "paper") {
                out.ps.sign = DualSign::paper;
            } else {
                throw BadSpec("`dual_sign` must be paper or ascent");
            }
        }
        if (s["step_rule"]) {
            const auto v = s["step_rule"].as<std::string>();
            if (v == "scaled") {
                out.ps.step_rule = StepRule::scaled;
            } else if (v == "table") {
                out.ps.step_rule = StepRule::table;
            } else {
                throw BadSpec("`step_rule` must be scaled or table");
            }
        }
    } catch (const YAML::Exception& e) {
        throw BadSpec(path.string() + ": solver: " + e.what());
    }
    if (out.z_max < 1) throw BadSpec("z_max must be at least 1");
    if (!(out.precision > 0.0)) throw BadSpec("precision must be positive");
    return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string format_row(const CsvRow& r) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", r.seed, r.K, r.N, r.T_s, r.algorithm, r.status,
                       r.total_energy_J, r.mean_offload_ratio, r.outer_iterations, r.wall_ms, r.violations);
}

namespace {

template <class T>
T parse_field(const std::string& field, const char* name) {
    T value{};
    if (field == "nan" && std::is_floating_point_v<T>) return static_cast<T>(NAN);
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end) throw BadSpec(fmt::format("bad CSV field {}: `{}`", name, field));
    return value;
}

}  // namespace

CsvRow parse_row(const std::string& line) {
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (f.size() != 11) throw BadSpec(fmt::format("CSV row has {} fields, expected 11", f.size()));
    CsvRow r;
    r.seed = parse_field<std::uint64_t>(f[0], "seed");
    r.K = parse_field<std::size_t>(f[1], "K");
    r.N = parse_field<std::size_t>(f[2], "N");
    r.T_s = parse_field<double>(f[3], "T_s");
    r.algorithm = f[4];
    r.status = f[5];
    r.total_energy_J = parse_field<double>(f[6], "total_energy_J");
    r.mean_offload_ratio = parse_field<double>(f[7], "mean_offload_ratio");
    r.outer_iterations = parse_field<std::size_t>(f[8], "outer_iterations");
    r.wall_ms = parse_field<double>(f[9], "wall_ms");
    r.violations = f[10];
    return r;
}

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
    os << kCsvHeader << '\n';
    for (const auto& r : rows) os << format_row(r) << '\n';
}

std::vector<CsvRow> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) throw BadSpec("CSV header missing or wrong");
    std::vector<CsvRow> rows;
    while (std::getline(is, line)) {
        if (!line.empty()) rows.push_back(parse_row(line));
    }
    return rows;
}

std::string format_violations(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += ';';
        out += to_string(v.constraint);
        if (v.user != kSystemWide) out += fmt::format("@{}", v.user);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

RunRecord run_algorithm(Algorithm algorithm, const Instance& instance, std::uint64_t seed,
                        const RunOptions& options) {
    RunRecord rec;
    auto& row = rec.row;
    row.seed = seed;
    row.K = instance.config.K;
    row.N = instance.config.N;
    row.T_s = instance.config.T;
    row.algorithm = to_string(algorithm);
    row.total_energy_J = NAN;
    row.mean_offload_ratio = NAN;

    const auto start = std::chrono::steady_clock::now();
    try {
        SolveReport report;
        switch (algorithm) {
            case Algorithm::PA:
                report = solve(instance.tasks, instance.channel, instance.config, options.schedule);
                break;
            case Algorithm::LC: report = solve_lc(instance.tasks, instance.channel, instance.config); break;
            case Algorithm::FR:
                report = solve_fr(instance.tasks, instance.channel, instance.config, options.fr);
                break;
        }
        row.status = report.feasible ? "ok" : "violated";
        row.total_energy_J = report.total_energy;
        row.mean_offload_ratio = report.mean_offload_ratio();
        row.outer_iterations = report.outer_iterations;
        row.violations = format_violations(report.violations);
        rec.report = std::move(report);
    } catch (const Infeasible& e) {
        row.status = "infeasible";
        row.violations = e.user() == kSystemWide ? "deadline" : fmt::format("deadline@{}", e.user());
        rec.message = e.what();
    } catch (const InfeasibleUser& e) {
        row.status = "infeasible";
        row.violations = fmt::format("deadline@{}", e.user());
        rec.message = e.what();
    } catch (const NoFeasiblePrimal& e) {
        row.status = "no_feasible_primal";
        rec.message = e.what();
    } catch (const Error& e) {
        row.status = "error";
        rec.message = e.what();
    }
    if (options.timing) {
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return rec;
}

std::vector<SweepPoint> expand(const SweepSpec& spec) {
    std::vector<SweepPoint> points;
    const std::vector<std::optional<double>> series =
        spec.series_axis ? std::vector<std::optional<double>>(spec.series_values.begin(), spec.series_values.end())
                         : std::vector<std::optional<double>>{std::nullopt};
    for (const auto& s : series) {
        for (double v : spec.values) {
            SweepPoint p;
            p.index = points.size();
            p.axis_value = v;
            p.series_value = s;
            p.scenario = spec.base;
            if (s) apply_axis(p.scenario, *spec.series_axis, *s);
            apply_axis(p.scenario, spec.axis, v);
            validate(p.scenario);
            points.push_back(std::move(p));
        }
    }
    return points;
}

std::uint64_t point_seed(const SweepSpec& spec, std::uint64_t base, std::size_t point, std::size_t repetition) {
    if (spec.seeds == SeedPolicy::common) return base + repetition;
    return base + static_cast<std::uint64_t>(point) * 10007u + repetition;
}

namespace {

// Rows whose energy is meaningful: feasible ones, and baseline rows that only
// miss deadlines (their energy is still well defined).
bool has_energy(const RunRecord& r) { return r.row.status == "ok" || r.row.status == "violated"; }

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, const RunOptions& options) {
    validate(spec);
    const auto algorithms = options.algorithms.value_or(spec.algorithms);
    const auto points = expand(spec);
    const std::uint64_t base = options.seed.value_or(spec.base.rng_seed);
    const std::size_t jobs = points.size() * spec.repetitions;
    const std::size_t per_job = algorithms.size();

    SweepResult result;
    result.records.resize(jobs * per_job);
    parallel_for(jobs, options.threads, [&](std::size_t j) {
        const auto& point = points[j / spec.repetitions];
        const std::size_t rep = j % spec.repetitions;
        ScenarioSpec scenario = point.scenario;
        scenario.rng_seed = point_seed(spec, base, point.index, rep);
        const auto instance = generate(scenario);
        for (std::size_t a = 0; a < per_job; ++a) {
            result.records[j * per_job + a] = run_algorithm(algorithms[a], instance, scenario.rng_seed, options);
        }
    });

    for (const auto& point : points) {
        std::map<std::string, std::vector<const RunRecord*>> by_algo;
        for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
            const std::size_t j = point.index * spec.repetitions + rep;
            for (std::size_t a = 0; a < per_job; ++a) {
                const auto& rec = result.records[j * per_job + a];
                by_algo[rec.row.algorithm].push_back(&rec);
            }
        }
        auto paired_saving = [&](const std::string& other) -> std::optional<double> {
            if (!by_algo.count("PA") || !by_algo.count(other)) return std::nullopt;
            double pa = 0.0, ref = 0.0;
            std::size_t n = 0;
            for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
                const auto* a = by_algo["PA"][rep];
                const auto* b = by_algo[other][rep];
                if (a->row.status != "ok" || !has_energy(*b)) continue;
                pa += a->row.total_energy_J;
                ref += b->row.total_energy_J;
                ++n;
            }
            if (n == 0 || ref <= 0.0) return std::nullopt;
            return 1.0 - pa / ref;
        };
        for (const auto algo : algorithms) {
            const auto name = to_string(algo);
            PointSummary s;
            s.point = point.index;
            s.axis_value = point.axis_value;
            s.series_value = point.series_value;
            s.algorithm = name;
            double e = 0.0, r = 0.0;
            std::size_t used = 0;
            for (const auto* rec : by_algo[name]) {
                ++s.runs;
                if (rec->row.status == "ok") ++s.ok;
                if (!has_energy(*rec)) continue;
                ++used;
                e += rec->row.total_energy_J;
                r += rec->row.mean_offload_ratio;
            }
            s.mean_energy_J = used ? e / static_cast<double>(used) : NAN;
            s.mean_offload_ratio = used ? r / static_cast<double>(used) : NAN;
            if (algo == Algorithm::PA) {
                s.saving_vs_lc = paired_saving("LC");
                s.saving_vs_fr = paired_saving("FR");
            }
            result.summary.push_back(std::move(s));
        }
    }
    return result;
}

std::vector<CsvRow> rows_of(const std::vector<RunRecord>& records) {
    std::vector<CsvRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(r.row);
    return rows;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

}  // namespace

void write_summary_csv(std::ostream& os, const std::vector<PointSummary>& summary) {
    os << "point,series_value,axis_value,algorithm,runs,ok,mean_energy_J,mean_offload_ratio,saving_vs_LC,"
          "saving_vs_FR\n";
    for (const auto& s : summary) {
        os << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", s.point, opt(s.series_value), s.axis_value,
                          s.algorithm, s.runs, s.ok, s.mean_energy_J, s.mean_offload_ratio, opt(s.saving_vs_lc),
                          opt(s.saving_vs_fr));
    }
}

void print_summary(std::ostream& os, const SweepSpec& spec, const std::vector<PointSummary>& summary) {
    const auto series = spec.series_axis ? to_string(*spec.series_axis) : std::string();
    for (const auto& s : summary) {
        std::string where = fmt::format("{}={}", to_string(spec.axis), s.axis_value);
        if (s.series_value) where = fmt::format("{}={} ", series, *s.series_value) + where;
        os << fmt::format("{:<28} {:<3} ok {}/{}  E={:.6g} J  ratio={:.4f}", where, s.algorithm, s.ok, s.runs,
                          s.mean_energy_J, s.mean_offload_ratio);
        if (s.saving_vs_lc) os << fmt::format("  vsLC={:.1f}%", 100.0 * *s.saving_vs_lc);
        if (s.saving_vs_fr) os << fmt::format("  vsFR={:.1f}%", 100.0 * *s.saving_vs_fr);
        os << '\n';
    }
}

double recompute_energy(const ScenarioSpec& scenario, const SolveReport& report) {
    const auto instance = generate(scenario);
    return evaluate(instance.tasks, instance.channel, report.allocation, instance.config).total_energy;
}

}  // namespace mecopt
