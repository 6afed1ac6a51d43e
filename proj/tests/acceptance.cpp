// Acceptance run: one PASS/FAIL line per criterion.
#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "mecopt/baselines.hpp"
#include "mecopt/experiment.hpp"
#include "mecopt/orchestrator.hpp"

using namespace mecopt;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

UserTask random_task(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> R(1000, 1500), c(1000, 1200), f(0.6e9, 0.7e9);
    return {R(rng), c(rng), 2e-3, f(rng), dbm_to_watts(27.8), 1e-24};
}

double user_energy(const UserTask& t, double lambda, double rate, double f_edge, double kappa_edge) {
    return t.kappa_local * t.c * (1 - lambda) * t.R * t.f_local * t.f_local + t.p_max * lambda * t.R / rate +
           kappa_edge * lambda * t.c * t.R * f_edge * f_edge;
}

// Closed-form ratio against a 1e-4 grid (bounds included) on feasible draws.
Verdict closed_form() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t feasible = 0, bad = 0;
    double worst = 0.0;
    while (feasible < 500) {
        const auto t = random_task(rng);
        const double rate = std::pow(10.0, 5 + 3 * u(rng));
        const double f = std::pow(10.0, 8 + 2 * u(rng));
        const double kappa = std::pow(10.0, -27 + 3 * u(rng));
        const double T = t.deadline;
        const double lower = std::max(1.0 - T * t.f_local / (t.c * t.R), 0.0);
        const double upper = std::min(T * rate * f / (t.R * f + rate * t.R * t.c), 1.0);
        if (lower > upper) continue;
        ++feasible;
        double best = user_energy(t, lower, rate, f, kappa);
        for (double l = std::ceil(lower * 1e4) / 1e4; l < upper; l += 1e-4)
            best = std::min(best, user_energy(t, l, rate, f, kappa));
        best = std::min(best, user_energy(t, upper, rate, f, kappa));
        const double got = user_energy(t, solve_lambda(t, rate, f, kappa, T), rate, f, kappa);
        const double err = rel(got, best);
        worst = std::max(worst, err);
        if (err > 1e-6) ++bad;
    }
    return {bad == 0, fmt::format("{} instances, worst relative energy gap {:.2e}", feasible, worst)};
}

Verdict bisection() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double epsilon = 1e-10;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        auto t = random_task(rng);
        const double alpha = std::pow(10.0, -9 + 6 * u(rng));
        const double kappa = std::pow(10.0, -27 + 2 * u(rng));
        const double lambda = 0.01 + 0.99 * u(rng);
        const SystemConfig cfg{1e10, kappa, 2e-3, 1, 1};
        const double f = bisect_f(t, lambda, alpha, 0.0, cfg, epsilon);
        worst = std::max(worst, rel(f, std::cbrt(alpha / (2 * kappa))));
    }
    return {worst <= 1e-6, fmt::format("100 draws, bisection tolerance {:g}, worst relative error {:.2e}", epsilon, worst)};
}

Verdict auxiliary_rate() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t n = 0;
    double worst = -kInf;
    while (n < 200) {
        const auto t = random_task(rng);
        const double lambda = 0.05 + 0.95 * u(rng);
        const double f = 1e8 + 5e9 * u(rng);
        const double alpha = std::pow(10.0, -8 + 5 * u(rng));
        const double beta = std::pow(10.0, -10 + 5 * u(rng));
        const double cap = std::pow(10.0, 5 + 3 * u(rng));
        const double T = t.deadline;
        const double floor = lambda * t.R * f / (T * f - lambda * t.R * t.c);
        if (!(floor > 0.0) || floor > cap) continue;
        ++n;
        const auto choice = solve_phi(t, lambda, f, alpha, beta, t.p_max, cap, T);
        const double at = (alpha + t.p_max) * lambda * t.R / choice.phi + beta * choice.phi;
        double best = kInf;
        for (int j = 0; j < 1000; ++j) {
            const double phi = floor + (cap - floor) * j / 999.0;
            best = std::min(best, (alpha + t.p_max) * lambda * t.R / phi + beta * phi);
        }
        worst = std::max(worst, (at - best) / best);
    }
    return {worst <= 1e-9, fmt::format("200 draws, worst excess over the grid minimum {:.2e}", worst)};
}

Verdict decomposition() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::exponential_distribution<double> fade(1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t K = 4, N = 16;
        std::vector<UserTask> tasks;
        ChannelState ch{Matrix(K, N), 1e-13, 12.5e3};
        for (std::size_t k = 0; k < K; ++k) {
            tasks.push_back(random_task(rng));
            const double d = 1 + 29 * u(rng);
            for (std::size_t n = 0; n < N; ++n) ch.gains(k, n) = fade(rng) / (d * d);
        }
        const SystemConfig cfg{1e10, 1e-26, 2e-3, N, K};
        std::vector<std::ptrdiff_t> owners(N);
        for (auto& o : owners) o = static_cast<std::ptrdiff_t>(u(rng) * (K + 1)) - 1;
        Allocation a;
        a.x = Assignment::from_owners(K, owners);
        const auto counts = a.x.counts();
        auto duals = DualState::uniform(K, 0, 0, 0, 1, 1, 1);
        for (std::size_t k = 0; k < K; ++k) {
            a.lambda.push_back(counts[k] > 0 ? u(rng) : 0.0);
            a.f_edge.push_back(1e8 + 3e9 * u(rng));
            a.phi.push_back(1e5 + 1e8 * u(rng));
            duals.alpha[k] = 1e-3 * u(rng);
            duals.beta[k] = 1e-7 * u(rng);
        }
        duals.gamma = 1e-10 * u(rng);
        worst = std::max(worst, rel(lagrangian(a, duals, tasks, ch, cfg), lagrangian_decomposed(a, duals, tasks, ch, cfg)));
    }
    return {worst <= 1e-9, fmt::format("100 states, worst relative difference {:.2e}", worst)};
}

Verdict oracle_gate(std::size_t threads) {
    std::size_t compared = 0, skipped = 0, below = 0, above = 0, pa_failed = 0;
    double worst_ratio = 0.0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        ScenarioSpec s;
        s.K = 2;
        s.N = 3;
        s.T = 4e-3;
        s.rng_seed = seed;
        const auto inst = generate(s);
        const auto oracle = solve_oracle(inst.tasks, inst.channel, inst.config, {}, threads);
        if (!oracle.found) {
            ++skipped;
            continue;
        }
        SolveReport pa;
        try {
            pa = solve(inst.tasks, inst.channel, inst.config);
        } catch (const Error&) {
            ++pa_failed;
            continue;
        }
        if (!pa.feasible) {
            ++pa_failed;
            continue;
        }
        ++compared;
        const double gap = grid_gap(inst.tasks, inst.channel, inst.config, pa.allocation);
        if (pa.total_energy < oracle.best_energy - gap - 1e-12) ++below;
        if (pa.total_energy > 1.25 * oracle.best_energy) ++above;
        worst_ratio = std::max(worst_ratio, pa.total_energy / oracle.best_energy);
    }
    return {below == 0 && above == 0 && pa_failed == 0 && compared > 0,
            fmt::format("{} compared, {} without a feasible grid point, {} PA failures, {} below the grid gap, "
                        "{} above 1.25x; worst PA/oracle {:.4f}",
                        compared, skipped, pa_failed, below, above, worst_ratio)};
}

struct SweepRun {
    SweepSpec spec;
    SweepResult result;
    std::string csv;
    double seconds = 0.0;
};

SweepRun run(const std::filesystem::path& file, std::size_t threads) {
    SweepRun r;
    r.spec = load_sweep(file);
    RunOptions options;
    options.schedule = parse_schedule(file);
    options.threads = threads;
    const auto start = std::chrono::steady_clock::now();
    r.result = run_sweep(r.spec, options);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream os;
    write_csv(os, rows_of(r.result.records));
    r.csv = os.str();
    return r;
}

std::vector<const PointSummary*> pa_points(const SweepRun& r, std::optional<double> series = std::nullopt) {
    std::vector<const PointSummary*> out;
    for (const auto& p : r.result.summary) {
        if (p.algorithm == "PA" && (!series || p.series_value == series)) out.push_back(&p);
    }
    return out;
}

std::string pct(const std::optional<double>& v) { return v ? fmt::format("{:.1f}%", 100 * *v) : "n/a"; }

Verdict fig1(const SweepRun& r) {
    const auto points = pa_points(r);
    bool bands = true, energy = true, ratio = true;
    std::string detail;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto* p = points[i];
        const bool lc_ok = p->saving_vs_lc && *p->saving_vs_lc >= 0.30 && *p->saving_vs_lc <= 0.80;
        const bool fr_ok = p->saving_vs_fr && *p->saving_vs_fr >= 0.10 && *p->saving_vs_fr <= 0.60;
        bands = bands && lc_ok && fr_ok;
        if (i > 0) {
            energy = energy && p->mean_energy_J >= points[i - 1]->mean_energy_J;
            ratio = ratio && p->mean_offload_ratio <= points[i - 1]->mean_offload_ratio;
        }
        detail += fmt::format("{}K={:g}: E={:.4g} J ratio={:.3f} vs LC {}{} vs FR {}{}", i ? "; " : "", p->axis_value,
                              p->mean_energy_J, p->mean_offload_ratio, pct(p->saving_vs_lc), lc_ok ? "" : "*",
                              pct(p->saving_vs_fr), fr_ok ? "" : "*");
    }
    const bool time_ok = r.seconds < 600;
    detail += fmt::format(" | savings bands {}, energy non-decreasing {}, ratio non-increasing {}, {:.0f} s",
                          bands ? "met" : "missed", energy ? "yes" : "no", ratio ? "yes" : "no", r.seconds);
    return {bands && energy && ratio && time_ok, detail};
}

Verdict fig2(const SweepRun& r) {
    const auto points = pa_points(r);
    bool energy = true, ratio = true;
    std::string detail;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto* p = points[i];
        if (i > 0) {
            energy = energy && p->mean_energy_J <= points[i - 1]->mean_energy_J;
            ratio = ratio && p->mean_offload_ratio >= points[i - 1]->mean_offload_ratio;
        }
        detail += fmt::format("{}T={:g} ms: E={:.4g} J ratio={:.3f}", i ? "; " : "", 1e3 * p->axis_value,
                              p->mean_energy_J, p->mean_offload_ratio);
    }
    const bool time_ok = r.seconds < 300;
    detail += fmt::format(" | {:.0f} s", r.seconds);
    return {energy && ratio && time_ok, detail};
}

Verdict fig3(const SweepRun& r) {
    bool energy = true;
    std::string detail;
    for (double k : r.spec.series_values) {
        const auto points = pa_points(r, k);
        detail += fmt::format("{}K={:g}:", detail.empty() ? "" : "; ", k);
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (i > 0) energy = energy && points[i]->mean_energy_J <= points[i - 1]->mean_energy_J;
            detail += fmt::format(" {:.4g}", points[i]->mean_energy_J);
        }
    }
    const bool time_ok = r.seconds < 600;
    detail += fmt::format(" J over N={} | {:.0f} s", fmt::format("{}", r.spec.values.front()) + ".." +
                                                         fmt::format("{}", r.spec.values.back()),
                          r.seconds);
    return {energy && time_ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::filesystem::path configs = "configs";
    std::filesystem::path csv_dir;
    std::set<int> only;
    std::size_t threads = 0;
    app.add_option("configs", configs, "Directory holding the sweep configurations")->check(CLI::ExistingDirectory);
    app.add_option("--csv-dir", csv_dir, "Write the sweep CSVs here");
    app.add_option("--only", only, "Run only these criteria");
    app.add_option("--threads", threads, "Worker threads (0 = all cores)");
    CLI11_PARSE(app, argc, argv);

    bool all = true;
    auto report = [&](int id, const std::string& name, const std::function<Verdict()>& check) {
        if (!only.empty() && !only.count(id)) return;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && v.pass;
        fmt::print("{} criterion {}: {} ({}) [{:.2f} s]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail, s);
        std::fflush(stdout);
    };
    auto timed = [](double budget, const std::function<Verdict()>& check) {
        return [=] {
            const auto start = std::chrono::steady_clock::now();
            auto v = check();
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (s >= budget) {
                v.pass = false;
                v.detail += fmt::format("; over the {:g} s budget", budget);
            }
            return v;
        };
    };

    report(1, "closed-form offloading ratio vs grid", timed(5, closed_form));
    report(2, "edge-share bisection vs cube root", timed(1, bisection));
    report(3, "auxiliary rate vs grid", timed(2, auxiliary_rate));
    report(4, "Lagrangian regrouping identity", decomposition);
    report(5, "exhaustive oracle gate", timed(120, [&] { return oracle_gate(threads); }));

    std::map<int, SweepRun> sweeps;
    const std::map<int, std::string> files{{6, "fig1_users.yaml"}, {7, "fig2_deadline.yaml"}, {8, "fig3_subcarriers.yaml"}};
    auto sweep = [&](int id) -> const SweepRun& {
        if (!sweeps.count(id)) {
            sweeps[id] = run(configs / files.at(id), threads);
            if (!csv_dir.empty()) {
                std::filesystem::create_directories(csv_dir);
                std::ofstream(csv_dir / (std::filesystem::path(files.at(id)).stem().string() + ".csv")) << sweeps[id].csv;
            }
        }
        return sweeps[id];
    };
    report(6, "energy and savings versus users", [&] { return fig1(sweep(6)); });
    report(7, "energy and ratio versus deadline", [&] { return fig2(sweep(7)); });
    report(8, "energy versus subcarriers", [&] { return fig3(sweep(8)); });
    report(9, "byte-identical sweep CSVs on rerun", [&]() -> Verdict {
        std::string detail;
        bool same = true;
        for (int id : {6, 7, 8}) {
            if (!only.empty() && !only.count(id)) continue;
            const auto again = run(configs / files.at(id), threads);
            const bool eq = again.csv == sweep(id).csv;
            same = same && eq;
            detail += fmt::format("{}{}: {} bytes {}", detail.empty() ? "" : "; ", files.at(id), again.csv.size(),
                                  eq ? "identical" : "DIFFER");
        }
        return {same && !detail.empty(), detail.empty() ? "no sweeps selected" : detail};
    });
    return all ? 0 : 1;
}
