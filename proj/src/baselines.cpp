#include "mecopt/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "mecopt/parallel.hpp"

namespace mecopt {

SolveReport solve_lc(std::span<const UserTask> tasks, const ChannelState& channel,
                     const SystemConfig& config) {
    auto report = evaluate(tasks, channel, Allocation::all_local(tasks.size(), channel.subcarriers()), config);
    report.algorithm = "LC";
    return report;
}

SolveReport solve_lc(std::span<const UserTask> tasks, const SystemConfig& config) {
    ChannelState none;
    none.gains = Matrix(tasks.size(), config.N);
    none.noise_power = 1.0;
    none.bandwidth = 1.0;
    return solve_lc(tasks, none, config);
}

SolveReport solve_fr(std::span<const UserTask> tasks, const ChannelState& channel,
                     const SystemConfig& config, const FrPolicy& policy) {
    const auto K = tasks.size();
    Allocation alloc;
    alloc.x = Assignment::round_robin(K, channel.subcarriers());
    const auto rates = uplink_rates(tasks, channel, alloc.x);
    alloc.phi = rates;
    alloc.lambda.assign(K, 0.0);
    alloc.f_edge.assign(K, 0.0);
    const double even_share = K > 0 ? config.F / static_cast<double>(K) : 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double deadline = effective_deadline(tasks[k], config);
        const auto b = lambda_bounds(tasks[k], rates[k], even_share, deadline);
        if (b.lower - b.upper > kLambdaSlack) {
            throw InfeasibleUser(static_cast<std::ptrdiff_t>(k), b.lower, b.upper);
        }
        alloc.lambda[k] = std::clamp(policy.target, b.lower, std::max(b.lower, b.upper));
        alloc.f_edge[k] = min_edge_share(tasks[k], alloc.lambda[k], rates[k], deadline);
    }
    auto report = evaluate(tasks, channel, alloc, config);
    report.algorithm = "FR";
    std::ostringstream notes;
    notes << "FR: target ratio " << policy.target
          << " clamped into each user's deadline range at an even F/K share; round-robin subcarriers; "
             "each user gets the edge share its deadline needs";
    report.notes = notes.str();
    return report;
}

namespace {

// Best ratio of one user for every edge-share grid index under fixed rate.
struct UserTable {
    std::vector<double> energy;  // +inf where no ratio meets the deadline
    std::vector<std::size_t> lambda_index;
};

UserTable user_table(const UserTask& task, double rate, bool has_subcarriers, const SystemConfig& config,
                     const OracleGrids& grids) {
    const double deadline = effective_deadline(task, config);
    const double power = has_subcarriers ? task.p_max : 0.0;
    const double ld = static_cast<double>(grids.lambda_divisions);
    const double fd = static_cast<double>(grids.f_divisions);
    UserTable t;
    t.energy.assign(grids.f_divisions + 1, kInf);
    t.lambda_index.assign(grids.f_divisions + 1, 0);
    for (std::size_t j = 0; j <= grids.f_divisions; ++j) {
        const double f = config.F * static_cast<double>(j) / fd;
        for (std::size_t i = 0; i <= grids.lambda_divisions; ++i) {
            const double lambda = static_cast<double>(i) / ld;
            if (local_latency(task, lambda) > deadline + kLatencyTolerance) continue;
            double e = local_energy(task, lambda);
            if (lambda > 0.0) {
                if (rate <= 0.0 || f <= 0.0) continue;
                if (offload_latency(task, lambda, rate, f) > deadline + kLatencyTolerance) continue;
                e += offload_energy(task, lambda, rate, f, config.kappa_edge, power).total();
            }
            if (e < t.energy[j]) {
                t.energy[j] = e;
                t.lambda_index[j] = i;
            }
        }
    }
    return t;
}

struct Candidate {
    double energy = kInf;
    std::vector<std::size_t> f_index;
    std::vector<std::size_t> lambda_index;
};

// Minimises sum_k table[k].energy[j_k] over sum_k j_k <= budget, first
// index tuple in lexicographic order on ties.
void combine(std::span<const UserTable> tables, std::size_t k, std::size_t budget, double partial,
             std::vector<std::size_t>& js, Candidate& best) {
    if (k == tables.size()) {
        if (partial < best.energy) {
            best.energy = partial;
            best.f_index = js;
        }
        return;
    }
    for (std::size_t j = 0; j <= budget; ++j) {
        const double e = tables[k].energy[j];
        if (!std::isfinite(e)) continue;
        js[k] = j;
        combine(tables, k + 1, budget - j, partial + e, js, best);
    }
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

OracleResult solve_oracle(std::span<const UserTask> tasks, const ChannelState& channel,
                          const SystemConfig& config, const OracleGrids& grids, std::size_t threads) {
    const auto K = tasks.size();
    const auto N = channel.subcarriers();
    if (K > kOracleMaxUsers || N > kOracleMaxSubcarriers) {
        std::ostringstream os;
        os << "oracle enumerates at most " << kOracleMaxUsers << " users and " << kOracleMaxSubcarriers
           << " subcarriers, got K=" << K << " N=" << N;
        throw TooLarge(os.str());
    }
    if (grids.lambda_divisions < 50 || grids.f_divisions < 50) {
        throw TooLarge("oracle grids must be at least 50 divisions (step <= 0.02 and <= F/50)");
    }
    if (channel.users() != K) throw ShapeMismatch("channel rows do not match the number of users");

    std::size_t assignments = 1;
    for (std::size_t n = 0; n < N; ++n) assignments *= K + 1;

    OracleResult result;
    result.grid_resolution = {1.0 / static_cast<double>(grids.lambda_divisions),
                              config.F / static_cast<double>(grids.f_divisions)};
    result.assignments = assignments;
    std::uint64_t lambda_tuples = 1;
    for (std::size_t k = 0; k < K; ++k) lambda_tuples *= grids.lambda_divisions + 1;
    result.instances_enumerated = assignments * lambda_tuples * binomial(grids.f_divisions + K, K);

    // Assignment a is read as N base-(K+1) digits, subcarrier 0 most
    // significant; digit 0 means unassigned, digit k+1 means user k.
    auto decode = [&](std::size_t a) {
        std::vector<std::ptrdiff_t> owners(N);
        for (std::size_t n = N; n-- > 0;) {
            owners[n] = static_cast<std::ptrdiff_t>(a % (K + 1)) - 1;
            a /= K + 1;
        }
        return Assignment::from_owners(K, owners);
    };

    std::vector<Candidate> per_assignment(assignments);
    parallel_for(assignments, threads, [&](std::size_t a) {
        const Assignment x = decode(a);
        const auto rates = uplink_rates(tasks, channel, x);
        std::vector<UserTable> tables(K);
        for (std::size_t k = 0; k < K; ++k) {
            tables[k] = user_table(tasks[k], rates[k], x.count(k) > 0, config, grids);
        }
        Candidate best;
        std::vector<std::size_t> js(K, 0);
        combine(tables, 0, grids.f_divisions, 0.0, js, best);
        if (std::isfinite(best.energy)) {
            best.lambda_index.resize(K);
            for (std::size_t k = 0; k < K; ++k) best.lambda_index[k] = tables[k].lambda_index[best.f_index[k]];
        }
        per_assignment[a] = std::move(best);
    });

    std::size_t winner = assignments;
    for (std::size_t a = 0; a < assignments; ++a) {
        if (per_assignment[a].energy < (winner == assignments ? kInf : per_assignment[winner].energy)) winner = a;
    }
    if (winner == assignments) {
        result.diagnosis = "no grid point meets every deadline within the edge capacity";
        return result;
    }

    const auto& c = per_assignment[winner];
    Allocation alloc;
    alloc.x = decode(winner);
    alloc.lambda.resize(K);
    alloc.f_edge.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        alloc.lambda[k] = static_cast<double>(c.lambda_index[k]) / static_cast<double>(grids.lambda_divisions);
        alloc.f_edge[k] = config.F * static_cast<double>(c.f_index[k]) / static_cast<double>(grids.f_divisions);
    }
    alloc.phi = uplink_rates(tasks, channel, alloc.x);
    auto report = evaluate(tasks, channel, alloc, config);
    if (!report.feasible) {
        // Grid points were screened with the same tolerances, so this is a bug.
        throw Error("oracle optimum failed the feasibility check");
    }
    result.found = true;
    result.best_energy = report.total_energy;
    result.best_allocation = std::move(alloc);
    return result;
}

double grid_gap(std::span<const UserTask> tasks, const ChannelState& channel, const SystemConfig& config,
                const Allocation& alloc, const OracleGrids& grids) {
    const auto K = tasks.size();
    const double base = evaluate(tasks, channel, alloc, config).total_energy;
    const double ld = static_cast<double>(grids.lambda_divisions);
    const double f_step = config.F / static_cast<double>(grids.f_divisions);

    // Two neighbours per coordinate; 2K coordinates.
    std::vector<std::array<double, 2>> lambda_n(K), f_n(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double l = std::clamp(alloc.lambda[k], 0.0, 1.0);
        lambda_n[k] = {std::floor(l * ld) / ld, std::ceil(l * ld) / ld};
        const double f = std::clamp(alloc.f_edge[k], 0.0, config.F);
        f_n[k] = {std::floor(f / f_step) * f_step, std::ceil(f / f_step) * f_step};
    }
    double gap = 0.0;
    Allocation probe = alloc;
    const std::size_t combos = std::size_t{1} << (2 * K);
    for (std::size_t mask = 0; mask < combos; ++mask) {
        for (std::size_t k = 0; k < K; ++k) {
            probe.lambda[k] = lambda_n[k][(mask >> (2 * k)) & 1];
            probe.f_edge[k] = f_n[k][(mask >> (2 * k + 1)) & 1];
        }
        const auto r = evaluate(tasks, channel, probe, config);
        const bool defined = std::all_of(r.per_user.begin(), r.per_user.end(),
                                         [](const UserBreakdown& u) { return std::isfinite(u.t_offload); });
        if (defined) gap = std::max(gap, std::abs(r.total_energy - base));
    }
    return gap;
}

}  // namespace mecopt
