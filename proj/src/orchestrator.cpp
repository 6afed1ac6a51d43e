#include "mecopt/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mecopt {

Infeasible::Infeasible(std::ptrdiff_t user, const std::string& what) : Error(what), user_(user) {}

namespace {

// One user's deadline-tight curve for a fixed uplink rate.
struct TightCurve {
    double cycles = 0.0;
    double bits = 0.0;
    double deadline = 0.0;
    double rate = 0.0;
    double local_cost = 0.0;   // local energy at lambda = 0
    double uplink_cost = 0.0;  // p_max R / r, uplink energy per unit lambda
    double kappa_edge = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    double share(double lambda) const { return lambda * cycles / (deadline - lambda * bits / rate); }

    // d/dlambda of energy + gamma * share along the curve
    double slope(double lambda, double gamma) const {
        const double remaining = deadline - lambda * bits / rate;
        const double f = lambda * cycles / remaining;
        const double df = cycles * deadline / (remaining * remaining);
        return -local_cost + uplink_cost + kappa_edge * cycles * (f * f + 2.0 * lambda * f * df) + gamma * df;
    }

    double best_lambda(double gamma) const {
        if (hi <= lo || slope(lo, gamma) >= 0.0) return lo;
        if (slope(hi, gamma) <= 0.0) return hi;
        double a = lo, b = hi;
        for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
            const double m = 0.5 * (a + b);
            if (slope(m, gamma) > 0.0) {
                b = m;
            } else {
                a = m;
            }
        }
        return a;  // stays on the low side so the share never overshoots
    }
};

struct Split {
    std::vector<double> lambda;
    std::vector<double> f_edge;
    double total = 0.0;
};

Split split_at(std::span<const TightCurve> curves, std::span<const char> fixed_local, double gamma) {
    Split s;
    s.lambda.assign(curves.size(), 0.0);
    s.f_edge.assign(curves.size(), 0.0);
    for (std::size_t k = 0; k < curves.size(); ++k) {
        if (fixed_local[k]) continue;
        s.lambda[k] = curves[k].best_lambda(gamma);
        s.f_edge[k] = curves[k].share(s.lambda[k]);
        s.total += s.f_edge[k];
    }
    return s;
}

}  // namespace

CapacitySplit rebalance_capacity(std::span<const UserTask> tasks, const ChannelState& channel,
                                 const SystemConfig& config, const Assignment& x) {
    const auto K = tasks.size();
    const auto rates = uplink_rates(tasks, channel, x);
    std::vector<TightCurve> curves(K);
    std::vector<char> local_only(K, 0);
    double minimum_total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const auto& task = tasks[k];
        auto& c = curves[k];
        c.cycles = task.cycles();
        c.bits = task.R;
        c.deadline = effective_deadline(task, config);
        c.rate = rates[k];
        c.kappa_edge = config.kappa_edge;
        c.local_cost = task.kappa_local * c.cycles * task.f_local * task.f_local;
        c.lo = std::max(1.0 - c.deadline * task.f_local / c.cycles, 0.0);
        const auto user = static_cast<std::ptrdiff_t>(k);
        if (c.rate <= 0.0) {
            if (c.lo > 0.0) {
                throw Infeasible(user, "user " + std::to_string(k) + " needs to offload but holds no subcarrier");
            }
            local_only[k] = 1;
            continue;
        }
        c.uplink_cost = task.p_max * c.bits / c.rate;
        c.hi = std::min(1.0, c.deadline * c.rate * config.F / (c.bits * config.F + c.rate * c.cycles));
        if (c.lo > c.hi + kLambdaSlack) {
            throw Infeasible(user, "user " + std::to_string(k) +
                                       " cannot meet its deadline even with the whole edge server");
        }
        c.hi = std::max(c.hi, c.lo);
        minimum_total += c.share(c.lo);
    }
    if (minimum_total > config.F) {
        throw Infeasible(kSystemWide, "minimum edge shares of all users exceed the server capacity");
    }
    CapacitySplit out;
    Split s = split_at(curves, local_only, 0.0);
    if (s.total > config.F) {
        double g_lo = 0.0;
        double g_hi = 1e-30;
        Split hi_split = split_at(curves, local_only, g_hi);
        for (int i = 0; i < 400 && hi_split.total > config.F; ++i) {
            g_lo = g_hi;
            g_hi *= 4.0;
            hi_split = split_at(curves, local_only, g_hi);
        }
        for (int i = 0; i < 200; ++i) {
            const double mid = g_lo > 0.0 ? std::sqrt(g_lo * g_hi) : 0.5 * g_hi;
            if (mid <= g_lo || mid >= g_hi) break;
            Split m = split_at(curves, local_only, mid);
            if (m.total > config.F) {
                g_lo = mid;
            } else {
                g_hi = mid;
                hi_split = std::move(m);
            }
            if ((g_hi - g_lo) <= 1e-12 * g_hi) break;
        }
        s = std::move(hi_split);
        out.gamma = g_hi;
    }
    out.lambda = std::move(s.lambda);
    out.f_edge = std::move(s.f_edge);
    return out;
}

namespace {

double mean_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SolveReport solve(std::span<const UserTask> tasks, const ChannelState& channel,
                  const SystemConfig& config, const SolveSchedule& schedule) {
    const auto K = tasks.size();
    const auto N = channel.subcarriers();

    Allocation alloc;
    alloc.x = Assignment::round_robin(K, N);
    alloc.f_edge.assign(K, K > 0 ? config.F / static_cast<double>(K) : 0.0);
    alloc.phi = uplink_rates(tasks, channel, alloc.x);
    alloc.lambda.assign(K, 0.0);

    auto lambda_step = [&]() {
        try {
            return solve_offloading(tasks, channel, alloc, config);
        } catch (const InfeasibleUser&) {
            // Retry once with the capacity re-split for the current subcarriers.
            alloc.f_edge = rebalance_capacity(tasks, channel, config, alloc.x).f_edge;
            try {
                return solve_offloading(tasks, channel, alloc, config);
            } catch (const InfeasibleUser& again) {
                throw Infeasible(again.user(), again.what());
            }
        }
    };

    SolveReport best;
    best.total_energy = kInf;
    bool have_best = false;
    std::vector<TracePoint> trace;
    double previous = kInf;
    std::size_t z = 0;
    while (z < schedule.z_max) {
        ++z;
        alloc.lambda = lambda_step();
        alloc.phi = uplink_rates(tasks, channel, alloc.x);

        PsResult ps = solve_ps(alloc.lambda, tasks, channel, config, alloc, schedule.ps);
        SolveReport current = evaluate(tasks, channel, ps.allocation, config);
        if (current.feasible && current.total_energy < best.total_energy) {
            best = current;
            have_best = true;
        }

        TracePoint tp;
        tp.iteration = z;
        tp.objective = current.total_energy;
        tp.best_objective = best.total_energy;
        tp.gamma = ps.duals.gamma;
        tp.mean_alpha = mean_of(ps.duals.alpha);
        tp.mean_beta = mean_of(ps.duals.beta);
        tp.dual_iterations = ps.dual_iterations;
        trace.push_back(tp);

        const double energy = current.total_energy;
        const bool converged =
            std::abs(previous - energy) <= schedule.precision * std::max(std::abs(energy), 1e-300);
        previous = energy;
        if (converged) break;

        alloc = std::move(ps.allocation);
        alloc.f_edge = rebalance_capacity(tasks, channel, config, alloc.x).f_edge;
    }

    if (!have_best) {
        if (K == 0) {
            best = evaluate(tasks, channel, Allocation::all_local(0, N), config);
        } else {
            throw NoFeasiblePrimal("no outer iterate passed the feasibility check");
        }
    }
    best.algorithm = "PA";
    best.trace = std::move(trace);
    best.outer_iterations = z;
    return best;
}

}  // namespace mecopt
