#include "mecopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mecopt {

Assignment Assignment::from_owners(std::size_t users, std::span<const std::ptrdiff_t> owners) {
    Assignment x(users, owners.size());
    for (std::size_t n = 0; n < owners.size(); ++n) {
        if (owners[n] == kUnassigned) continue;
        if (owners[n] < 0 || static_cast<std::size_t>(owners[n]) >= users) {
            throw ShapeMismatch("subcarrier owner out of range");
        }
        x.set(static_cast<std::size_t>(owners[n]), n, 1);
    }
    return x;
}

Assignment Assignment::round_robin(std::size_t users, std::size_t subcarriers) {
    Assignment x(users, subcarriers);
    if (users == 0) return x;
    for (std::size_t n = 0; n < subcarriers; ++n) x.set(n % users, n, 1);
    return x;
}

std::size_t Assignment::count(std::size_t k) const {
    std::size_t total = 0;
    for (auto v : row(k)) total += v != 0;
    return total;
}

std::vector<std::size_t> Assignment::counts() const {
    std::vector<std::size_t> out(users_);
    for (std::size_t k = 0; k < users_; ++k) out[k] = count(k);
    return out;
}

std::ptrdiff_t Assignment::owner(std::size_t n) const {
    for (std::size_t k = 0; k < users_; ++k) {
        if (get(k, n) != 0) return static_cast<std::ptrdiff_t>(k);
    }
    return kUnassigned;
}

Allocation Allocation::all_local(std::size_t users, std::size_t subcarriers) {
    Allocation a;
    a.lambda.assign(users, 0.0);
    a.f_edge.assign(users, 0.0);
    a.x = Assignment(users, subcarriers);
    a.phi.assign(users, 0.0);
    return a;
}

double Allocation::mean_offload_ratio() const {
    if (lambda.empty()) return 0.0;
    return std::accumulate(lambda.begin(), lambda.end(), 0.0) / static_cast<double>(lambda.size());
}

std::string to_string(Constraint c) {
    switch (c) {
        case Constraint::OffloadRatio: return "offload_ratio";
        case Constraint::Deadline: return "deadline";
        case Constraint::EdgeShareNonNegative: return "edge_share_nonnegative";
        case Constraint::EdgeCapacity: return "edge_capacity";
        case Constraint::SubcarrierExclusive: return "subcarrier_exclusive";
        case Constraint::SubcarrierBinary: return "subcarrier_binary";
        case Constraint::AuxRateBound: return "aux_rate_bound";
    }
    return "unknown";
}

double local_latency(const UserTask& task, double lambda) {
    return task.c * (1.0 - lambda) * task.R / task.f_local;
}

double subcarrier_power(const UserTask& task, std::size_t assigned) {
    return assigned == 0 ? 0.0 : task.p_max / static_cast<double>(assigned);
}

double uplink_rate(const UserTask& task, const ChannelState& channel, std::size_t k,
                   std::span<const std::uint8_t> x_row) {
    std::size_t assigned = 0;
    for (auto v : x_row) assigned += v != 0;
    if (assigned == 0) return 0.0;
    const double p = subcarrier_power(task, assigned);
    double spectral = 0.0;
    for (std::size_t n = 0; n < x_row.size(); ++n) {
        if (x_row[n] != 0) spectral += std::log2(1.0 + p * channel.normalized_gain(k, n));
    }
    return channel.bandwidth * spectral;
}

double offload_latency(const UserTask& task, double lambda, double rate, double f_edge) {
    if (lambda <= 0.0) return 0.0;
    if (rate <= 0.0 || f_edge <= 0.0) {
        throw DivisionByZeroOffload("offloaded work needs a positive uplink rate and edge share");
    }
    const double bits = lambda * task.R;
    return bits / rate + bits * task.c / f_edge;
}

double total_latency(double t_local, double t_offload) { return std::max(t_local, t_offload); }

double local_energy(const UserTask& task, double lambda) {
    return task.kappa_local * task.c * (1.0 - lambda) * task.R * task.f_local * task.f_local;
}

OffloadEnergy offload_energy(const UserTask& task, double lambda, double rate, double f_edge,
                             double kappa_edge, double transmit_power) {
    if (lambda <= 0.0) return {};
    if (rate <= 0.0 || f_edge <= 0.0) {
        throw DivisionByZeroOffload("offloaded work needs a positive uplink rate and edge share");
    }
    const double bits = lambda * task.R;
    return {transmit_power * bits / rate, kappa_edge * bits * task.c * f_edge * f_edge};
}

double effective_deadline(const UserTask& task, const SystemConfig& config) {
    return task.deadline > 0.0 ? std::min(task.deadline, config.T) : config.T;
}

std::vector<double> uplink_rates(std::span<const UserTask> tasks, const ChannelState& channel,
                                 const Assignment& x) {
    std::vector<double> rates(tasks.size());
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        rates[k] = uplink_rate(tasks[k], channel, k, x.row(k));
    }
    return rates;
}

double min_edge_share(const UserTask& task, double lambda, double rate, double deadline) {
    if (lambda <= 0.0) return 0.0;
    if (rate <= 0.0) return kInf;
    const double remaining = deadline - lambda * task.R / rate;
    if (remaining <= 0.0) return kInf;
    return lambda * task.cycles() / remaining;
}

void check_shapes(std::span<const UserTask> tasks, const ChannelState& channel,
                  const Allocation& alloc, const SystemConfig& config) {
    const auto K = tasks.size();
    if (config.K != K || channel.users() != K || alloc.lambda.size() != K ||
        alloc.f_edge.size() != K || alloc.phi.size() != K || alloc.x.users() != K) {
        throw ShapeMismatch("user count differs across tasks, channel, allocation and config");
    }
    if (config.N != channel.subcarriers() || alloc.x.subcarriers() != config.N) {
        throw ShapeMismatch("subcarrier count differs across channel, allocation and config");
    }
}

FeasibilityReport check_feasibility(std::span<const UserTask> tasks, const ChannelState& channel,
                                    const Allocation& alloc, const SystemConfig& config) {
    check_shapes(tasks, channel, alloc, config);
    FeasibilityReport report;
    auto flag = [&](std::ptrdiff_t who, Constraint c, double slack) {
        report.violations.push_back({who, c, slack});
        report.feasible = false;
    };

    const auto K = tasks.size();
    const auto rates = uplink_rates(tasks, channel, alloc.x);
    double f_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const auto who = static_cast<std::ptrdiff_t>(k);
        const double lambda = alloc.lambda[k];
        if (lambda < -kRelativeTolerance) flag(who, Constraint::OffloadRatio, lambda);
        if (lambda > 1.0 + kRelativeTolerance) flag(who, Constraint::OffloadRatio, 1.0 - lambda);

        const double f = alloc.f_edge[k];
        if (f < 0.0) flag(who, Constraint::EdgeShareNonNegative, f);
        f_sum += f;

        const double deadline = effective_deadline(tasks[k], config);
        double t_off = kInf;
        try {
            t_off = offload_latency(tasks[k], lambda, rates[k], f);
        } catch (const DivisionByZeroOffload&) {
        }
        const double t = total_latency(local_latency(tasks[k], lambda), t_off);
        if (t > deadline + kLatencyTolerance) flag(who, Constraint::Deadline, deadline - t);

        const double phi = alloc.phi[k];
        const double phi_tol = kRelativeTolerance * std::max(1.0, rates[k]);
        if (phi < -phi_tol) flag(who, Constraint::AuxRateBound, phi);
        if (phi > rates[k] + phi_tol) flag(who, Constraint::AuxRateBound, rates[k] - phi);
    }
    if (f_sum > config.F * (1.0 + kRelativeTolerance)) {
        flag(kSystemWide, Constraint::EdgeCapacity, config.F - f_sum);
    }

    for (std::size_t n = 0; n < alloc.x.subcarriers(); ++n) {
        double column = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const auto v = alloc.x.get(k, n);
            if (v > 1) flag(static_cast<std::ptrdiff_t>(n), Constraint::SubcarrierBinary, 1.0 - v);
            column += v;
        }
        if (column > 1.0 + kIndicatorTolerance) {
            flag(static_cast<std::ptrdiff_t>(n), Constraint::SubcarrierExclusive, 1.0 - column);
        }
    }
    return report;
}

SolveReport evaluate(std::span<const UserTask> tasks, const ChannelState& channel,
                     const Allocation& alloc, const SystemConfig& config) {
    auto feasibility = check_feasibility(tasks, channel, alloc, config);
    SolveReport report;
    report.allocation = alloc;
    report.feasible = feasibility.feasible;
    report.violations = std::move(feasibility.violations);
    report.per_user.resize(tasks.size());

    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const auto& task = tasks[k];
        const double lambda = alloc.lambda[k];
        auto& u = report.per_user[k];
        u.t_local = local_latency(task, lambda);
        u.E_local = local_energy(task, lambda);
        const double rate = uplink_rate(task, channel, k, alloc.x.row(k));
        const double power = alloc.x.count(k) > 0 ? task.p_max : 0.0;
        try {
            u.t_offload = offload_latency(task, lambda, rate, alloc.f_edge[k]);
            const auto e = offload_energy(task, lambda, rate, alloc.f_edge[k], config.kappa_edge, power);
            u.E_uplink = e.uplink;
            u.E_edge = e.edge;
        } catch (const DivisionByZeroOffload&) {
            u.t_offload = kInf;
        }
        report.total_energy += u.energy();
    }
    return report;
}

}  // namespace mecopt
