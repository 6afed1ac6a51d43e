#include "mecopt/ps_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mecopt {

DeadlineUnreachable::DeadlineUnreachable(std::ptrdiff_t user, const std::string& what)
    : Error(what), user_(user) {}

EmptyRate::EmptyRate(std::ptrdiff_t user, const std::string& what) : Error(what), user_(user) {}

DualState DualState::uniform(std::size_t users, double alpha, double beta, double gamma,
                             double zeta, double xi, double theta) {
    DualState d;
    d.alpha.assign(users, alpha);
    d.beta.assign(users, beta);
    d.gamma = gamma;
    d.step_alpha.assign(users, zeta);
    d.step_beta.assign(users, xi);
    d.step_gamma = theta;
    return d;
}

namespace {

// lambda R / phi, zero for non-offloading users.
double upload_time(const UserTask& task, double lambda, double phi) {
    if (lambda <= 0.0) return 0.0;
    if (phi <= 0.0) throw DivisionByZeroOffload("phi must be positive for an offloading user");
    return lambda * task.R / phi;
}

// lambda R c / f, zero for non-offloading users.
double edge_time(const UserTask& task, double lambda, double f_edge) {
    if (lambda <= 0.0) return 0.0;
    if (f_edge <= 0.0) throw DivisionByZeroOffload("edge share must be positive for an offloading user");
    return lambda * task.cycles() / f_edge;
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double omega_term(const UserTask& task, double lambda, double phi, double f_edge, double alpha,
                  double beta, double gamma, double kappa_edge, double deadline) {
    const double latency = upload_time(task, lambda, phi) + edge_time(task, lambda, f_edge);
    return alpha * (latency - deadline) + gamma * f_edge + beta * phi +
           kappa_edge * lambda * task.cycles() * f_edge * f_edge;
}

double lagrangian(const Allocation& alloc, const DualState& duals, std::span<const UserTask> tasks,
                  const ChannelState& channel, const SystemConfig& config) {
    double transmit = 0.0, edge = 0.0, deadline = 0.0, rate = 0.0, f_sum = 0.0;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const auto& task = tasks[k];
        const double lambda = alloc.lambda[k];
        const double f = alloc.f_edge[k];
        const std::size_t held = alloc.x.count(k);
        const double p = subcarrier_power(task, held);
        transmit += static_cast<double>(held) * p * upload_time(task, lambda, alloc.phi[k]);
        edge += config.kappa_edge * lambda * task.cycles() * f * f;
        deadline += duals.alpha[k] * (upload_time(task, lambda, alloc.phi[k]) +
                                      edge_time(task, lambda, f) - effective_deadline(task, config));
        rate += duals.beta[k] * (alloc.phi[k] - uplink_rate(task, channel, k, alloc.x.row(k)));
        f_sum += f;
    }
    return transmit + edge + deadline + rate + duals.gamma * (f_sum - config.F);
}

double lagrangian_decomposed(const Allocation& alloc, const DualState& duals,
                             std::span<const UserTask> tasks, const ChannelState& channel,
                             const SystemConfig& config) {
    const auto counts = alloc.x.counts();
    double per_subcarrier = 0.0;
    for (std::size_t n = 0; n < alloc.x.subcarriers(); ++n) {
        for (std::size_t k = 0; k < tasks.size(); ++k) {
            if (alloc.x.get(k, n) == 0) continue;
            per_subcarrier += per_subcarrier_cost(tasks[k], alloc.lambda[k], alloc.phi[k], duals.beta[k],
                                                  subcarrier_power(tasks[k], counts[k]),
                                                  channel.normalized_gain(k, n), channel.bandwidth);
        }
    }
    double omega = 0.0;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        omega += omega_term(tasks[k], alloc.lambda[k], alloc.phi[k], alloc.f_edge[k], duals.alpha[k],
                            duals.beta[k], duals.gamma, config.kappa_edge,
                            effective_deadline(tasks[k], config));
    }
    return per_subcarrier + omega - duals.gamma * config.F;
}

double kkt_gradient_f(const UserTask& task, double lambda, double f_edge, double alpha,
                      double gamma, double kappa_edge) {
    const double work = lambda * task.cycles();
    return 2.0 * f_edge * kappa_edge * work - alpha * work / (f_edge * f_edge) + gamma;
}

double bisect_f(const UserTask& task, double lambda, double alpha, double gamma,
                const SystemConfig& config, double epsilon) {
    const double work = lambda * task.cycles();
    if (work <= 0.0 || alpha <= 0.0) return 0.0;
    const double kappa = config.kappa_edge;
    if (kkt_gradient_f(task, lambda, config.F, alpha, gamma, kappa) <= 0.0) return config.F;

    double lo = 0.0;
    double hi = config.F;
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 2000; ++iter) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at floating-point resolution
        const double grad = kkt_gradient_f(task, lambda, mid, alpha, gamma, kappa);
        const double scale = 2.0 * mid * kappa * work + alpha * work / (mid * mid) + gamma;
        if (std::abs(grad) <= epsilon * scale) break;
        if (grad > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return mid;
}

double per_subcarrier_cost(const UserTask& task, double lambda, double phi, double beta,
                           double power, double normalized_gain, double bandwidth) {
    const double transmit = lambda > 0.0 ? power * upload_time(task, lambda, phi) : 0.0;
    return transmit - bandwidth * beta * std::log2(1.0 + power * normalized_gain);
}

Assignment assign_subcarriers(std::span<const double> lambda, std::span<const double> phi,
                              std::span<const double> beta, const ChannelState& channel,
                              std::span<const UserTask> tasks,
                              std::span<const std::size_t> prev_counts) {
    const auto K = tasks.size();
    const auto N = channel.subcarriers();
    Assignment x(K, N);

    std::vector<std::size_t> active;
    std::vector<double> power(K), transmit(K);
    for (std::size_t k = 0; k < K; ++k) {
        if (lambda[k] <= 0.0) continue;
        active.push_back(k);
        power[k] = tasks[k].p_max / static_cast<double>(std::max<std::size_t>(prev_counts[k], 1));
        transmit[k] = power[k] * upload_time(tasks[k], lambda[k], phi[k]);
    }
    if (active.empty()) return x;

    for (std::size_t n = 0; n < N; ++n) {
        std::size_t best = active.front();
        double best_cost = kInf;
        for (auto k : active) {
            const double cost = transmit[k] - channel.bandwidth * beta[k] *
                                                  std::log2(1.0 + power[k] * channel.normalized_gain(k, n));
            if (cost < best_cost) {
                best_cost = cost;
                best = k;
            }
        }
        x.set(best, n, 1);
    }
    return x;
}

PhiChoice solve_phi(const UserTask& task, double lambda, double f_edge, double alpha, double beta,
                    double transmit_power, double rate_cap, double deadline, std::ptrdiff_t user) {
    PhiChoice out;
    out.rate_cap = rate_cap;
    if (lambda <= 0.0) {
        out.phi = rate_cap;
        return out;
    }
    if (rate_cap <= 0.0) throw EmptyRate(user, "offloading user holds no subcarrier");
    const double bits = lambda * task.R;
    const double slack = deadline * f_edge - bits * task.c;
    if (f_edge <= 0.0 || slack <= 0.0) {
        throw DeadlineUnreachable(user, "edge share too small to meet the deadline at any uplink rate");
    }
    out.phi_deadline = bits * f_edge / slack;
    out.phi_stationary = beta > 0.0 ? std::sqrt((alpha + transmit_power) * bits / beta) : kInf;

    if (out.phi_stationary < out.phi_deadline) {
        out.phi = out.phi_deadline;
    } else if (out.phi_stationary <= rate_cap) {
        out.phi = out.phi_stationary;
    } else {
        out.phi = rate_cap;
    }
    return out;
}

double phi_objective(const UserTask& task, double lambda, double alpha, double beta,
                     double transmit_power, double phi) {
    return (alpha + transmit_power) * lambda * task.R / phi + beta * phi;
}

DualState update_duals(const DualState& duals, const Allocation& alloc,
                       std::span<const UserTask> tasks, const ChannelState& channel,
                       const SystemConfig& config, DualSign sign) {
    const double s = sign == DualSign::ascent ? 1.0 : -1.0;
    DualState next = duals;
    double f_sum = 0.0;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const auto& task = tasks[k];
        const double lambda = alloc.lambda[k];
        const double latency = upload_time(task, lambda, alloc.phi[k]) + edge_time(task, lambda, alloc.f_edge[k]);
        const double deadline_residual = latency - effective_deadline(task, config);
        const double rate_residual = alloc.phi[k] - uplink_rate(task, channel, k, alloc.x.row(k));
        next.alpha[k] = std::max(0.0, duals.alpha[k] + s * duals.step_alpha[k] * deadline_residual);
        next.beta[k] = std::max(0.0, duals.beta[k] + s * duals.step_beta[k] * rate_residual);
        f_sum += alloc.f_edge[k];
    }
    next.gamma = std::max(0.0, duals.gamma + s * duals.step_gamma * (f_sum - config.F));
    next.iteration = duals.iteration + 1;
    return next;
}

std::optional<Allocation> recover_primal(std::span<const double> lambda, const Assignment& x,
                                         std::span<const UserTask> tasks,
                                         const ChannelState& channel, const SystemConfig& config) {
    Allocation a;
    a.lambda.assign(lambda.begin(), lambda.end());
    a.x = x;
    a.phi = uplink_rates(tasks, channel, x);
    a.f_edge.assign(tasks.size(), 0.0);
    double f_sum = 0.0;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const double f = min_edge_share(tasks[k], lambda[k], a.phi[k], effective_deadline(tasks[k], config));
        if (!std::isfinite(f)) return std::nullopt;
        a.f_edge[k] = f;
        f_sum += f;
    }
    if (f_sum > config.F * (1.0 + kRelativeTolerance)) return std::nullopt;
    if (!check_feasibility(tasks, channel, a, config).feasible) return std::nullopt;
    return a;
}

namespace {

// Rate of user k on `set` under the equal power split.
double set_rate(const UserTask& task, const ChannelState& channel, std::size_t k,
                const std::vector<std::size_t>& set) {
    if (set.empty()) return 0.0;
    const double p = task.p_max / static_cast<double>(set.size());
    double sum = 0.0;
    for (const auto n : set) sum += std::log2(1.0 + p * channel.normalized_gain(k, n));
    return channel.bandwidth * sum;
}

// Shortfall of an assignment: the summed relative rate deficit of users
// that cannot meet their deadline even with the whole server, then the total
// minimum edge share of the others.
struct Shortfall {
    double deficit = 0.0;
    double share = 0.0;
    bool operator<(const Shortfall& o) const {
        return deficit != o.deficit ? deficit < o.deficit : share < o.share;
    }
};

}  // namespace

std::optional<Assignment> repair_assignment(std::span<const double> lambda, const Assignment& x,
                                            std::span<const UserTask> tasks, const ChannelState& channel,
                                            const SystemConfig& config, std::size_t candidates) {
    const auto K = tasks.size();
    const auto N = channel.subcarriers();
    std::vector<std::vector<std::size_t>> sets(K);
    std::vector<std::ptrdiff_t> owner(N, Assignment::kUnassigned);
    for (std::size_t n = 0; n < N; ++n) {
        owner[n] = x.owner(n);
        if (owner[n] != Assignment::kUnassigned) sets[static_cast<std::size_t>(owner[n])].push_back(n);
    }

    // Rate below which a user misses its deadline even with all of F.
    std::vector<double> deadline(K), floor_rate(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        deadline[k] = effective_deadline(tasks[k], config);
        if (lambda[k] <= 0.0) continue;
        const double left = deadline[k] - lambda[k] * tasks[k].cycles() / config.F;
        if (left <= 0.0) return std::nullopt;
        floor_rate[k] = lambda[k] * tasks[k].R / left;
    }
    auto add = [&](std::size_t k, double r, Shortfall& s) {
        if (lambda[k] <= 0.0) return;
        if (r <= floor_rate[k]) {
            s.deficit += 1.0 - r / floor_rate[k];
            return;
        }
        const double f = min_edge_share(tasks[k], lambda[k], r, deadline[k]);
        if (std::isfinite(f)) {
            s.share += f;
        } else {
            s.deficit += 1e-12;  // right at the floor
        }
    };

    std::vector<double> rate(K);
    std::vector<Shortfall> part(K);  // each user's own contribution
    auto refresh = [&](std::size_t k) {
        rate[k] = set_rate(tasks[k], channel, k, sets[k]);
        part[k] = {};
        add(k, rate[k], part[k]);
    };
    for (std::size_t k = 0; k < K; ++k) refresh(k);
    auto remove = [&](std::size_t k, Shortfall& s) {
        s.deficit -= part[k].deficit;
        s.share -= part[k].share;
    };
    // Summed from scratch so rounding does not drift across moves.
    auto shortfall = [&] {
        Shortfall s;
        for (std::size_t k = 0; k < K; ++k) {
            s.deficit += part[k].deficit;
            s.share += part[k].share;
        }
        return s;
    };

    // Each user's subcarriers, strongest first, for picking move candidates.
    std::vector<std::vector<std::size_t>> ranked(K);
    for (std::size_t k = 0; k < K; ++k) {
        if (lambda[k] <= 0.0) continue;
        ranked[k].resize(N);
        std::iota(ranked[k].begin(), ranked[k].end(), std::size_t{0});
        std::stable_sort(ranked[k].begin(), ranked[k].end(), [&](std::size_t a, std::size_t b) {
            return channel.normalized_gain(k, a) > channel.normalized_gain(k, b);
        });
    }

    const std::size_t max_moves = N * std::max<std::size_t>(K, 1);
    for (std::size_t move = 0; move <= max_moves; ++move) {
        const Shortfall now = shortfall();
        if (now.deficit == 0.0 && now.share <= config.F * (1.0 + kRelativeTolerance)) {
            return Assignment::from_owners(K, owner);
        }
        if (move == max_moves) break;

        Shortfall best = now;
        std::size_t best_k = K, best_n = N;
        // Stranded users are served first; only then does everyone compete.
        const bool stranded = now.deficit > 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (lambda[k] <= 0.0 || (stranded && part[k].deficit <= 0.0)) continue;
            std::size_t tried = 0;
            std::vector<std::size_t> grown = sets[k];
            grown.push_back(0);
            for (const auto n : ranked[k]) {
                if (tried == candidates) break;
                if (owner[n] == static_cast<std::ptrdiff_t>(k)) continue;
                ++tried;
                grown.back() = n;
                const auto donor = owner[n];
                double r_donor = 0.0;
                if (donor != Assignment::kUnassigned) {
                    auto shrunk = sets[static_cast<std::size_t>(donor)];
                    shrunk.erase(std::find(shrunk.begin(), shrunk.end(), n));
                    r_donor = set_rate(tasks[static_cast<std::size_t>(donor)], channel,
                                       static_cast<std::size_t>(donor), shrunk);
                }
                Shortfall s = now;
                remove(k, s);
                add(k, set_rate(tasks[k], channel, k, grown), s);
                if (donor != Assignment::kUnassigned) {
                    remove(static_cast<std::size_t>(donor), s);
                    add(static_cast<std::size_t>(donor), r_donor, s);
                }
                if (s < best) {
                    best = s;
                    best_k = k;
                    best_n = n;
                }
            }
        }
        if (best_k == K) break;  // no single move helps

        const auto donor = owner[best_n];
        if (donor != Assignment::kUnassigned) {
            const auto d = static_cast<std::size_t>(donor);
            sets[d].erase(std::find(sets[d].begin(), sets[d].end(), best_n));
            refresh(d);
        }
        sets[best_k].push_back(best_n);
        owner[best_n] = static_cast<std::ptrdiff_t>(best_k);
        refresh(best_k);
    }
    return std::nullopt;
}

double offload_objective(const Allocation& alloc, std::span<const UserTask> tasks,
                         const ChannelState& channel, const SystemConfig& config) {
    const auto report = evaluate(tasks, channel, alloc, config);
    double total = 0.0;
    for (const auto& u : report.per_user) total += u.E_uplink + u.E_edge;
    return total;
}

namespace {

DualState warm_duals(std::span<const double> lambda, const Allocation& warm,
                     std::span<const double> warm_rates, std::span<const UserTask> tasks,
                     const SystemConfig& config) {
    const auto K = tasks.size();
    DualState d = DualState::uniform(K, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    std::vector<double> known_beta;
    for (std::size_t k = 0; k < K; ++k) {
        if (lambda[k] <= 0.0) continue;
        const auto& task = tasks[k];
        const double deadline = effective_deadline(task, config);
        const double rate = warm_rates[k];
        double f = std::max(warm.f_edge.empty() ? 0.0 : warm.f_edge[k],
                            min_edge_share(task, lambda[k], rate, deadline));
        if (!std::isfinite(f) || f <= 0.0) f = config.F / static_cast<double>(K);
        f = std::min(f, config.F);
        // alpha such that the bisection reproduces f at gamma = 0
        d.alpha[k] = 2.0 * config.kappa_edge * f * f * f;
        if (rate > 0.0) {
            const double upload = lambda[k] * task.R / rate;
            const double remaining = deadline - upload > 0.0 ? deadline - upload : deadline;
            const double edge_energy = config.kappa_edge * lambda[k] * task.cycles() * f * f;
            d.beta[k] = (upload / rate) * (task.p_max + 2.0 * edge_energy / remaining);
            known_beta.push_back(d.beta[k]);
        }
    }
    const double fallback = known_beta.empty() ? 1e-6 : mean(known_beta);
    for (std::size_t k = 0; k < K; ++k) {
        if (lambda[k] > 0.0 && warm_rates[k] <= 0.0) d.beta[k] = fallback;
    }
    return d;
}

void set_steps(DualState& d, const PsSchedule& schedule, std::span<const double> lambda,
               const Allocation& point, std::span<const double> rates,
               std::span<const UserTask> tasks, const SystemConfig& config) {
    const auto K = tasks.size();
    if (schedule.step_rule == StepRule::table) {
        std::fill(d.step_alpha.begin(), d.step_alpha.end(), schedule.zeta);
        std::fill(d.step_beta.begin(), d.step_beta.end(), schedule.xi);
        d.step_gamma = schedule.theta;
        return;
    }
    double gamma_scale = 0.0;
    std::size_t active = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const double deadline = effective_deadline(tasks[k], config);
        d.step_alpha[k] = schedule.alpha_gain * d.alpha[k] / deadline;
        const double rate_scale = std::max(rates[k], point.phi[k]);
        d.step_beta[k] = rate_scale > 0.0 ? schedule.beta_gain * d.beta[k] / rate_scale : 0.0;
        if (lambda[k] > 0.0) {
            gamma_scale += 2.0 * config.kappa_edge * lambda[k] * tasks[k].cycles() * point.f_edge[k];
            ++active;
        }
    }
    if (active > 0) gamma_scale /= static_cast<double>(active);
    d.step_gamma = schedule.gamma_gain * std::max(gamma_scale, d.gamma) / config.F;
}

double relative_change(double before, double after, double floor) {
    return std::abs(after - before) / std::max({std::abs(before), std::abs(after), floor});
}

}  // namespace

PsResult solve_ps(std::span<const double> lambda, std::span<const UserTask> tasks,
                  const ChannelState& channel, const SystemConfig& config, const Allocation& warm,
                  const PsSchedule& schedule, const std::optional<DualState>& duals_init) {
    const auto K = tasks.size();
    const auto N = channel.subcarriers();
    if (lambda.size() != K || warm.x.users() != K || warm.x.subcarriers() != N) {
        throw ShapeMismatch("solve_ps: lambda or warm start does not match the instance");
    }

    for (std::size_t k = 0; k < K; ++k) {
        if (lambda[k] <= 0.0) continue;
        const auto user = static_cast<std::ptrdiff_t>(k);
        if (effective_deadline(tasks[k], config) * config.F <= lambda[k] * tasks[k].cycles()) {
            throw DeadlineUnreachable(user, "user " + std::to_string(k) +
                                                " cannot meet its deadline even with the whole edge server");
        }
        if (N == 0) throw EmptyRate(user, "user " + std::to_string(k) + " offloads but there are no subcarriers");
    }

    PsResult result;
    auto consider = [&](const Assignment& x) -> double {
        auto candidate = recover_primal(lambda, x, tasks, channel, config);
        if (!candidate && schedule.repair_candidates > 0) {
            if (auto fixed = repair_assignment(lambda, x, tasks, channel, config, schedule.repair_candidates)) {
                candidate = recover_primal(lambda, *fixed, tasks, channel, config);
            }
        }
        if (!candidate) return kInf;
        const double objective = offload_objective(*candidate, tasks, channel, config);
        if (objective < result.objective) {
            result.objective = objective;
            result.allocation = std::move(*candidate);
        }
        return objective;
    };
    consider(warm.x);

    const auto warm_rates = uplink_rates(tasks, channel, warm.x);
    DualState duals = duals_init ? *duals_init
                      : schedule.init == DualInit::warm
                          ? warm_duals(lambda, warm, warm_rates, tasks, config)
                          : DualState::uniform(K, schedule.alpha0, schedule.beta0, schedule.gamma0,
                                               schedule.zeta, schedule.xi, schedule.theta);

    Allocation point;
    point.lambda.assign(lambda.begin(), lambda.end());
    point.x = warm.x;
    point.phi = warm_rates;
    point.f_edge.assign(K, 0.0);
    auto counts = warm.x.counts();
    std::vector<double> rates = warm_rates;

    std::size_t since_improvement = 0;
    for (std::size_t z = 0; z < schedule.max_dual_iterations; ++z) {
        double previous = kInf;
        double current = kInf;
        std::size_t sweeps = 0;
        // The equal power split couples successive assignments, and the
        // sweeps can settle into a two-cycle; stop when one repeats.
        Assignment two_back, one_back;
        for (; sweeps < schedule.max_inner_sweeps; ++sweeps) {
            for (std::size_t k = 0; k < K; ++k) {
                point.f_edge[k] = bisect_f(tasks[k], lambda[k], duals.alpha[k], duals.gamma, config,
                                           schedule.bisection_epsilon);
            }
            point.x = assign_subcarriers(lambda, point.phi, duals.beta, channel, tasks, counts);
            counts = point.x.counts();
            rates = uplink_rates(tasks, channel, point.x);
            for (std::size_t k = 0; k < K; ++k) {
                const auto& task = tasks[k];
                const double deadline = effective_deadline(task, config);
                const double power = counts[k] > 0 ? task.p_max : 0.0;
                try {
                    point.phi[k] = solve_phi(task, lambda[k], point.f_edge[k], duals.alpha[k], duals.beta[k],
                                             power, rates[k], deadline, static_cast<std::ptrdiff_t>(k))
                                       .phi;
                } catch (const EmptyRate&) {
                    // No rate this sweep: demand the rate the deadline needs so beta rises.
                    const double slack = deadline * point.f_edge[k] - lambda[k] * task.cycles();
                    const double needed = lambda[k] * task.R / deadline;
                    point.phi[k] = slack > 0.0 ? std::max(needed, lambda[k] * task.R * point.f_edge[k] / slack)
                                               : needed;
                } catch (const DeadlineUnreachable&) {
                    // Dual edge share too small this sweep; alpha will push it up.
                    point.phi[k] = rates[k];
                }
            }
            try {
                current = lagrangian(point, duals, tasks, channel, config);
            } catch (const DivisionByZeroOffload&) {
                current = kInf;  // some alpha collapsed to zero this sweep
            }
            if (sweeps > 0 && relative_change(previous, current, 1e-300) <= schedule.precision) {
                ++sweeps;
                break;
            }
            if (sweeps > 1 && point.x == two_back) {
                ++sweeps;
                break;
            }
            two_back = std::move(one_back);
            one_back = point.x;
            previous = current;
        }

        const double before = result.objective;
        const double candidate = consider(point.x);
        since_improvement = result.objective < before ? 0 : since_improvement + 1;

        PsTracePoint tp;
        tp.dual_iteration = z;
        tp.sweeps = sweeps;
        tp.lagrangian = current;
        tp.candidate_objective = candidate;
        tp.best_objective = result.objective;
        tp.gamma = duals.gamma;
        tp.mean_alpha = mean(duals.alpha);
        tp.mean_beta = mean(duals.beta);
        result.trace.push_back(tp);
        result.dual_iterations = z + 1;

        set_steps(duals, schedule, lambda, point, rates, tasks, config);
        DualState next;
        try {
            next = update_duals(duals, point, tasks, channel, config, schedule.sign);
        } catch (const DivisionByZeroOffload&) {
            break;  // degenerate multipliers; keep the best primal found so far
        }

        double change = relative_change(duals.gamma, next.gamma, 1e-300);
        for (std::size_t k = 0; k < K; ++k) {
            change = std::max(change, relative_change(duals.alpha[k], next.alpha[k], 1e-300));
            change = std::max(change, relative_change(duals.beta[k], next.beta[k], 1e-300));
        }
        duals = std::move(next);
        if (change < schedule.precision) break;
        if (schedule.dual_patience > 0 && since_improvement >= schedule.dual_patience) break;
    }
    result.duals = std::move(duals);

    if (!std::isfinite(result.objective)) {
        throw NoFeasiblePrimal("no subcarrier assignment admitted a feasible edge-share split");
    }
    return result;
}

}  // namespace mecopt
