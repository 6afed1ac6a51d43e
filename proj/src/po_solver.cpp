#include "mecopt/po_solver.hpp"

#include <algorithm>
#include <sstream>

namespace mecopt {

namespace {

std::string infeasible_message(std::ptrdiff_t user, double lower, double upper) {
    std::ostringstream os;
    os.precision(10);
    os << "user " << user << " cannot meet its deadline: offload ratio must be >= " << lower
       << " but the uplink and edge share allow at most " << upper;
    return os.str();
}

}  // namespace

InfeasibleUser::InfeasibleUser(std::ptrdiff_t user, double lower, double upper)
    : Error(infeasible_message(user, lower, upper)), user_(user), lower_(lower), upper_(upper) {}

LambdaBounds lambda_bounds(const UserTask& task, double rate, double f_edge, double deadline) {
    LambdaBounds b;
    b.lower = std::max(1.0 - deadline * task.f_local / task.cycles(), 0.0);
    if (rate <= 0.0 || f_edge <= 0.0) {
        b.upper = 0.0;
    } else {
        b.upper = std::min(deadline * rate * f_edge / (task.R * f_edge + rate * task.cycles()), 1.0);
    }
    return b;
}

double energy_gradient_lambda(const UserTask& task, double rate, double f_edge, double kappa_edge,
                              double transmit_power) {
    if (rate <= 0.0) return kInf;
    const double cycles = task.cycles();
    return -task.kappa_local * cycles * task.f_local * task.f_local + transmit_power * task.R / rate +
           kappa_edge * cycles * f_edge * f_edge;
}

double solve_lambda(const UserTask& task, double rate, double f_edge, double kappa_edge,
                    double deadline, std::ptrdiff_t user) {
    const auto b = lambda_bounds(task, rate, f_edge, deadline);
    if (!b.feasible()) {
        if (b.lower - b.upper > kLambdaSlack) throw InfeasibleUser(user, b.lower, b.upper);
        return b.lower;
    }
    if (rate <= 0.0 || f_edge <= 0.0) return b.lower;  // lower == 0 here
    return energy_gradient_lambda(task, rate, f_edge, kappa_edge) >= 0.0 ? b.lower : b.upper;
}

std::vector<double> solve_offloading(std::span<const UserTask> tasks, const ChannelState& channel,
                                     const Allocation& alloc, const SystemConfig& config) {
    const auto rates = uplink_rates(tasks, channel, alloc.x);
    std::vector<double> lambda(tasks.size());
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        lambda[k] = solve_lambda(tasks[k], rates[k], alloc.f_edge[k], config.kappa_edge,
                                 effective_deadline(tasks[k], config), static_cast<std::ptrdiff_t>(k));
    }
    return lambda;
}

}  // namespace mecopt
