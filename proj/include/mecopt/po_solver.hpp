#pragma once

#include "mecopt/model.hpp"

namespace mecopt {

/// No offloading ratio meets the deadline with the current resources.
class InfeasibleUser : public Error {
public:
    InfeasibleUser(std::ptrdiff_t user, double lower, double upper);

    std::ptrdiff_t user() const { return user_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

private:
    std::ptrdiff_t user_;
    double lower_;
    double upper_;
};

/// Deadline-admissible range of the offloading ratio for fixed rate and edge
/// share. The lower end comes from local execution, the upper end from the
/// uplink plus edge execution path.
struct LambdaBounds {
    double lower = 0.0;
    double upper = 0.0;

    bool feasible() const { return lower <= upper; }
};

LambdaBounds lambda_bounds(const UserTask& task, double rate, double f_edge, double deadline);

/// dE/dlambda for fixed rate and edge share. The energy is affine in lambda so
/// this does not depend on lambda. Returns +inf when rate is zero (offloading
/// is impossible, so the local-maximal branch applies).
double energy_gradient_lambda(const UserTask& task, double rate, double f_edge, double kappa_edge,
                              double transmit_power);
inline double energy_gradient_lambda(const UserTask& task, double rate, double f_edge,
                                     double kappa_edge) {
    return energy_gradient_lambda(task, rate, f_edge, kappa_edge, task.p_max);
}

/// Bounds crossing by less than this are rounding noise, not infeasibility.
inline constexpr double kLambdaSlack = 1e-12;

/// Energy-optimal ratio for one user given (rate, f_edge): the lower bound
/// when the gradient is non-negative, the upper bound otherwise. Ties go to
/// the lower bound. Throws InfeasibleUser when the bounds cross.
double solve_lambda(const UserTask& task, double rate, double f_edge, double kappa_edge,
                    double deadline, std::ptrdiff_t user = -1);

/// solve_lambda for every user under the current allocation's x and f_edge.
std::vector<double> solve_offloading(std::span<const UserTask> tasks, const ChannelState& channel,
                                     const Allocation& alloc, const SystemConfig& config);

}  // namespace mecopt
