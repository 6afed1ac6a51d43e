#pragma once

#include <optional>

#include "mecopt/model.hpp"

namespace mecopt {

/// Even an unlimited uplink cannot meet the deadline at this edge share
/// (T * f_edge <= lambda * R * c).
class DeadlineUnreachable : public Error {
public:
    DeadlineUnreachable(std::ptrdiff_t user, const std::string& what);
    std::ptrdiff_t user() const { return user_; }

private:
    std::ptrdiff_t user_;
};

/// An offloading user holds no subcarrier.
class EmptyRate : public Error {
public:
    EmptyRate(std::ptrdiff_t user, const std::string& what);
    std::ptrdiff_t user() const { return user_; }

private:
    std::ptrdiff_t user_;
};

/// The dual loop never produced a primal point passing the feasibility check.
class NoFeasiblePrimal : public Error {
public:
    using Error::Error;
};

/// Sign convention of the multiplier update. `ascent` is projected subgradient
/// ascent on the dual (multiplier grows while its constraint is violated);
/// `paper` flips the sign of every step.
enum class DualSign { ascent, paper };

/// How per-iteration step sizes are chosen.
///  - table:  constant zeta, xi, theta taken verbatim from the parameter table.
///  - scaled: dimensionless gains times the natural scale of each multiplier,
///            so steps are meaningful in SI units.
enum class StepRule { scaled, table };

/// How multipliers are seeded at the start of a resource-allocation solve.
///  - warm:  from the incoming primal point (alpha reproduces its edge shares,
///           beta is the marginal energy value of uplink rate, gamma = 0).
///  - fixed: the constants in PsSchedule.
enum class DualInit { warm, fixed };

struct DualState {
    std::vector<double> alpha;       // deadline multipliers
    std::vector<double> beta;        // phi <= r multipliers
    double gamma = 0.0;              // edge capacity multiplier
    std::vector<double> step_alpha;  // zeta_k
    std::vector<double> step_beta;   // xi_k
    double step_gamma = 0.0;         // theta
    std::size_t iteration = 0;

    static DualState uniform(std::size_t users, double alpha, double beta, double gamma,
                             double zeta, double xi, double theta);
};

// ---------------------------------------------------------------------------
// Lagrangian pieces
// ---------------------------------------------------------------------------

/// x-independent per-user part of the Lagrangian:
/// alpha (lambda R/phi + lambda R c/f - T) + gamma f + beta phi + kappa_m lambda c R f^2.
double omega_term(const UserTask& task, double lambda, double phi, double f_edge, double alpha,
                  double beta, double gamma, double kappa_edge, double deadline);

/// Lagrangian of the rate-relaxed resource allocation problem, evaluated term
/// by term. Throws DivisionByZeroOffload when an offloading user has phi = 0
/// or f_edge = 0.
double lagrangian(const Allocation& alloc, const DualState& duals, std::span<const UserTask> tasks,
                  const ChannelState& channel, const SystemConfig& config);

/// The same Lagrangian regrouped as sum_n L_n + sum_k omega_k - gamma F.
double lagrangian_decomposed(const Allocation& alloc, const DualState& duals,
                             std::span<const UserTask> tasks, const ChannelState& channel,
                             const SystemConfig& config);

// ---------------------------------------------------------------------------
// Edge CPU shares
// ---------------------------------------------------------------------------

/// dL/df_k = 2 f kappa_m lambda R c - alpha c R lambda / f^2 + gamma.
/// Strictly increasing in f for lambda > 0.
double kkt_gradient_f(const UserTask& task, double lambda, double f_edge, double alpha,
                      double gamma, double kappa_edge);

/// Bisection on [0, F] for the stationary point of the Lagrangian in f_k.
/// Stops once |dL/df| <= epsilon times the sum of the magnitudes of its terms.
/// Returns 0 when the gradient is non-negative everywhere (no deadline
/// pressure or lambda = 0) and F when it is negative everywhere.
double bisect_f(const UserTask& task, double lambda, double alpha, double gamma,
                const SystemConfig& config, double epsilon);

// ---------------------------------------------------------------------------
// Subcarriers
// ---------------------------------------------------------------------------

/// L_n for user k holding subcarrier n:
/// p lambda R / phi - B beta log2(1 + p g~).
double per_subcarrier_cost(const UserTask& task, double lambda, double phi, double beta,
                           double power, double normalized_gain, double bandwidth);

/// Per-subcarrier argmin of L_n over users with lambda > 0, with powers taken
/// from the previous counts (p = p_max / max(N_k, 1)). Ties go to the lowest
/// user index. Subcarriers stay unassigned when nobody offloads.
Assignment assign_subcarriers(std::span<const double> lambda, std::span<const double> phi,
                              std::span<const double> beta, const ChannelState& channel,
                              std::span<const UserTask> tasks,
                              std::span<const std::size_t> prev_counts);

// ---------------------------------------------------------------------------
// Auxiliary rate
// ---------------------------------------------------------------------------

struct PhiChoice {
    double phi = 0.0;
    double phi_deadline = 0.0;    // smallest rate meeting the deadline at f_edge
    double phi_stationary = 0.0;  // unconstrained minimiser, +inf when beta = 0
    double rate_cap = 0.0;        // achievable rate r~ on the assigned subcarriers
};

/// Three-branch clamp of the stationary rate: phi_deadline when the stationary
/// point lies below it, the stationary point when it lies in
/// [phi_deadline, rate_cap], rate_cap otherwise. lambda = 0 returns rate_cap.
PhiChoice solve_phi(const UserTask& task, double lambda, double f_edge, double alpha, double beta,
                    double transmit_power, double rate_cap, double deadline,
                    std::ptrdiff_t user = -1);

/// Objective minimised by solve_phi:
/// (alpha + transmit_power) lambda R / phi + beta phi.
double phi_objective(const UserTask& task, double lambda, double alpha, double beta,
                     double transmit_power, double phi);

// ---------------------------------------------------------------------------
// Multipliers
// ---------------------------------------------------------------------------

/// One projected subgradient step on (alpha, beta, gamma) at the given primal
/// point, using the step sizes stored in `duals`.
DualState update_duals(const DualState& duals, const Allocation& alloc,
                       std::span<const UserTask> tasks, const ChannelState& channel,
                       const SystemConfig& config, DualSign sign = DualSign::ascent);

// ---------------------------------------------------------------------------
// Resource allocation solve
// ---------------------------------------------------------------------------

struct PsSchedule {
    std::size_t max_dual_iterations = 600;
    double precision = 1e-5;
    std::size_t max_inner_sweeps = 200;
    double bisection_epsilon = 1e-5;
    /// Stop the dual loop after this many iterations without a better primal.
    std::size_t dual_patience = 10;
    /// Subcarriers tried per move when repairing an infeasible assignment;
    /// 0 disables the repair.
    std::size_t repair_candidates = 4;
    DualSign sign = DualSign::ascent;
    StepRule step_rule = StepRule::scaled;
    DualInit init = DualInit::warm;

    // StepRule::table
    double zeta = 1e-18;
    double xi = 1e-6;
    double theta = 1e-5;
    // StepRule::scaled
    double alpha_gain = 0.2;
    double beta_gain = 0.2;
    double gamma_gain = 0.2;
    // DualInit::fixed
    double alpha0 = 1e-6;
    double beta0 = 1e-6;
    double gamma0 = 1e-6;
};

struct PsTracePoint {
    std::size_t dual_iteration = 0;
    std::size_t sweeps = 0;
    double lagrangian = 0.0;
    double candidate_objective = kInf;  // +inf when the recovered point is infeasible
    double best_objective = kInf;
    double gamma = 0.0;
    double mean_alpha = 0.0;
    double mean_beta = 0.0;
};

struct PsResult {
    Allocation allocation;
    double objective = kInf;  // sum of offload energies of `allocation`
    DualState duals;
    std::vector<PsTracePoint> trace;
    std::size_t dual_iterations = 0;
};

/// Tightest feasible primal point for fixed (lambda, x): each offloading user
/// gets exactly the edge share that meets its deadline and phi = r. Returns
/// nullopt when some offloading user has no rate, no time left after the
/// uplink, or the shares overflow F.
std::optional<Allocation> recover_primal(std::span<const double> lambda, const Assignment& x,
                                         std::span<const UserTask> tasks,
                                         const ChannelState& channel, const SystemConfig& config);

/// Greedy primal repair for fixed lambda. Moves one subcarrier at a time until
/// every offloading user can meet its deadline and the minimum edge shares fit
/// into F. Each move is the best over the receiving users (the stranded ones
/// while any remain, otherwise all) and their `candidates` strongest
/// subcarriers not yet held, judged first by the rate deficit of stranded
/// users, then by the total minimum edge share. Returns nullopt when
/// no single move helps.
std::optional<Assignment> repair_assignment(std::span<const double> lambda, const Assignment& x,
                                            std::span<const UserTask> tasks, const ChannelState& channel,
                                            const SystemConfig& config, std::size_t candidates = 4);

/// Sum of uplink and edge energies of an allocation (the resource allocation
/// objective for fixed lambda).
double offload_objective(const Allocation& alloc, std::span<const UserTask> tasks,
                         const ChannelState& channel, const SystemConfig& config);

/// Dual-domain resource allocation for fixed lambda. Each dual iteration runs
/// sweeps of (edge shares by bisection, subcarriers by argmin, power split,
/// auxiliary rate) until the Lagrangian settles, then steps the multipliers.
/// Every sweep's subcarrier assignment is turned into a primal point by
/// recover_primal; the best feasible one (the warm start included) is
/// returned.
PsResult solve_ps(std::span<const double> lambda, std::span<const UserTask> tasks,
                  const ChannelState& channel, const SystemConfig& config, const Allocation& warm,
                  const PsSchedule& schedule = {},
                  const std::optional<DualState>& duals_init = std::nullopt);

}  // namespace mecopt
