#pragma once

#include "mecopt/po_solver.hpp"
#include "mecopt/ps_solver.hpp"

namespace mecopt {

/// Some user cannot meet its deadline with any split of the edge server.
class Infeasible : public Error {
public:
    Infeasible(std::ptrdiff_t user, const std::string& what);
    std::ptrdiff_t user() const { return user_; }

private:
    std::ptrdiff_t user_;
};

struct SolveSchedule {
    std::size_t z_max = 600;   // outer iteration cap
    double precision = 1e-5;   // relative change of total energy
    PsSchedule ps;
};

/// Edge-capacity split for a fixed subcarrier assignment.
struct CapacitySplit {
    std::vector<double> lambda;  // ratio each user would run at with its share
    std::vector<double> f_edge;  // share that makes that ratio deadline-tight
    double gamma = 0.0;          // capacity price that clears sum f <= F
};

/// Splits F among users for fixed x. Each user walks along its deadline-tight
/// curve f(lambda) = lambda R c / (T - lambda R / r) and picks the ratio
/// minimising its energy plus gamma * f; gamma is bisected until the shares
/// fit into F. Throws Infeasible when even the minimum ratios do not fit.
CapacitySplit rebalance_capacity(std::span<const UserTask> tasks, const ChannelState& channel,
                                 const SystemConfig& config, const Assignment& x);

/// Block coordinate descent: offloading ratios in closed form, then subcarriers
/// and edge shares in the dual domain, repeated until the total energy stops
/// changing or z_max is hit. The report carries the best feasible iterate.
SolveReport solve(std::span<const UserTask> tasks, const ChannelState& channel,
                  const SystemConfig& config, const SolveSchedule& schedule = {});

}  // namespace mecopt
