#pragma once

#include "mecopt/model.hpp"
#include "mecopt/po_solver.hpp"

namespace mecopt {

/// Everything runs on the device. Deadline misses are reported as violations.
SolveReport solve_lc(std::span<const UserTask> tasks, const ChannelState& channel,
                     const SystemConfig& config);
/// Same, without a channel: the subcarrier matrix is all zeros.
SolveReport solve_lc(std::span<const UserTask> tasks, const SystemConfig& config);

struct FrPolicy {
    double target = 0.5;
};

/// Fixed offloading ratio. Each user's ratio is the target clamped into its
/// deadline-admissible range, taken with round-robin subcarriers and an even
/// F/K split of the edge server; each offloading user then gets exactly the
/// edge share its deadline needs at that ratio. Throws InfeasibleUser when a
/// user's admissible range is empty.
SolveReport solve_fr(std::span<const UserTask> tasks, const ChannelState& channel,
                     const SystemConfig& config, const FrPolicy& policy = {});

class TooLarge : public Error {
public:
    using Error::Error;
};

/// Grid of the exhaustive oracle: lambda in steps of 1/lambda_divisions on
/// [0, 1], edge shares in steps of F/f_divisions on [0, F].
struct OracleGrids {
    std::size_t lambda_divisions = 50;
    std::size_t f_divisions = 50;
};

struct GridResolution {
    double lambda_step = 0.0;
    double f_step = 0.0;
};

struct OracleResult {
    bool found = false;
    double best_energy = kInf;
    Allocation best_allocation;
    GridResolution grid_resolution;
    std::uint64_t instances_enumerated = 0;  // (assignment, ratio grid, share grid) tuples
    std::uint64_t assignments = 0;
    std::string diagnosis;  // why nothing was found
};

inline constexpr std::size_t kOracleMaxUsers = 3;
inline constexpr std::size_t kOracleMaxSubcarriers = 4;

/// Exhaustive search over every subcarrier assignment (each subcarrier to one
/// user or to nobody) and every grid point of ratios and edge shares with
/// sum f <= F. Ties go to the lexicographically first assignment, then the
/// first grid point. Throws TooLarge beyond kOracleMaxUsers users or
/// kOracleMaxSubcarriers subcarriers, or for grids coarser than the defaults.
OracleResult solve_oracle(std::span<const UserTask> tasks, const ChannelState& channel,
                          const SystemConfig& config, const OracleGrids& grids = {},
                          std::size_t threads = 1);

/// Largest energy change from snapping an allocation's ratios and edge shares
/// to their neighbouring grid points (x held fixed). Bounds how far the
/// grid optimum can sit above the continuous one near that allocation.
double grid_gap(std::span<const UserTask> tasks, const ChannelState& channel,
                const SystemConfig& config, const Allocation& alloc, const OracleGrids& grids = {});

}  // namespace mecopt
