#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mecopt {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Offloaded work with no uplink rate or no edge CPU share.
class DivisionByZeroOffload : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Domain types (SI units throughout)
// ---------------------------------------------------------------------------

/// One user's workload and device.
struct UserTask {
    double R = 0.0;            // input size, bits
    double c = 0.0;            // cycles per bit
    double deadline = 0.0;     // seconds
    double f_local = 0.0;      // cycles per second
    double p_max = 0.0;        // watts
    double kappa_local = 0.0;  // chip coefficient, CPU power = kappa * f^3

    double cycles() const { return c * R; }
};

/// Dense row-major K x N matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Subcarrier indicator matrix x_{k,n}. Entries are meant to be 0/1; other
/// values are representable so that feasibility checks can flag them.
class Assignment {
public:
    static constexpr std::ptrdiff_t kUnassigned = -1;

    Assignment() = default;
    Assignment(std::size_t users, std::size_t subcarriers)
        : users_(users), subcarriers_(subcarriers), x_(users * subcarriers, 0) {}

    /// Builds x from a per-subcarrier owner list (kUnassigned for none).
    static Assignment from_owners(std::size_t users, std::span<const std::ptrdiff_t> owners);
    /// Subcarrier n goes to user n mod K.
    static Assignment round_robin(std::size_t users, std::size_t subcarriers);

    std::size_t users() const { return users_; }
    std::size_t subcarriers() const { return subcarriers_; }

    std::uint8_t get(std::size_t k, std::size_t n) const { return x_[k * subcarriers_ + n]; }
    void set(std::size_t k, std::size_t n, std::uint8_t v) { x_[k * subcarriers_ + n] = v; }
    std::span<const std::uint8_t> row(std::size_t k) const {
        return {x_.data() + k * subcarriers_, subcarriers_};
    }

    /// N_k, the number of subcarriers held by user k.
    std::size_t count(std::size_t k) const;
    std::vector<std::size_t> counts() const;
    /// First user holding subcarrier n, or kUnassigned.
    std::ptrdiff_t owner(std::size_t n) const;

    bool operator==(const Assignment&) const = default;

private:
    std::size_t users_ = 0;
    std::size_t subcarriers_ = 0;
    std::vector<std::uint8_t> x_;
};

struct ChannelState {
    Matrix gains;              // g_{k,n}, power gains
    double noise_power = 0.0;  // sigma^2, watts
    double bandwidth = 0.0;    // B per subcarrier, hertz

    std::size_t users() const { return gains.rows(); }
    std::size_t subcarriers() const { return gains.cols(); }
    /// g_{k,n} / sigma^2
    double normalized_gain(std::size_t k, std::size_t n) const { return gains(k, n) / noise_power; }
};

struct SystemConfig {
    double F = 0.0;           // total edge capacity, cycles per second
    double kappa_edge = 0.0;  // edge chip coefficient
    double T = 0.0;           // slot length, seconds
    std::size_t N = 0;
    std::size_t K = 0;
};

struct Allocation {
    std::vector<double> lambda;  // offload ratios
    std::vector<double> f_edge;  // edge CPU shares
    Assignment x;
    std::vector<double> phi;     // auxiliary rate variables

    static Allocation all_local(std::size_t users, std::size_t subcarriers);
    double mean_offload_ratio() const;
};

struct UserBreakdown {
    double E_local = 0.0;
    double E_uplink = 0.0;
    double E_edge = 0.0;
    double t_local = 0.0;
    double t_offload = 0.0;

    double energy() const { return E_local + E_uplink + E_edge; }
    double latency() const { return t_local > t_offload ? t_local : t_offload; }
};

enum class Constraint {
    OffloadRatio,          // 0 <= lambda <= 1
    Deadline,              // max(t_local, t_offload) <= T
    EdgeShareNonNegative,  // f_edge >= 0
    EdgeCapacity,          // sum f_edge <= F
    SubcarrierExclusive,   // sum_k x_{k,n} <= 1
    SubcarrierBinary,      // x in {0, 1}
    AuxRateBound,          // 0 <= phi <= r
};

std::string to_string(Constraint c);

inline constexpr std::ptrdiff_t kSystemWide = -1;

/// Signed slack: limit minus value, negative when violated.
struct Violation {
    std::ptrdiff_t user = kSystemWide;  // or subcarrier index for subcarrier constraints
    Constraint constraint = Constraint::Deadline;
    double slack = 0.0;
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<Violation> violations;
};

struct TracePoint {
    std::size_t iteration = 0;
    double objective = 0.0;
    double best_objective = 0.0;
    double gamma = 0.0;
    double mean_alpha = 0.0;
    double mean_beta = 0.0;
    std::size_t dual_iterations = 0;
};

struct SolveReport {
    std::string algorithm;
    double total_energy = 0.0;
    std::vector<UserBreakdown> per_user;
    bool feasible = true;
    std::vector<Violation> violations;
    std::vector<TracePoint> trace;
    Allocation allocation;
    std::size_t outer_iterations = 0;
    std::string notes;

    double mean_offload_ratio() const { return allocation.mean_offload_ratio(); }
};

// ---------------------------------------------------------------------------
// Tolerances used by the feasibility check
// ---------------------------------------------------------------------------

inline constexpr double kLatencyTolerance = 1e-12;    // seconds, absolute
inline constexpr double kIndicatorTolerance = 1e-9;   // absolute, on sums of x
inline constexpr double kRelativeTolerance = 1e-12;   // capacity, phi bound, lambda range

// ---------------------------------------------------------------------------
// Latency and energy
// ---------------------------------------------------------------------------

double local_latency(const UserTask& task, double lambda);

/// Per-subcarrier transmit power under the equal split, zero when N_k = 0.
double subcarrier_power(const UserTask& task, std::size_t assigned);

/// Aggregate uplink rate of user k on the subcarriers flagged in x_row.
double uplink_rate(const UserTask& task, const ChannelState& channel, std::size_t k,
                   std::span<const std::uint8_t> x_row);

/// Uplink plus edge execution time. Throws DivisionByZeroOffload when
/// lambda > 0 and either rate or f_edge is zero.
double offload_latency(const UserTask& task, double lambda, double rate, double f_edge);

double total_latency(double t_local, double t_offload);

double local_energy(const UserTask& task, double lambda);

struct OffloadEnergy {
    double uplink = 0.0;
    double edge = 0.0;
    double total() const { return uplink + edge; }
};

/// transmit_power is sum_n x_{k,n} p_{k,n}; it equals p_max whenever the user
/// holds at least one subcarrier.
OffloadEnergy offload_energy(const UserTask& task, double lambda, double rate, double f_edge,
                             double kappa_edge, double transmit_power);
inline OffloadEnergy offload_energy(const UserTask& task, double lambda, double rate,
                                    double f_edge, double kappa_edge) {
    return offload_energy(task, lambda, rate, f_edge, kappa_edge, task.p_max);
}

/// Deadline actually enforced for a user: min(task deadline, slot length).
double effective_deadline(const UserTask& task, const SystemConfig& config);

/// Uplink rates of every user under x.
std::vector<double> uplink_rates(std::span<const UserTask> tasks, const ChannelState& channel,
                                 const Assignment& x);

/// Smallest edge share that meets the deadline at the given ratio and rate;
/// +inf when none does, 0 when lambda = 0.
double min_edge_share(const UserTask& task, double lambda, double rate, double deadline);

// ---------------------------------------------------------------------------
// Whole-allocation evaluation
// ---------------------------------------------------------------------------

void check_shapes(std::span<const UserTask> tasks, const ChannelState& channel,
                  const Allocation& alloc, const SystemConfig& config);

FeasibilityReport check_feasibility(std::span<const UserTask> tasks, const ChannelState& channel,
                                    const Allocation& alloc, const SystemConfig& config);

/// Per-user breakdown, total energy and feasibility of an allocation. Users
/// whose offload latency is undefined get t_offload = +inf and zero offload
/// energy; the deadline violation carries the diagnosis.
SolveReport evaluate(std::span<const UserTask> tasks, const ChannelState& channel,
                     const Allocation& alloc, const SystemConfig& config);

}  // namespace mecopt
