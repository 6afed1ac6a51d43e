#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mecopt/model.hpp"

namespace YAML {
class Node;
}

namespace mecopt {

class BadSpec : public Error {
public:
    using Error::Error;
};

/// Closed interval [lo, hi] a parameter is drawn uniformly from.
struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Which quantity the unit-mean fading draw stands for.
///  - power:     |beta| ~ Exp(1), squared Rayleigh amplitude
///  - amplitude: |beta| ~ Rayleigh with E|beta|^2 = 1
enum class Fading { power, amplitude };

struct ScenarioSpec {
    std::size_t K = 20;
    std::size_t N = 512;
    double radius = 30.0;        // meters
    double min_distance = 1.0;   // meters
    double T = 2e-3;             // seconds
    double F = 1e10;             // cycles per second
    Range f_local{0.6e9, 0.7e9};
    Range R{1000.0, 1500.0};
    Range c{1000.0, 1200.0};
    double p_max = 0.0;          // watts; default set from 27.8 dBm
    double sigma2 = 1e-13;       // watts
    double B = 12.5e3;           // hertz
    double kappa_local = 1e-24;
    double kappa_edge = 1e-26;
    Fading fading = Fading::power;
    std::uint64_t rng_seed = 1;

    ScenarioSpec();
};

struct Instance {
    std::vector<UserTask> tasks;
    ChannelState channel;
    SystemConfig config;
    std::vector<double> distances;  // meters, one per user
};

double dbm_to_watts(double dbm);

/// Throws BadSpec on empty or non-positive ranges and parameters.
void validate(const ScenarioSpec& spec);

/// Distance from the server of a point uniform in the annulus
/// [min_distance, radius].
double sample_distance(std::mt19937_64& rng, double radius, double min_distance);

/// Draws one instance. Users first (distance, R, c, f_local in user order),
/// then fading subcarrier by subcarrier across users, so instances that share
/// a seed share their first users and first subcarriers.
Instance generate(const ScenarioSpec& spec);

/// Parses the `scenario` mapping of a configuration document. Keys mirror the
/// ScenarioSpec field names; ranges are two-element lists; p_max accepts a
/// plain number (watts) or a string with a `W` / `dBm` suffix.
ScenarioSpec parse_scenario(const YAML::Node& node, const ScenarioSpec& base = {});
ScenarioSpec load_scenario(const std::filesystem::path& path);

}  // namespace mecopt
