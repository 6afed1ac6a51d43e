#include "mecopt/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <set>
#include <sstream>

namespace mecopt {

ScenarioSpec::ScenarioSpec() : p_max(dbm_to_watts(27.8)) {}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void validate(const ScenarioSpec& spec) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw BadSpec(std::string(name) + " must be positive and finite");
    };
    auto range = [&](const Range& r, const char* name) {
        positive(r.lo, name);
        positive(r.hi, name);
        if (r.lo > r.hi) throw BadSpec(std::string(name) + " range is empty (lo > hi)");
    };
    positive(spec.radius, "radius");
    positive(spec.min_distance, "min_distance");
    if (spec.min_distance >= spec.radius) throw BadSpec("min_distance must be below radius");
    positive(spec.T, "T");
    positive(spec.F, "F");
    range(spec.f_local, "f_local");
    range(spec.R, "R");
    range(spec.c, "c");
    positive(spec.p_max, "p_max");
    positive(spec.sigma2, "sigma2");
    positive(spec.B, "B");
    positive(spec.kappa_local, "kappa_local");
    positive(spec.kappa_edge, "kappa_edge");
}

double sample_distance(std::mt19937_64& rng, double radius, double min_distance) {
    std::uniform_real_distribution<double> u(min_distance * min_distance, radius * radius);
    return std::sqrt(u(rng));
}

Instance generate(const ScenarioSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.rng_seed);
    auto uniform = [&](const Range& r) {
        if (r.lo == r.hi) return r.lo;
        return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
    };

    Instance inst;
    inst.config = {spec.F, spec.kappa_edge, spec.T, spec.N, spec.K};
    inst.tasks.resize(spec.K);
    inst.distances.resize(spec.K);
    for (std::size_t k = 0; k < spec.K; ++k) {
        inst.distances[k] = sample_distance(rng, spec.radius, spec.min_distance);
        auto& t = inst.tasks[k];
        t.R = uniform(spec.R);
        t.c = uniform(spec.c);
        t.f_local = uniform(spec.f_local);
        t.deadline = spec.T;
        t.p_max = spec.p_max;
        t.kappa_local = spec.kappa_local;
    }

    inst.channel.gains = Matrix(spec.K, spec.N);
    inst.channel.noise_power = spec.sigma2;
    inst.channel.bandwidth = spec.B;
    std::exponential_distribution<double> power_fade(1.0);
    for (std::size_t n = 0; n < spec.N; ++n) {
        for (std::size_t k = 0; k < spec.K; ++k) {
            const double p = power_fade(rng);
            const double fade = spec.fading == Fading::power ? p : std::sqrt(p);
            const double d = inst.distances[k];
            inst.channel.gains(k, n) = fade / (d * d);
        }
    }
    return inst;
}

namespace {

double number(const YAML::Node& node, const std::string& key) {
    try {
        return node.as<double>();
    } catch (const YAML::Exception&) {
        throw BadSpec("`" + key + "` must be a number");
    }
}

Range range(const YAML::Node& node, const std::string& key) {
    if (node.IsScalar()) {
        const double v = number(node, key);
        return {v, v};
    }
    if (!node.IsSequence() || node.size() != 2) throw BadSpec("`" + key + "` must be a number or [lo, hi]");
    return {number(node[0], key), number(node[1], key)};
}

std::size_t count(const YAML::Node& node, const std::string& key) {
    const double v = number(node, key);
    if (v < 0.0 || v != std::floor(v)) throw BadSpec("`" + key + "` must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

double power_watts(const YAML::Node& node) {
    if (!node.IsScalar()) throw BadSpec("`p_max` must be a scalar");
    const auto text = node.as<std::string>();
    std::istringstream is(text);
    double value = 0.0;
    if (!(is >> value)) throw BadSpec("`p_max` must start with a number");
    std::string unit;
    is >> unit;
    std::string rest;
    if (is >> rest) throw BadSpec("`p_max` has trailing text: " + text);
    if (unit.empty() || unit == "W") return value;
    if (unit == "dBm") return dbm_to_watts(value);
    throw BadSpec("`p_max` unit must be W or dBm, got " + unit);
}

}  // namespace

ScenarioSpec parse_scenario(const YAML::Node& node, const ScenarioSpec& base) {
    if (!node || !node.IsMap()) throw BadSpec("scenario must be a mapping");
    static const std::set<std::string> known = {
        "K", "N", "radius", "min_distance", "T", "F", "f_local", "R", "c", "p_max",
        "sigma2", "B", "kappa_local", "kappa_edge", "fading", "rng_seed"};
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!known.count(key)) throw BadSpec("unknown scenario key `" + key + "`");
    }

    ScenarioSpec s = base;
    if (node["K"]) s.K = count(node["K"], "K");
    if (node["N"]) s.N = count(node["N"], "N");
    if (node["radius"]) s.radius = number(node["radius"], "radius");
    if (node["min_distance"]) s.min_distance = number(node["min_distance"], "min_distance");
    if (node["T"]) s.T = number(node["T"], "T");
    if (node["F"]) s.F = number(node["F"], "F");
    if (node["f_local"]) s.f_local = range(node["f_local"], "f_local");
    if (node["R"]) s.R = range(node["R"], "R");
    if (node["c"]) s.c = range(node["c"], "c");
    if (node["p_max"]) s.p_max = power_watts(node["p_max"]);
    if (node["sigma2"]) s.sigma2 = number(node["sigma2"], "sigma2");
    if (node["B"]) s.B = number(node["B"], "B");
    if (node["kappa_local"]) s.kappa_local = number(node["kappa_local"], "kappa_local");
    if (node["kappa_edge"]) s.kappa_edge = number(node["kappa_edge"], "kappa_edge");
    if (node["fading"]) {
        const auto f = node["fading"].as<std::string>();
        if (f == "power") {
            s.fading = Fading::power;
        } else if (f == "amplitude") {
            s.fading = Fading::amplitude;
        } else {
            throw BadSpec("`fading` must be power or amplitude");
        }
    }
    if (node["rng_seed"]) s.rng_seed = static_cast<std::uint64_t>(count(node["rng_seed"], "rng_seed"));
    validate(s);
    return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    YAML::Node doc;
    try {
        doc = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw BadSpec("cannot read " + path.string() + ": " + e.what());
    }
    if (!doc.IsMap() || !doc["scenario"]) throw BadSpec(path.string() + ": missing `scenario` section");
    return parse_scenario(doc["scenario"]);
}

}  // namespace mecopt
