#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <random>

#include "mecopt/scenario.hpp"
#include "support.hpp"

using namespace mecopt;

TEST_CASE("dBm conversion") {
    CHECK(dbm_to_watts(27.8) == doctest::Approx(0.60256).epsilon(1e-4));
    CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3));
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
    CHECK(ScenarioSpec{}.p_max == doctest::Approx(0.60256).epsilon(1e-4));
}

TEST_CASE("degenerate instance with no users") {
    ScenarioSpec s;
    s.K = 0;
    const auto inst = generate(s);
    CHECK(inst.tasks.empty());
    CHECK(inst.channel.users() == 0);
    CHECK(inst.config.K == 0);
}

TEST_CASE("same seed, same instance") {
    ScenarioSpec s;
    s.K = 5;
    s.N = 16;
    s.rng_seed = 42;
    const auto a = generate(s), b = generate(s);
    CHECK(a.channel.gains == b.channel.gains);
    CHECK(a.distances == b.distances);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(a.tasks[k].R == b.tasks[k].R);
        CHECK(a.tasks[k].c == b.tasks[k].c);
        CHECK(a.tasks[k].f_local == b.tasks[k].f_local);
    }
    s.rng_seed = 43;
    CHECK_FALSE(generate(s).channel.gains == a.channel.gains);
}

TEST_CASE("path loss at the rim") {
    // Users pinned to 30 m; unit-mean fading puts the average gain at 1/900.
    ScenarioSpec s;
    s.K = 1;
    s.N = 20000;
    s.radius = 30.0;
    s.min_distance = 30.0 - 1e-9;
    const auto inst = generate(s);
    CHECK(inst.distances[0] == doctest::Approx(30.0));
    double mean = 0.0;
    for (double g : inst.channel.gains.data()) mean += g;
    mean /= 20000.0;
    CHECK(mean == doctest::Approx(1.111e-3).epsilon(0.05));
}

TEST_CASE("parameters fall in their ranges") {
    ScenarioSpec s;
    s.K = 50;
    s.N = 8;
    const auto inst = generate(s);
    for (const auto& t : inst.tasks) {
        CHECK(t.R >= 1000);
        CHECK(t.R <= 1500);
        CHECK(t.c >= 1000);
        CHECK(t.c <= 1200);
        CHECK(t.f_local >= 0.6e9);
        CHECK(t.f_local <= 0.7e9);
        CHECK(t.deadline == s.T);
        CHECK(t.p_max == s.p_max);
    }
    for (double d : inst.distances) {
        CHECK(d >= 1.0);
        CHECK(d <= 30.0);
    }
}

namespace {

double ks_statistic(std::vector<double> xs, auto cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace

TEST_CASE("placement is uniform over the disk") {
    std::mt19937_64 rng(2718);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = sample_distance(rng, 30.0, 1.0);
    const double critical = 1.628 / std::sqrt(static_cast<double>(xs.size()));  // 1% level
    CHECK(ks_statistic(xs, [](double x) { return (x / 30.0) * (x / 30.0); }) < critical);
    CHECK(ks_statistic(xs, [](double x) { return (x * x - 1.0) / (900.0 - 1.0); }) < critical);
}

TEST_CASE("fading conventions have unit mean power") {
    for (auto fading : {Fading::power, Fading::amplitude}) {
        ScenarioSpec s;
        s.K = 1;
        s.N = 20000;
        s.radius = 1.0 + 1e-12;
        s.min_distance = 1.0;
        s.fading = fading;
        const auto inst = generate(s);
        double mean_power = 0.0;
        for (double g : inst.channel.gains.data()) {
            const double fade = g;  // d = 1
            mean_power += fading == Fading::power ? fade : fade * fade;
        }
        mean_power /= 20000.0;
        CHECK(mean_power == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("invalid specs") {
    auto bad = [](auto mutate) {
        ScenarioSpec s;
        mutate(s);
        CHECK_THROWS_AS(validate(s), BadSpec);
    };
    bad([](ScenarioSpec& s) { s.radius = 0.0; });
    bad([](ScenarioSpec& s) { s.T = -1.0; });
    bad([](ScenarioSpec& s) { s.F = 0.0; });
    bad([](ScenarioSpec& s) { s.R = {1500, 1000}; });
    bad([](ScenarioSpec& s) { s.c = {0, 10}; });
    bad([](ScenarioSpec& s) { s.sigma2 = 0.0; });
    bad([](ScenarioSpec& s) { s.min_distance = 40.0; });
    CHECK_NOTHROW(validate(ScenarioSpec{}));
}

TEST_CASE("scenario parsing") {
    SUBCASE("ranges, scalars and power units") {
        const auto node = YAML::Load(R"(
K: 4
N: 8
T: 3.0e-3
R: [1100, 1200]
c: 1000
p_max: "20 dBm"
fading: amplitude
rng_seed: 9
)");
        const auto s = parse_scenario(node);
        CHECK(s.K == 4);
        CHECK(s.N == 8);
        CHECK(s.T == 3e-3);
        CHECK(s.R.lo == 1100);
        CHECK(s.R.hi == 1200);
        CHECK(s.c.lo == 1000);
        CHECK(s.c.hi == 1000);
        CHECK(s.p_max == doctest::Approx(0.1));
        CHECK(s.fading == Fading::amplitude);
        CHECK(s.rng_seed == 9);
        CHECK(s.F == 1e10);
    }
    SUBCASE("watts") {
        CHECK(parse_scenario(YAML::Load("p_max: 0.5")).p_max == 0.5);
        CHECK(parse_scenario(YAML::Load("p_max: 0.5 W")).p_max == 0.5);
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(parse_scenario(YAML::Load("users: 4")), BadSpec);
        CHECK_THROWS_AS(parse_scenario(YAML::Load("K: -1")), BadSpec);
        CHECK_THROWS_AS(parse_scenario(YAML::Load("K: 2.5")), BadSpec);
        CHECK_THROWS_AS(parse_scenario(YAML::Load("p_max: 3 mW")), BadSpec);
        CHECK_THROWS_AS(parse_scenario(YAML::Load("fading: rician")), BadSpec);
        CHECK_THROWS_AS(parse_scenario(YAML::Load("[1, 2]")), BadSpec);
        CHECK_THROWS_AS(parse_scenario(YAML::Load("R: [1, 2, 3]")), BadSpec);
        CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.yaml"), BadSpec);
    }
}
