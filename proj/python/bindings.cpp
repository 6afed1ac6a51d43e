#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mecopt/experiment.hpp"

namespace py = pybind11;
using namespace mecopt;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw ShapeMismatch("ragged gain matrix");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

std::vector<std::vector<double>> from_matrix(const Matrix& m) {
    std::vector<std::vector<double>> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
    return out;
}

std::vector<std::ptrdiff_t> owners_of(const Assignment& x) {
    std::vector<std::ptrdiff_t> out(x.subcarriers());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = x.owner(n);
    return out;
}

SolveSchedule schedule_of(std::size_t z_max, double precision, const std::string& dual_sign) {
    SolveSchedule s;
    s.z_max = z_max;
    s.precision = precision;
    s.ps.precision = precision;
    if (dual_sign == "paper") {
        s.ps.sign = DualSign::paper;
    } else if (dual_sign != "ascent") {
        throw BadSpec("dual_sign must be paper or ascent");
    }
    return s;
}

}  // namespace

PYBIND11_MODULE(mecopt, m) {
    m.doc() = "Energy-minimising partial offloading for OFDMA mobile edge computing";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<BadSpec>(m, "BadSpec", error.ptr());
    py::register_exception<Infeasible>(m, "Infeasible", error.ptr());
    py::register_exception<InfeasibleUser>(m, "InfeasibleUser", error.ptr());
    py::register_exception<NoFeasiblePrimal>(m, "NoFeasiblePrimal", error.ptr());
    py::register_exception<TooLarge>(m, "TooLarge", error.ptr());

    py::class_<UserTask>(m, "UserTask")
        .def(py::init([](double R, double c, double deadline, double f_local, double p_max, double kappa_local) {
                 return UserTask{R, c, deadline, f_local, p_max, kappa_local};
             }),
             py::arg("R"), py::arg("c"), py::arg("deadline"), py::arg("f_local"), py::arg("p_max"),
             py::arg("kappa_local") = 1e-24)
        .def_readwrite("R", &UserTask::R)
        .def_readwrite("c", &UserTask::c)
        .def_readwrite("deadline", &UserTask::deadline)
        .def_readwrite("f_local", &UserTask::f_local)
        .def_readwrite("p_max", &UserTask::p_max)
        .def_readwrite("kappa_local", &UserTask::kappa_local);

    py::class_<ChannelState>(m, "ChannelState")
        .def(py::init([](const std::vector<std::vector<double>>& gains, double noise_power, double bandwidth) {
                 return ChannelState{to_matrix(gains), noise_power, bandwidth};
             }),
             py::arg("gains"), py::arg("noise_power"), py::arg("bandwidth"))
        .def_property_readonly("gains", [](const ChannelState& c) { return from_matrix(c.gains); })
        .def_readwrite("noise_power", &ChannelState::noise_power)
        .def_readwrite("bandwidth", &ChannelState::bandwidth);

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init([](double F, double kappa_edge, double T, std::size_t N, std::size_t K) {
                 return SystemConfig{F, kappa_edge, T, N, K};
             }),
             py::arg("F"), py::arg("kappa_edge"), py::arg("T"), py::arg("N"), py::arg("K"))
        .def_readwrite("F", &SystemConfig::F)
        .def_readwrite("kappa_edge", &SystemConfig::kappa_edge)
        .def_readwrite("T", &SystemConfig::T)
        .def_readwrite("N", &SystemConfig::N)
        .def_readwrite("K", &SystemConfig::K);

    py::class_<Allocation>(m, "Allocation")
        .def_readonly("lambda_", &Allocation::lambda)
        .def_readonly("f_edge", &Allocation::f_edge)
        .def_readonly("phi", &Allocation::phi)
        .def_property_readonly("owners", [](const Allocation& a) { return owners_of(a.x); })
        .def("mean_offload_ratio", &Allocation::mean_offload_ratio);

    py::class_<Violation>(m, "Violation")
        .def_readonly("user", &Violation::user)
        .def_property_readonly("constraint", [](const Violation& v) { return to_string(v.constraint); })
        .def_readonly("slack", &Violation::slack);

    py::class_<TracePoint>(m, "TracePoint")
        .def_readonly("iteration", &TracePoint::iteration)
        .def_readonly("objective", &TracePoint::objective)
        .def_readonly("best_objective", &TracePoint::best_objective);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("algorithm", &SolveReport::algorithm)
        .def_readonly("total_energy", &SolveReport::total_energy)
        .def_readonly("feasible", &SolveReport::feasible)
        .def_readonly("violations", &SolveReport::violations)
        .def_readonly("trace", &SolveReport::trace)
        .def_readonly("allocation", &SolveReport::allocation)
        .def_readonly("outer_iterations", &SolveReport::outer_iterations)
        .def_readonly("notes", &SolveReport::notes)
        .def("mean_offload_ratio", &SolveReport::mean_offload_ratio);

    py::class_<OracleResult>(m, "OracleResult")
        .def_readonly("found", &OracleResult::found)
        .def_readonly("best_energy", &OracleResult::best_energy)
        .def_readonly("best_allocation", &OracleResult::best_allocation)
        .def_readonly("instances_enumerated", &OracleResult::instances_enumerated)
        .def_readonly("diagnosis", &OracleResult::diagnosis);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("K", &ScenarioSpec::K)
        .def_readwrite("N", &ScenarioSpec::N)
        .def_readwrite("radius", &ScenarioSpec::radius)
        .def_readwrite("min_distance", &ScenarioSpec::min_distance)
        .def_readwrite("T", &ScenarioSpec::T)
        .def_readwrite("F", &ScenarioSpec::F)
        .def_readwrite("p_max", &ScenarioSpec::p_max)
        .def_readwrite("sigma2", &ScenarioSpec::sigma2)
        .def_readwrite("B", &ScenarioSpec::B)
        .def_readwrite("kappa_local", &ScenarioSpec::kappa_local)
        .def_readwrite("kappa_edge", &ScenarioSpec::kappa_edge)
        .def_readwrite("rng_seed", &ScenarioSpec::rng_seed);

    py::class_<Instance>(m, "Instance")
        .def_readonly("tasks", &Instance::tasks)
        .def_readonly("channel", &Instance::channel)
        .def_readonly("config", &Instance::config)
        .def_readonly("distances", &Instance::distances);

    m.def("dbm_to_watts", &dbm_to_watts, py::arg("dbm"));
    m.def("generate", &generate, py::arg("spec"));
    m.def("load_scenario", &load_scenario, py::arg("path"));

    m.def("local_latency", &local_latency, py::arg("task"), py::arg("lambda_"));
    m.def("local_energy", &local_energy, py::arg("task"), py::arg("lambda_"));
    m.def("solve_lambda", &solve_lambda, py::arg("task"), py::arg("rate"), py::arg("f_edge"),
          py::arg("kappa_edge"), py::arg("deadline"), py::arg("user") = -1);
    m.def(
        "bisect_f",
        [](const UserTask& t, double lambda, double alpha, double gamma, const SystemConfig& cfg, double eps) {
            return bisect_f(t, lambda, alpha, gamma, cfg, eps);
        },
        py::arg("task"), py::arg("lambda_"), py::arg("alpha"), py::arg("gamma"), py::arg("config"),
        py::arg("epsilon") = 1e-10);

    m.def(
        "solve",
        [](const std::vector<UserTask>& tasks, const ChannelState& channel, const SystemConfig& config,
           std::size_t z_max, double precision, const std::string& dual_sign) {
            const auto schedule = schedule_of(z_max, precision, dual_sign);
            py::gil_scoped_release release;
            return solve(tasks, channel, config, schedule);
        },
        py::arg("tasks"), py::arg("channel"), py::arg("config"), py::arg("z_max") = 600,
        py::arg("precision") = 1e-5, py::arg("dual_sign") = "ascent");
    m.def(
        "solve_lc",
        [](const std::vector<UserTask>& tasks, const ChannelState& channel, const SystemConfig& config) {
            return solve_lc(tasks, channel, config);
        },
        py::arg("tasks"), py::arg("channel"), py::arg("config"));
    m.def(
        "solve_fr",
        [](const std::vector<UserTask>& tasks, const ChannelState& channel, const SystemConfig& config,
           double target) { return solve_fr(tasks, channel, config, FrPolicy{target}); },
        py::arg("tasks"), py::arg("channel"), py::arg("config"), py::arg("target") = 0.5);
    m.def(
        "solve_oracle",
        [](const std::vector<UserTask>& tasks, const ChannelState& channel, const SystemConfig& config) {
            py::gil_scoped_release release;
            return solve_oracle(tasks, channel, config);
        },
        py::arg("tasks"), py::arg("channel"), py::arg("config"));
    m.def(
        "evaluate",
        [](const std::vector<UserTask>& tasks, const ChannelState& channel, const SystemConfig& config,
           const Allocation& alloc) { return evaluate(tasks, channel, alloc, config); },
        py::arg("tasks"), py::arg("channel"), py::arg("config"), py::arg("allocation"));

    m.def(
        "run_sweep",
        [](const std::filesystem::path& file, std::optional<std::uint64_t> seed,
           std::optional<std::string> algorithms, std::size_t threads) {
            const auto spec = load_sweep(file);
            RunOptions options;
            options.schedule = parse_schedule(file);
            options.seed = seed;
            if (algorithms) options.algorithms = parse_algorithms(*algorithms);
            options.threads = threads;
            SweepResult result;
            {
                py::gil_scoped_release release;
                result = run_sweep(spec, options);
            }
            std::ostringstream os;
            write_csv(os, rows_of(result.records));
            return os.str();
        },
        py::arg("file"), py::arg("seed") = py::none(), py::arg("algorithms") = py::none(), py::arg("threads") = 0,
        "Runs a sweep file and returns its CSV text.");
}
