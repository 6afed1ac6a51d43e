import csv
import io
import os
import pathlib

import pytest

import mecopt

CONFIGS = pathlib.Path(os.environ.get("MECOPT_CONFIGS", pathlib.Path(__file__).resolve().parents[2] / "configs"))


def small_instance(seed=1, K=2, N=3, T=4e-3):
    spec = mecopt.ScenarioSpec()
    spec.K, spec.N, spec.T, spec.rng_seed = K, N, T, seed
    return mecopt.generate(spec)


def test_dbm():
    assert mecopt.dbm_to_watts(30.0) == pytest.approx(1.0)
    assert mecopt.dbm_to_watts(27.8) == pytest.approx(0.60256, rel=1e-4)


def test_local_energy():
    task = mecopt.UserTask(R=1000, c=1000, deadline=2e-3, f_local=0.65e9, p_max=0.6)
    assert mecopt.local_energy(task, 0.0) == pytest.approx(0.4225)
    assert mecopt.local_latency(task, 0.0) == pytest.approx(1.5385e-3, rel=1e-4)


def test_bisection_root():
    task = mecopt.UserTask(R=1000, c=1000, deadline=2e-3, f_local=0.65e9, p_max=0.6)
    cfg = mecopt.SystemConfig(F=1e10, kappa_edge=1e-26, T=2e-3, N=1, K=1)
    assert mecopt.bisect_f(task, 0.5, 2e-6, 0.0, cfg) == pytest.approx(4.6416e6, rel=1e-4)


def test_solve_beats_baselines_and_oracle_gate():
    inst = small_instance()
    pa = mecopt.solve(inst.tasks, inst.channel, inst.config)
    lc = mecopt.solve_lc(inst.tasks, inst.channel, inst.config)
    oracle = mecopt.solve_oracle(inst.tasks, inst.channel, inst.config)
    assert pa.feasible
    assert pa.total_energy <= lc.total_energy
    assert oracle.found
    assert pa.total_energy <= 1.25 * oracle.best_energy
    assert len(pa.allocation.owners) == 3
    again = mecopt.evaluate(inst.tasks, inst.channel, inst.config, pa.allocation)
    assert again.total_energy == pytest.approx(pa.total_energy, rel=1e-12)


def test_errors_map_to_python():
    inst = small_instance(T=1e-6)
    with pytest.raises(mecopt.Infeasible):
        mecopt.solve(inst.tasks, inst.channel, inst.config)
    with pytest.raises(mecopt.TooLarge):
        big = small_instance(K=4, N=4)
        mecopt.solve_oracle(big.tasks, big.channel, big.config)
    with pytest.raises(mecopt.BadSpec):
        mecopt.load_scenario("/nonexistent.yaml")
    assert issubclass(mecopt.BadSpec, mecopt.Error)


def test_sweep_csv(tmp_path):
    sweep = tmp_path / "sweep.yaml"
    sweep.write_text(
        "sweep:\n  axis: users\n  values: [2, 3]\n  repetitions: 2\n  algorithms: [PA, LC]\n"
        "scenario:\n  N: 8\n  T: 3.0e-3\n"
    )
    text = mecopt.run_sweep(sweep, threads=1)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 2 * 2 * 2
    assert list(rows[0].keys())[0] == "seed"
    assert text == mecopt.run_sweep(sweep, threads=2)


def test_shipped_config_loads():
    spec = mecopt.load_scenario(CONFIGS / "table1.yaml")
    assert spec.K == 20 and spec.N == 512
