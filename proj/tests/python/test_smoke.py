import itertools

import pytest

import uca


def brute_force(table):
    best = None
    for labels in itertools.product(range(table.m), repeat=table.n):
        value = uca.value_of(list(labels), table)
        best = value if best is None else max(best, value)
    return best


def test_generate_and_solve():
    table = uca.generate_npd(5, 3, seed=7)
    assert table.values().shape == (32, 3)
    value, labels = uca.solve_exact(table)
    assert value == brute_force(table)
    assert uca.value_of(labels, table) == value
    assert uca.exact_value_to_go([-1] * 5, table) == value


def test_trap_mean_and_zero_noise():
    params = uca.TrapParams(sigma=0.0, delta=0.1, tau=4.0, eps=0.1)
    table = uca.generate_trap(6, 2, seed=1, params=params)
    assert table(0b111111, 1) == uca.trap_mean(6, params)
    assert uca.trap_mean(1) == 0.0


def test_budget_and_usage_errors():
    table = uca.generate_npd(6, 3, seed=2)
    with pytest.raises(uca.BudgetError):
        uca.solve_exact(table, budget=10)
    with pytest.raises(ValueError):
        uca.best_of_n(table, "beam", 10, [10])


def test_dataset_train_and_rollout(tmp_path):
    table = uca.generate_trap(6, 3, seed=3, params=uca.TrapParams(tau=3.0))
    pairs = uca.build_dataset(table, kappa=2, pairs_per_level=30, seed=4)
    assert len(pairs) == 60
    assert all(p.labels.count(-1) in (1, 2) for p in pairs)
    model, trace = uca.train(pairs[:50], pairs[50:], 6, 3, epochs=3, seed=5)
    assert len(trace) == 4
    model.save(tmp_path / "m.ucam")
    loaded = uca.MlpModel.load(tmp_path / "m.ucam")
    assert loaded.parameter_count == model.parameter_count

    optimum, _ = uca.solve_exact(table)
    for name in ("current", "random"):
        best, labels, checkpoints = uca.best_of_n(table, name, 50, [10, 50], seed=6)
        assert [c for c, _ in checkpoints] == [10, 50]
        assert checkpoints[0][1] <= checkpoints[1][1] == best <= optimum
        assert uca.value_of(labels, table) == best
    best, _, _ = uca.best_of_n(table, "neural", 20, [20], seed=6, model=loaded)
    assert best <= optimum


def test_positive_probability():
    table = uca.generate_npd(5, 2, seed=9, params=uca.NpdParams(mu=1.0, sigma=0.0))
    assert uca.estimate_positive_probability(table, 1000, seed=1) == (1.0, 1000)
