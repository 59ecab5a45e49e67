"""Quick check that the compiled extension loads and its main entry points work."""

import math

import retne


def main():
    cfg = retne.GenomeConfig(2, 1, 7)
    assert cfg.m == 10

    a = retne.Individual.random(cfg, seed=1)
    b = retne.Individual.random(cfg, seed=2)
    assert len(a.matrix) == cfg.m and len(a.matrix[0]) == cfg.m + 1
    assert a.fitness is None
    assert retne.distance(a, a) == 0.0
    assert math.isclose(retne.distance(a, b), retne.distance(b, a))

    mid = retne.binary_combine(a, b)
    assert math.isclose(retne.distance(a, mid), retne.distance(a, b) / 2, rel_tol=1e-9)
    assert math.isclose(retne.GOLDEN_MAJOR + retne.GOLDEN_MINOR, 1.0)
    gold = retne.golden_combine(a, b)
    assert math.isclose(retne.distance(a, gold), retne.GOLDEN_MINOR * retne.distance(a, b), rel_tol=1e-9)

    child = a.mutate(seed=3)
    assert retne.distance(a, child) > 0.0

    zero = retne.Individual([[0.0] * 4 for _ in range(3)], retne.GenomeConfig(2, 1, 0))
    assert zero.forward([1.0, 0.0]) == [0.5]
    assert retne.gate_fitness(zero, "xor") == 3.0

    x_dot, theta_dot = retne.cartpole_step([0.0, 0.0, 0.0, 0.0], True)[1::2]
    assert abs(x_dot - 0.19512) < 1e-5 and abs(theta_dot + 0.29268) < 1e-5
    assert retne.rastrigin([0.0, 0.0]) == 0.0

    run = retne.run_evolution("imply", "bi-neat", seed=0)
    assert run["solved"] and run["best_fitness"] >= 3.999
    print("imply bi-neat solved at generation", run["end_generation"])

    exp = retne.run_experiment("rastrigin", "gs-neat", iterations=5, base_seed=0)
    print("rastrigin gs-neat stats", exp["stats"])
    assert len(exp["records"]) == 5

    try:
        retne.run_evolution("nosuch")
    except ValueError as e:
        assert "expected one of" in str(e)
    else:
        raise AssertionError("unknown task accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
