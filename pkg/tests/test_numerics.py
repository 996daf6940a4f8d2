"""Integrator behavior, defect measurement, and the numerical
cross-validation of symmetry maps against their symbolic verdicts."""

import json

import pytest

from painleve4d.algebra import rational, variable
from painleve4d.degeneration import confluence, substitute_confluence
from painleve4d.numerics import (
    DEFAULT_BENCHMARK,
    CompiledEvaluator,
    ConstraintViolation,
    SingularStart,
    StepFailure,
    compile_field,
    integrate,
    integrate_field,
    load_benchmark,
    map_parameters,
    residual,
    run_benchmark,
    verify_backlund_numeric,
)
from painleve4d.systems import HamiltonianSystem, ParameterVector, make_hamiltonian
from painleve4d.transforms import equivalence_map, generator, generator_labels, identity_map

BENCH_PARAMS = DEFAULT_BENCHMARK["params"]
BENCH_STATE = DEFAULT_BENCHMARK["initial_state"]


def toy_system() -> HamiltonianSystem:
    return HamiltonianSystem(family="toy", hamiltonian=variable("p"),
                             pairs=(("q", "p"),), params=ParameterVector(symbols=()))


def test_constant_field_is_exact():
    traj = integrate(toy_system(), [], [0.25, 0.5], [1, 2], samples=101)
    worst = max(abs(s[0] - (0.25 + (t - 1))) for t, s in zip(traj.times, traj.states))
    assert worst <= 1e-12
    assert all(abs(s[1] - 0.5) == 0 for s in traj.states)


def test_benchmark_defect():
    traj = run_benchmark()
    assert len(traj.times) == DEFAULT_BENCHMARK["samples"]
    assert residual(make_hamiltonian("d4"), traj) <= 1e-8


def test_zero_field_zero_residual():
    still = HamiltonianSystem(family="toy", hamiltonian=rational(0),
                              pairs=(("q", "p"),), params=ParameterVector(symbols=()))
    traj = integrate(still, [], [0.3, 0.4], [1, 2], samples=51)
    # constant states; the stencil sums leave only rounding noise
    assert residual(still, traj) < 1e-12


def test_corrupted_sample_shows_up():
    traj = run_benchmark()
    defect_before = residual(make_hamiltonian("d4"), traj)
    i = len(traj.states) // 2
    bad = list(traj.states[i])
    bad[0] += 1e-3
    traj.states[i] = tuple(bad)
    assert residual(make_hamiltonian("d4"), traj) > 1e-2 > defect_before


def test_path_through_origin_fails():
    with pytest.raises(StepFailure) as info:
        integrate(make_hamiltonian("d4"), BENCH_PARAMS, BENCH_STATE, [1, -1],
                  samples=101)
    assert len(info.value.trajectory.times) >= 1


def test_singular_start():
    with pytest.raises(SingularStart):
        integrate(make_hamiltonian("d4"), BENCH_PARAMS, BENCH_STATE, [1e-12, 1])


def test_constraint_checked():
    with pytest.raises(ConstraintViolation):
        integrate(make_hamiltonian("d4"), [0.2, 0.2, 0.2, 0.2, 0.2],
                  BENCH_STATE, [1, 2])
    with pytest.raises(ConstraintViolation):
        integrate(make_hamiltonian("d4"), [0.125, 0.125], BENCH_STATE, [1, 2])


def test_unbound_symbol_rejected():
    with pytest.raises(ValueError, match="a4"):
        compile_field(make_hamiltonian("d4").vector_field(),
                      {"a0": 1, "a1": 1, "a2": 1, "a3": 1})


def test_reversible_path():
    traj = integrate(make_hamiltonian("d4"), BENCH_PARAMS, BENCH_STATE,
                     [1, 2, 1], samples=1001)
    gap = max(abs(a - complex(b)) for a, b in zip(traj.states[-1], BENCH_STATE))
    assert gap <= 10 * sum(traj.tol)


def test_tighter_tolerance_never_hurts():
    d4 = make_hamiltonian("d4")
    coarse = integrate(d4, BENCH_PARAMS, BENCH_STATE, [1, 2],
                       tol=(1e-6, 1e-6), samples=201)
    fine = integrate(d4, BENCH_PARAMS, BENCH_STATE, [1, 2],
                     tol=(1e-7, 1e-7), samples=201)
    assert residual(d4, fine) <= residual(d4, coarse)


@pytest.mark.parametrize("label", list(generator_labels("d4")))
def test_numeric_agrees_with_symbolic(label):
    rep = verify_backlund_numeric(generator("d4", label))
    assert rep.status == "pass", rep.witness


def test_identity_map_has_zero_gap():
    rep = verify_backlund_numeric(identity_map("d4"))
    assert rep.status == "pass"


def test_mutated_parameter_flips_verdict():
    rep = verify_backlund_numeric(generator("d4", "s1"), mutate=("a1", 1e-3))
    assert rep.status == "fail"
    assert "gap" in rep.witness


def test_equivalence_map_numeric():
    rep = verify_backlund_numeric(equivalence_map("p3-to-p3t"),
                                  initial_state=[0.3, 0.7],
                                  params=[0.25, 0.25, 0.25])
    assert rep.status == "pass", rep.witness


def test_parameter_transport():
    mapped = map_parameters(generator("d4", "s1"), {f"a{i}": complex(v) for i, v in
                                                    enumerate(BENCH_PARAMS)})
    assert mapped["a1"] == -complex(BENCH_PARAMS[1])
    assert mapped["a2"] == complex(BENCH_PARAMS[2]) + complex(BENCH_PARAMS[1])


def test_confluence_matches_direct_integration():
    # integrate the six-parameter system in the old frame, transport the
    # trajectory through the inverse substitution, and compare with a direct
    # integration of the substituted field at the same fixed epsilon
    eps_val = 0.1
    alphas = {f"a{i}": v for i, v in enumerate(BENCH_PARAMS)}
    consts = {**alphas, "eps": eps_val}
    sub = confluence()
    betas = {sym: img.eval_complex(consts) for sym, img in sub.param_map.items()}
    T_path = [1.0, 1.2]
    t_path = [-eps_val * T for T in T_path]
    new_x0 = [complex(v) for v in BENCH_STATE]
    point = {**consts, "T": T_path[0],
             **{cap: v for cap, v in zip(("X", "Y", "Z", "W"), new_x0)}}
    old_x0 = [sub.var_map[v].eval_complex(point) for v in ("x", "y", "z", "w")]
    old = integrate(make_hamiltonian("d51"), betas, old_x0, t_path, samples=201)
    new = integrate_field(substitute_confluence(), consts, new_x0, T_path,
                          samples=201, family="d51")
    assert len(old.times) == len(new.times)
    worst = 0.0
    for i in range(len(old.times)):
        back = {**consts, "t": old.times[i],
                **{v: s for v, s in zip(("x", "y", "z", "w"), old.states[i])}}
        for j, cap in enumerate(("X", "Y", "Z", "W")):
            worst = max(worst, abs(sub.inverse_var_map[cap].eval_complex(back)
                                   - new.states[i][j]))
    assert worst <= 1e-6


def test_trajectory_jsonl():
    traj = integrate(toy_system(), [], [0.0, 1.0], [1, 2], samples=5)
    lines = traj.to_jsonl().splitlines()
    assert len(lines) == len(traj.times)
    row = json.loads(lines[0])
    assert set(row) == {"t_re", "t_im", "state"}
    assert row["state"][1] == [1.0, 0.0]


def test_load_benchmark_merges_defaults():
    cfg = load_benchmark({"samples": 41})
    assert cfg["samples"] == 41
    assert cfg["family"] == "d4"


def test_compiled_evaluator_counts():
    ev = CompiledEvaluator([variable("x") / variable("t")], ("x",), "t", {})
    assert ev(2.0, (6.0,))[0] == 3.0
    assert ev.evals == 1
