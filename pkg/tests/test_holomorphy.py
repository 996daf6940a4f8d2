"""Chart catalog and transport: construction self-checks, the polynomiality
claims for the four family/chart-set pairs, Hamiltonian reconstruction from
the transported field, and the probabilistic cross-check."""

import pytest

from painleve4d.algebra import rational, variable
from painleve4d.holomorphy import (
    CHART_INDICES,
    CHART_SETS,
    ChartConstructionError,
    ChartTransform,
    EliminationFails,
    NotHamiltonian,
    UnknownChart,
    _chart,
    chart,
    chart_field,
    identity_chart,
    polynomiality_random_check,
    probe_assumption_a,
    reconstruct_hamiltonian,
    time_only_denominator,
    to_chart,
    verify_chart_hamiltonians,
    verify_chart_polynomiality,
)
from painleve4d.systems import FieldComponents, HamiltonianSystem, make_hamiltonian

CLAIMED = ("d4", "b4f", "b4s", "d52")

x, y, z, w, t = (variable(v) for v in "xyzwt")
X, Y = variable("X"), variable("Y")


def coupling_deleted_d4() -> HamiltonianSystem:
    base = make_hamiltonian("d4")
    return HamiltonianSystem(family="d4", hamiltonian=base.hamiltonian + 2 * y * w / t,
                             pairs=base.pairs, params=base.params)


def test_catalog_complete():
    for s in CHART_SETS:
        for i in CHART_INDICES:
            assert chart(s, i).index == i


def test_nested_flags():
    assert chart("d4", "r2").nested_on == "r1"
    assert chart("d52", "r2").nested_on == "r1"
    assert chart("b4f", "r2").nested_on is None
    assert chart("d4", "r1").nested_on is None


def test_nested_chart_composes_through_inversion():
    a1 = variable("a1")
    inner_y = -(y * x + a1) * x
    assert chart("d4", "r2").forward["y"].equals(1 / inner_y)


def test_unknown_chart():
    with pytest.raises(UnknownChart):
        chart("d4", "r9")
    with pytest.raises(UnknownChart):
        chart("e8", "r0")


def test_bad_bracket_rejected():
    with pytest.raises(ChartConstructionError):
        _chart("bad", "rx", {"x": 2 / x}, {"x": 2 / variable("X")})


def test_bad_inverse_rejected():
    with pytest.raises(ChartConstructionError):
        _chart("bad", "ry", {"y": y + x}, {"y": Y})


@pytest.mark.parametrize("family", CLAIMED)
def test_polynomial_in_every_chart(family):
    reports = verify_chart_polynomiality(make_hamiltonian(family), family)
    assert len(reports) == 5
    for r in reports:
        assert r.status == "pass", r.witness


@pytest.mark.parametrize("family", CLAIMED)
def test_reconstruction_polynomial_in_every_chart(family):
    for r in verify_chart_hamiltonians(make_hamiltonian(family), family):
        assert r.status == "pass", r.witness


def test_deleted_coupling_breaks_a_chart():
    reports = verify_chart_polynomiality(coupling_deleted_d4(), "d4")
    failed = [r for r in reports if r.status == "fail"]
    assert failed
    assert all(r.witness for r in failed)


def test_open_probe_reports_without_asserting():
    reports = probe_assumption_a()
    assert len(reports) == 5
    assert all(r.status in ("pass", "fail") for r in reports)


def test_identity_chart_is_neutral():
    system = make_hamiltonian("d4")
    source = system.vector_field()
    moved = to_chart(system, identity_chart())
    for v in source.order:
        assert moved[v].equals(source[v])


def test_to_chart_rejects_mismatched_phase_space():
    with pytest.raises(EliminationFails):
        to_chart(make_hamiltonian("p3"), chart("d4", "r1"))


def test_two_dimensional_chart_matches_target_system():
    # the inversion chart on (q, p) carries one 2d system onto the other
    q, p, g0 = variable("q"), variable("p"), variable("g0")
    Xc, Yc = variable("X"), variable("Y")
    c = _chart("p3", "r", {"q": 1 / q, "p": -q * (q * p + g0)},
               {"q": 1 / Xc, "p": -(Xc * Yc + g0) * Xc},
               pairs=(("q", "p"),))
    moved = to_chart(make_hamiltonian("p3"), c)
    target = make_hamiltonian("p3t").vector_field()
    for v in ("q", "p"):
        assert moved[v].equals(target[v])


def test_reconstruct_constant_field():
    field = FieldComponents(order=("x", "y"),
                            components={"x": rational(1), "y": rational(0)})
    k = reconstruct_hamiltonian(field, (("x", "y"),))
    assert k.equals(y)


def test_reconstruct_rejects_non_hamiltonian_field():
    field = FieldComponents(order=("x", "y"), components={"x": x, "y": y})
    with pytest.raises(NotHamiltonian):
        reconstruct_hamiltonian(field, (("x", "y"),))


def test_reconstruct_recovers_source_hamiltonian():
    system = make_hamiltonian("d4")
    k = reconstruct_hamiltonian(chart_field(system, identity_chart()), system.pairs)
    h = system.hamiltonian.substitute(system.params.eliminate_first())
    drift = k - h
    assert not (drift.variables() & {"x", "y", "z", "w"})


def test_time_only_denominator_cases():
    ok = time_only_denominator((x ** 2 - 1) / (x - 1), ("x", "y", "z", "w"))
    assert ok is not None and ok.equals(x + 1) and not ok.den.variables()
    assert time_only_denominator((x ** 2 + 1) / (x - 1), ("x", "y", "z", "w")) is None
    passthrough = (x + 1) / t ** 2
    assert time_only_denominator(passthrough, ("x", "y")).equals(passthrough)
    a0 = variable("a0")
    scaled = x / (a0 + 1)
    assert time_only_denominator(scaled, ("x", "y")).equals(scaled)
    assert time_only_denominator((y + 1) / (y * t), ("x", "y")) is None


def test_random_check_agrees_with_exact_verdicts():
    good = polynomiality_random_check(make_hamiltonian("d4"), "d4", seed=0, samples=3)
    assert good.status == "pass"
    bad = polynomiality_random_check(coupling_deleted_d4(), "d4", seed=0, samples=3)
    assert bad.status == "fail"
    assert bad.witness


def test_export_shape():
    obj = chart("b4s", "r4").to_obj()
    assert obj["chart_set"] == "b4s"
    assert obj["index"] == "r4"
    assert set(obj["images"]) == {"x", "y", "z", "w"}
    assert obj["nested_on"] is None


def test_chart_transform_frozen():
    c = chart("d4", "r0")
    with pytest.raises(AttributeError):
        c.index = "r7"
    assert isinstance(c, ChartTransform)
