"""Canonical coordinate charts in which the cataloged systems stay
polynomial, plus the machinery that certifies this: transport of a system
into a chart, an exact polynomiality decision, reconstruction of the chart
Hamiltonian from the transported field, and a random cross-check.

Charts carry explicit inverses (each is triangular in one canonical pair)
and are validated at construction: the images must satisfy the canonical
bracket pattern and the inverse must invert exactly.  The transported field
is obtained by the chain rule followed by elimination of the source
coordinates, so no Hamiltonian transformation law is assumed; when the
transported field is polynomial, the chart Hamiltonian is recovered by
integrating the field and checking the mixed-partial conditions.

The t-shear charts are transcribed with denominator z in the linear term
(w - 2*a4/z + t/z^2).  The printed source once shows w in that denominator,
which cannot be a canonical transformation: the bracket {z4, w4} would pick
up a 2*a4/w^2 term.  The construction-time bracket check enforces the
consistent reading.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .algebra import Polynomial, RationalExpression, rational, variable
from .reports import VerificationReport, clip_witness, report
from .systems import FieldComponents, HamiltonianSystem, make_hamiltonian
from .transforms import poisson_bracket, random_rational

PAIRS_4D = (("x", "y"), ("z", "w"))
_CAPITALS = ("X", "Y", "Z", "W")


class UnknownChart(KeyError):
    pass


class ChartConstructionError(ValueError):
    """The chart failed its bracket or inversion self-check."""


class EliminationFails(ValueError):
    """The chart inverse does not eliminate the source coordinates."""


class NotHamiltonian(ValueError):
    """A mixed-partial compatibility condition has nonzero residual."""


@dataclass(frozen=True)
class ChartTransform:
    """A canonical chart: images of the new coordinates in the source ones,
    with an explicit inverse written in capitalized placeholder names."""

    chart_set: str
    index: str
    forward: Mapping[str, RationalExpression]
    inverse: Mapping[str, RationalExpression]
    pairs: tuple[tuple[str, str], ...] = PAIRS_4D
    nested_on: Optional[str] = None

    def phase_vars(self) -> tuple[str, ...]:
        return tuple(v for pair in self.pairs for v in pair)

    def capitals(self) -> dict[str, str]:
        return dict(zip(self.phase_vars(), _CAPITALS))

    def __post_init__(self):
        phase = self.phase_vars()
        caps = self.capitals()
        partner = {pair: 1 for pair in self.pairs}
        for i, a in enumerate(phase):
            for b in phase[i + 1:]:
                bracket = poisson_bracket(self.forward[a], self.forward[b], self.pairs)
                if not bracket.equals(rational(partner.get((a, b), 0))):
                    raise ChartConstructionError(
                        f"{self.chart_set}/{self.index}: bracket {{{a}',{b}'}} "
                        f"= {bracket!r}")
        renamed = {caps[v]: self.forward[v] for v in phase}
        for v in phase:
            back = self.inverse[v].substitute(renamed)
            if not back.equals(variable(v)):
                raise ChartConstructionError(
                    f"{self.chart_set}/{self.index}: inverse fails on {v}")

    def to_obj(self) -> dict:
        return {
            "chart_set": self.chart_set,
            "index": self.index,
            "images": {v: e.to_obj() for v, e in sorted(self.forward.items())},
            "inverse": {v: e.to_obj() for v, e in sorted(self.inverse.items())},
            "nested_on": self.nested_on,
        }


def _chart(chart_set: str, index: str, forward: dict[str, RationalExpression],
           inverse: dict[str, RationalExpression],
           nested_on: Optional[str] = None,
           pairs: tuple[tuple[str, str], ...] = PAIRS_4D) -> ChartTransform:
    phase = tuple(v for pair in pairs for v in pair)
    full_forward = {v: forward.get(v, variable(v)) for v in phase}
    caps = dict(zip(phase, _CAPITALS))
    full_inverse = {v: inverse.get(v, variable(caps[v])) for v in phase}
    return ChartTransform(chart_set=chart_set, index=index, forward=full_forward,
                          inverse=full_inverse, pairs=pairs, nested_on=nested_on)


def compose_charts(outer: ChartTransform, inner: ChartTransform) -> ChartTransform:
    """The chart obtained by applying inner first, then outer on its output."""
    phase = inner.phase_vars()
    caps = inner.capitals()
    forward = {v: outer.forward[v].substitute(dict(inner.forward))
               for v in phase}
    inverse = {v: inner.inverse[v].substitute(
        {caps[u]: outer.inverse[u] for u in phase}) for v in phase}
    return ChartTransform(chart_set=outer.chart_set, index=outer.index,
                          forward=forward, inverse=inverse, pairs=inner.pairs,
                          nested_on=inner.index)


def _build_charts() -> dict[str, dict[str, ChartTransform]]:
    x, y, z, w, t = (variable(v) for v in "xyzwt")
    Xc, Yc, Zc, Wc = (variable(v) for v in _CAPITALS)
    a0, a1, a2, a3, a4 = (variable(f"a{i}") for i in range(5))

    def x_flip(index, offset_param, unit_shift):
        # X = 1/x, Y = -((y - shift)x + a)x with triangular inverse
        shift = rational(1) if unit_shift else rational(0)
        return _chart(
            "", index,
            {"x": 1 / x, "y": -((y - shift) * x + offset_param) * x},
            {"x": 1 / Xc, "y": shift - (Xc * Yc + offset_param) * Xc})

    def z_flip(index, offset_param, time_shift):
        shift = t if time_shift else rational(0)
        return _chart(
            "", index,
            {"z": 1 / z, "w": -z * ((w - shift) * z + offset_param)},
            {"z": 1 / Zc, "w": shift - (Zc * Wc + offset_param) * Zc})

    def y_shear(index):
        return _chart(
            "", index,
            {"y": y - 2 * a0 / x + 1 / x ** 2},
            {"y": Yc + 2 * a0 / Xc - 1 / Xc ** 2})

    def w_shear(index):
        return _chart(
            "", index,
            {"w": w - 2 * a4 / z + t / z ** 2},
            {"w": Wc + 2 * a4 / Zc - t / Zc ** 2})

    def gap_fold(index):
        # X = -((x - z)y - a2)y, Y = 1/y, W = w + y
        return _chart(
            "", index,
            {"x": -((x - z) * y - a2) * y, "y": 1 / y, "w": w + y},
            {"x": Zc + (a2 - Xc * Yc) * Yc, "y": 1 / Yc, "w": Wc - 1 / Yc})

    def rebrand(chart_set, c):
        return ChartTransform(chart_set=chart_set, index=c.index,
                              forward=c.forward, inverse=c.inverse,
                              pairs=c.pairs, nested_on=c.nested_on)

    sets: dict[str, dict[str, ChartTransform]] = {}

    d4_r1 = x_flip("r1", a1, unit_shift=False)
    d4 = {
        "r0": x_flip("r0", a0, unit_shift=True),
        "r1": d4_r1,
        "r2": compose_charts(gap_fold("r2"), d4_r1),
        "r3": z_flip("r3", a3, time_shift=False),
        "r4": z_flip("r4", a4, time_shift=True),
    }
    sets["d4"] = {k: rebrand("d4", c) for k, c in d4.items()}

    b4f = {
        "r0": y_shear("r0"),
        "r1": x_flip("r1", a1, unit_shift=False),
        "r2": gap_fold("r2"),
        "r3": z_flip("r3", a3, time_shift=False),
        "r4": z_flip("r4", a4, time_shift=True),
    }
    sets["b4f"] = {k: rebrand("b4f", c) for k, c in b4f.items()}

    b4s = {
        "r0": x_flip("r0", a0, unit_shift=True),
        "r1": x_flip("r1", a1, unit_shift=False),
        "r2": gap_fold("r2"),
        "r3": z_flip("r3", a3, time_shift=False),
        "r4": w_shear("r4"),
    }
    sets["b4s"] = {k: rebrand("b4s", c) for k, c in b4s.items()}

    d52_r1 = x_flip("r1", a1, unit_shift=False)
    d52 = {
        "r0": y_shear("r0"),
        "r1": d52_r1,
        "r2": compose_charts(gap_fold("r2"), d52_r1),
        "r3": z_flip("r3", a3, time_shift=False),
        "r4": w_shear("r4"),
    }
    sets["d52"] = {k: rebrand("d52", c) for k, c in d52.items()}

    probe = {
        "r0": x_flip("r0", a0, unit_shift=True),
        "r1": x_flip("r1", a1, unit_shift=False),
        "r2": gap_fold("r2"),
        "r3": z_flip("r3", a3, time_shift=False),
        "r4": z_flip("r4", a4, time_shift=True),
    }
    sets["open-probe"] = {k: rebrand("open-probe", c) for k, c in probe.items()}
    return sets


_CHARTS: Optional[dict[str, dict[str, ChartTransform]]] = None


def _charts() -> dict[str, dict[str, ChartTransform]]:
    global _CHARTS
    if _CHARTS is None:
        _CHARTS = _build_charts()
    return _CHARTS


CHART_SETS = ("d4", "b4f", "b4s", "d52", "open-probe")
CHART_INDICES = ("r0", "r1", "r2", "r3", "r4")


def chart(chart_set: str, index: str) -> ChartTransform:
    try:
        return _charts()[chart_set][index]
    except KeyError:
        raise UnknownChart(f"{chart_set}/{index}") from None


def chart_indices(chart_set: str) -> tuple[str, ...]:
    try:
        return tuple(_charts()[chart_set])
    except KeyError:
        raise UnknownChart(chart_set) from None


def identity_chart(pairs: tuple[tuple[str, str], ...] = PAIRS_4D) -> ChartTransform:
    return _chart("identity", "id", {}, {}, pairs=pairs)


def to_chart(system: HamiltonianSystem, c: ChartTransform) -> FieldComponents:
    """The system's field in chart coordinates: chain rule, then elimination
    of the source coordinates through the chart inverse."""
    field_src = system.vector_field()
    phase = c.phase_vars()
    if field_src.order != phase:
        raise EliminationFails(
            f"chart variables {phase} do not match system {field_src.order}")
    caps = c.capitals()
    inverse = dict(c.inverse)
    lower = {caps[v]: variable(v) for v in phase}
    comps = {}
    for v in phase:
        img = c.forward[v]
        total = img.diff("t")
        for u in phase:
            d = img.diff(u)
            if not d.is_zero():
                total = total + d * field_src[u]
        in_caps = total.substitute(inverse)
        leftover = in_caps.variables() & set(phase)
        if leftover:
            raise EliminationFails(
                f"{c.chart_set}/{c.index}: source variables {sorted(leftover)} survive")
        comps[v] = in_caps.substitute(lower)
    return FieldComponents(order=phase, components=comps, time=field_src.time)


def time_only_denominator(expr: RationalExpression,
                          phase: Sequence[str]) -> Optional[RationalExpression]:
    """Rewrite with denominator free of the phase variables when possible.

    Splits off the denominator's monomial content, cancels any phase part of
    it against the numerator, and clears the remaining factor by exact
    division; denominators in t (or the parameters) alone are acceptable as
    is.  Returns None when the expression is not a polynomial in the phase
    variables over the coefficient field."""
    phase_set = set(phase)
    den = expr.den
    if not (den.variables() & phase_set):
        return expr
    mono_exps = den.min_exponents()
    stripped = den.strip_monomial(mono_exps)
    phase_mono = {v: e for v, e in mono_exps.items() if v in phase_set}
    free_mono = {v: e for v, e in mono_exps.items() if v not in phase_set}
    num = expr.num
    if phase_mono:
        num_exps = num.min_exponents()
        if any(num_exps.get(v, 0) < e for v, e in phase_mono.items()):
            return None
        num = num.strip_monomial(phase_mono)
    if stripped.variables() & phase_set:
        quotient = num.exact_div(stripped)
        if quotient is None:
            return None
        num = quotient
        stripped = Polynomial.constant(1)
    tail = Polynomial.constant(1)
    for v, e in sorted(free_mono.items()):
        tail = tail * Polynomial({((v, e),): Fraction(1)})
    return RationalExpression(num, stripped * tail)


def _eliminate_params(system: HamiltonianSystem, expr: RationalExpression):
    elim = system.params.eliminate_first()
    return expr.substitute(elim) if elim else expr


def chart_field(system: HamiltonianSystem, c: ChartTransform) -> FieldComponents:
    pushed = to_chart(system, c)
    comps = {v: _eliminate_params(system, pushed[v]) for v in pushed.order}
    return FieldComponents(order=pushed.order, components=comps, time=pushed.time)


def verify_chart_polynomiality(system: HamiltonianSystem,
                               chart_set: str) -> list[VerificationReport]:
    """One report per chart of the set: every transported component must be
    polynomial in the chart phase variables over C(t)."""
    out = []
    for index in CHART_INDICES:
        c = chart(chart_set, index)
        start = time.monotonic()
        name = f"holomorphy/{chart_set}/{index}/{system.family}"
        try:
            transported = chart_field(system, c)
        except EliminationFails as exc:
            out.append(report(name, False, "exact", family=system.family,
                              witness=str(exc), started=start))
            continue
        bad = []
        for v in transported.order:
            if time_only_denominator(transported[v], transported.order) is None:
                bad.append(f"d{v}/dt has phase denominator "
                           f"{clip_witness(repr(transported[v].den))}")
        out.append(report(name, not bad, "exact", family=system.family,
                          witness="; ".join(bad) or None, started=start))
    return out


def reconstruct_hamiltonian(field: FieldComponents,
                            pairs: tuple[tuple[str, str], ...]) -> RationalExpression:
    """Recover K with dU/dt = dK/dV, dV/dt = -dK/dU from a polynomial field.

    Raises NotHamiltonian when a mixed-partial compatibility condition fails.
    The result carries no phase-free terms."""
    phase = [v for pair in pairs for v in pair]
    gradient = {}
    for u, v in pairs:
        gradient[v] = field[u]
        gradient[u] = -field[v]
    for v, g in list(gradient.items()):
        cleaned = time_only_denominator(g, phase)
        if cleaned is None:
            raise NotHamiltonian(
                f"dK/d{v} is not polynomial in the phase variables: "
                f"{clip_witness(repr(g.den))}")
        gradient[v] = cleaned
    for i, a in enumerate(phase):
        for b in phase[i + 1:]:
            residual = gradient[a].diff(b) - gradient[b].diff(a)
            if not residual.is_zero():
                raise NotHamiltonian(
                    f"d^2K/d{a}d{b} mismatch: {clip_witness(repr(residual))}")
    total = rational(0)
    for v in phase:
        residual = gradient[v] - total.diff(v)
        total = total + _integrate_poly(residual, v)
    total = _drop_phase_free(total, phase)
    for v in phase:
        if not total.diff(v).equals(gradient[v]):
            raise NotHamiltonian(f"integration failed to match d/d{v}")
    return total


def _integrate_poly(expr: RationalExpression, var: str) -> RationalExpression:
    bump = Polynomial({((var, 1),): Fraction(1)})
    num = Polynomial.zero()
    for mono, coeff in expr.num.terms.items():
        e = dict(mono).get(var, 0)
        num = num + Polynomial({mono: coeff / (e + 1)}) * bump
    return RationalExpression(num, expr.den)


def _drop_phase_free(expr: RationalExpression, phase: Sequence[str]) -> RationalExpression:
    keep = {m: c for m, c in expr.num.terms.items()
            if any(v in dict(m) for v in phase)}
    return RationalExpression(Polynomial(keep), expr.den)


def verify_chart_hamiltonians(system: HamiltonianSystem,
                              chart_set: str) -> list[VerificationReport]:
    """Reconstruction succeeds in every chart of the set and the recovered
    K is polynomial in the chart phase variables."""
    out = []
    for index in CHART_INDICES:
        c = chart(chart_set, index)
        start = time.monotonic()
        name = f"holomorphy/K/{chart_set}/{index}/{system.family}"
        try:
            transported = chart_field(system, c)
            k = reconstruct_hamiltonian(transported, c.pairs)
        except (EliminationFails, NotHamiltonian) as exc:
            out.append(report(name, False, "exact", family=system.family,
                              witness=clip_witness(str(exc)), started=start))
            continue
        ok = not (k.den.variables() & set(transported.order))
        out.append(report(name, ok, "exact", family=system.family,
                          witness=None if ok else f"K denominator {k.den!r}",
                          started=start))
    return out


def _upoly_divmod(num: list[Fraction], den: list[Fraction]):
    num = list(num)
    quotient = [Fraction(0)] * max(0, len(num) - len(den) + 1)
    while len(num) >= len(den) and any(num):
        while num and num[-1] == 0:
            num.pop()
        if len(num) < len(den):
            break
        factor = num[-1] / den[-1]
        shift = len(num) - len(den)
        quotient[shift] = factor
        for i, c in enumerate(den):
            num[shift + i] -= factor * c
        num.pop()
    while num and num[-1] == 0:
        num.pop()
    return quotient, num


def _specialize_univariate(poly: Polynomial, var: str,
                           point: Mapping[str, Fraction]) -> list[Fraction]:
    coeffs: dict[int, Fraction] = {}
    for mono, c in poly.terms.items():
        value = c
        degree = 0
        for v, e in mono:
            if v == var:
                degree = e
            else:
                value *= point[v] ** e
        coeffs[degree] = coeffs.get(degree, Fraction(0)) + value
    top = max(coeffs) if coeffs else 0
    return [coeffs.get(i, Fraction(0)) for i in range(top + 1)]


def polynomiality_random_check(system: HamiltonianSystem, chart_set: str,
                               seed: int = 0, samples: int = 4) -> VerificationReport:
    """Independent probabilistic route: specialize all but one phase variable
    at random and demand the univariate denominator divide the numerator."""
    start = time.monotonic()
    name = f"holomorphy/random/{chart_set}/{system.family}"
    rng = random.Random(seed)
    for index in CHART_INDICES:
        c = chart(chart_set, index)
        transported = chart_field(system, c)
        for v in transported.order:
            expr = transported[v]
            if not (expr.den.variables() & set(transported.order)):
                continue
            for kept in sorted(expr.den.variables() & set(transported.order)):
                done = 0
                tries = 0
                while done < samples:
                    tries += 1
                    if tries > 64 + samples:
                        return report(name, False, "random", family=system.family,
                                      witness=f"{index}: no usable specialization",
                                      seed=seed, samples=samples, started=start)
                    point = {u: random_rational(rng)
                             for u in (expr.variables() | {"t"}) - {kept}}
                    den_u = _specialize_univariate(expr.den, kept, point)
                    if not any(den_u):
                        continue
                    num_u = _specialize_univariate(expr.num, kept, point)
                    _, rem = _upoly_divmod(num_u, den_u)
                    if rem:
                        return report(
                            name, False, "random", family=system.family,
                            witness=f"{index}: d{v}/dt remainder in {kept}",
                            seed=seed, samples=samples, started=start)
                    done += 1
    return report(name, True, "random", family=system.family,
                  seed=seed, samples=samples, started=start)


def probe_assumption_a(system: Optional[HamiltonianSystem] = None) -> list[VerificationReport]:
    """Run the open chart list against a Hamiltonian and report outcomes.
    Nothing is asserted: whether any system fits all five charts is open."""
    if system is None:
        system = make_hamiltonian("d4")
    return verify_chart_polynomiality(system, "open-probe")
