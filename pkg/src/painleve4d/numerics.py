"""Floating-point integration of the cataloged systems along complex time
paths, and numerical cross-validation of the symmetry maps as
solution-to-solution transforms.

Every numeric evaluator is generated from the exact rational expressions:
parameters fold into complex literals, the sparse numerator and denominator
are nested Horner-style in the remaining variables, and the result is
compiled once into a plain Python function.  Nothing is hand-transcribed.

The stepper is an embedded Runge-Kutta 5(4) pair with FSAL, parametrized
by arclength along each polyline segment.  Steps are clipped so every
requested dense sample lands on an accepted step.  Movable singularities
are handled by a denominator-magnitude guard plus step rejection; when the
step size underflows, the partial trajectory comes back attached to the
error.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .algebra import RationalExpression
from .reports import VerificationReport, report
from .systems import FieldComponents, HamiltonianSystem, make_hamiltonian
from .transforms import BirationalMap

DENOMINATOR_GUARD = 1e-8
DEFAULT_TOL = (1e-10, 1e-10)
DEFAULT_SAMPLES = 2001

DEFAULT_BENCHMARK: dict = {
    "family": "d4",
    "initial_state": [0.5, 1 / 3, 0.2, 1 / 7],
    "params": [0.125, 0.125, 0.125, 0.25, 0.25],
    "path": [1.0, 2.0],
    "tol": [1e-10, 1e-10],
    "samples": DEFAULT_SAMPLES,
}


class GuardTrip(ArithmeticError):
    """A denominator magnitude fell under the guard during evaluation."""


class SingularStart(ValueError):
    """The field cannot be evaluated at the requested starting point."""


class ConstraintViolation(ValueError):
    pass


class StepFailure(RuntimeError):
    """Step size underflow; carries the partial trajectory."""

    def __init__(self, message: str, trajectory: "Trajectory"):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass
class Trajectory:
    family: str
    times: list[complex]
    states: list[tuple[complex, ...]]
    params: dict[str, complex]
    tol: tuple[float, float]
    segments: list[tuple[int, int]]
    stats: dict = field(default_factory=dict)

    def to_jsonl(self) -> str:
        lines = []
        for t, s in zip(self.times, self.states):
            lines.append(json.dumps({
                "t_re": t.real, "t_im": t.imag,
                "state": [[c.real, c.imag] for c in s]}))
        return "\n".join(lines)


def _horner_src(terms: dict, names: Mapping[str, str]) -> str:
    """Nested-Horner Python expression for a sparse complex polynomial."""
    if not terms:
        return "0j"
    present = {v for m in terms for v, _ in m}
    if not present:
        ((_, c),) = terms.items()
        return repr(c)
    pivot = max(present,
                key=lambda u: max(dict(m).get(u, 0) for m in terms))
    groups: dict[int, dict] = {}
    for m, c in terms.items():
        md = dict(m)
        e = md.pop(pivot, 0)
        groups.setdefault(e, {})[tuple(sorted(md.items()))] = c
    name = names[pivot]
    expr = None
    prev = 0
    for e in sorted(groups, reverse=True):
        sub = _horner_src(groups[e], names)
        if expr is None:
            expr = sub
        else:
            gap = prev - e
            power = name if gap == 1 else f"{name}**{gap}"
            expr = f"({expr})*{power}+({sub})"
        prev = e
    if prev:
        power = name if prev == 1 else f"{name}**{prev}"
        expr = f"({expr})*{power}"
    return expr


def _fold_constants(expr_part, constants: Mapping[str, complex],
                    kept: set) -> dict:
    folded: dict = {}
    for mono, coeff in expr_part.terms.items():
        value = complex(coeff)
        rest = []
        for v, e in mono:
            if v in kept:
                rest.append((v, e))
            else:
                value *= constants[v] ** e
        key = tuple(rest)
        value = folded.get(key, 0j) + value
        if value:
            folded[key] = value
        else:
            folded.pop(key, None)
    return folded


class CompiledEvaluator:
    """Callable (t, state) -> tuple of complex values, one per expression,
    with a magnitude guard on every denominator."""

    def __init__(self, exprs: Sequence[RationalExpression], order: Sequence[str],
                 time_name: str, constants: Mapping[str, complex],
                 guard: float = DENOMINATOR_GUARD):
        self.order = tuple(order)
        self.guard = guard
        self.evals = 0
        kept = set(order) | {time_name}
        names = {v: f"_s{i}" for i, v in enumerate(order)}
        names[time_name] = "_t"
        missing = set()
        for e in exprs:
            missing |= e.variables() - kept - set(constants)
        if missing:
            raise ValueError(f"no value bound for {sorted(missing)}")
        lines = ["def _rhs(_t, _state, _guard):"]
        if order:
            unpack = ", ".join(names[v] for v in order)
            lines.append(f"    {unpack}{',' if len(order) == 1 else ''} = _state")
        outs = []
        for i, e in enumerate(exprs):
            num = _horner_src(_fold_constants(e.num, constants, kept), names)
            den = _horner_src(_fold_constants(e.den, constants, kept), names)
            lines.append(f"    _d{i} = {den}")
            lines.append(f"    if abs(_d{i}) < _guard: raise _trip({i})")
            lines.append(f"    _n{i} = {num}")
            outs.append(f"_n{i}/_d{i}")
        lines.append(f"    return ({', '.join(outs)}{',' if len(outs) == 1 else ''})")
        namespace = {"_trip": lambda i: GuardTrip(f"denominator {i}")}
        exec(compile("\n".join(lines), "<compiled-field>", "exec"), namespace)
        self._fn = namespace["_rhs"]

    def __call__(self, t: complex, state: Sequence[complex]) -> tuple:
        self.evals += 1
        return self._fn(t, state, self.guard)


def compile_field(f: FieldComponents, constants: Mapping[str, complex],
                  guard: float = DENOMINATOR_GUARD) -> CompiledEvaluator:
    return CompiledEvaluator([f[v] for v in f.order], f.order, f.time,
                             constants, guard)


# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
       187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _segment_sample_counts(nodes: Sequence[complex], samples: int) -> list[int]:
    lengths = [abs(nodes[i + 1] - nodes[i]) for i in range(len(nodes) - 1)]
    total = sum(lengths) or 1.0
    return [max(2, round(samples * ln / total)) for ln in lengths]


def integrate_field(f: FieldComponents, constants: Mapping[str, complex],
                    initial_state: Sequence[complex], path: Sequence,
                    tol: tuple[float, float] = DEFAULT_TOL,
                    samples: int = DEFAULT_SAMPLES,
                    guard: float = DENOMINATOR_GUARD,
                    family: str = "") -> Trajectory:
    """Adaptive RK5(4) along the polyline, dense samples on accepted steps."""
    nodes = [_as_complex(p) for p in path]
    if len(nodes) < 2:
        raise ValueError("path needs at least two nodes")
    rhs = compile_field(f, constants, guard)
    rtol, atol = float(tol[0]), float(tol[1])
    state = tuple(complex(c) for c in initial_state)
    traj = Trajectory(family=family, times=[nodes[0]], states=[state],
                      params=dict(constants), tol=(rtol, atol), segments=[])
    stats = {"steps": 0, "rejections": 0, "guard_rejections": 0}
    try:
        k_last = rhs(nodes[0], state)
    except GuardTrip as exc:
        raise SingularStart(f"field singular at start: {exc}") from None
    counts = _segment_sample_counts(nodes, samples)
    for seg, n_samples in enumerate(counts):
        t_a, t_b = nodes[seg], nodes[seg + 1]
        length = abs(t_b - t_a)
        unit = (t_b - t_a) / length if length else 0j
        seg_start = len(traj.times) - 1
        s = 0.0
        h = length / (n_samples - 1)
        h_min = max(length, 1.0) * 1e-13
        for i_target in range(1, n_samples):
            target = length * i_target / (n_samples - 1)
            while target - s > h_min:
                h_try = min(h, target - s)
                try:
                    trial, k_new, err = _dopri_step(rhs, t_a, unit, s, state,
                                                    h_try, k_last, rtol, atol)
                except GuardTrip:
                    stats["guard_rejections"] += 1
                    h = h_try * 0.5
                    if h < h_min:
                        traj.stats = stats
                        raise StepFailure("step underflow at denominator guard",
                                          traj) from None
                    continue
                if err <= 1.0:
                    s += h_try
                    state, k_last = trial, k_new
                    stats["steps"] += 1
                    grow = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                    h = h_try * grow
                else:
                    stats["rejections"] += 1
                    h = h_try * max(0.2, 0.9 * err ** -0.2)
                    if h < h_min:
                        traj.stats = stats
                        raise StepFailure("step underflow near singularity", traj)
            traj.times.append(t_a + target * unit)
            traj.states.append(state)
            s = target
        traj.segments.append((seg_start, len(traj.times) - 1))
    stats["evals"] = rhs.evals
    traj.stats = stats
    return traj


def _dopri_step(rhs, t_a: complex, unit: complex, s: float, state: tuple,
                h: float, k1: tuple, rtol: float, atol: float):
    n = len(state)
    step = h * unit
    ks = [k1]
    for stage in range(1, 7):
        acc = list(state)
        for j, a in enumerate(_A[stage]):
            if a:
                kj = ks[j]
                for i in range(n):
                    acc[i] += step * a * kj[i]
        ks.append(rhs(t_a + (s + _C[stage] * h) * unit, tuple(acc)))
    new = list(state)
    for j, b in enumerate(_B5):
        if b:
            kj = ks[j]
            for i in range(n):
                new[i] += step * b * kj[i]
    err = 0.0
    for i in range(n):
        e = 0j
        for j, d in enumerate(_E):
            if d:
                e += d * ks[j][i]
        sc = atol + rtol * max(abs(state[i]), abs(new[i]))
        err = max(err, abs(e) * h / sc)
    return tuple(new), ks[6], err


def _params_dict(system: HamiltonianSystem, params) -> dict[str, complex]:
    if isinstance(params, Mapping):
        out = {s: complex(params[s]) for s in system.params.symbols}
    else:
        values = list(params)
        if len(values) != len(system.params.symbols):
            raise ConstraintViolation(
                f"expected {len(system.params.symbols)} parameters")
        out = {s: complex(v) for s, v in zip(system.params.symbols, values)}
    return out


def integrate(system: HamiltonianSystem, params, initial_state: Sequence[complex],
              path: Sequence, tol: tuple[float, float] = DEFAULT_TOL,
              samples: int = DEFAULT_SAMPLES, guard: float = DENOMINATOR_GUARD,
              constraint_tol: float = 1e-12) -> Trajectory:
    values = _params_dict(system, params)
    residual_c = system.params.constraint_residual_complex(values)
    if abs(residual_c) > constraint_tol:
        raise ConstraintViolation(
            f"normalization violated by {abs(residual_c):.3e}")
    return integrate_field(system.vector_field(), values, initial_state, path,
                           tol=tol, samples=samples, guard=guard,
                           family=system.family)


_FD_INTERIOR = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))
_FD_LEFT0 = ((0, -25 / 12), (1, 48 / 12), (2, -36 / 12), (3, 16 / 12), (4, -3 / 12))
_FD_LEFT1 = ((-1, -3 / 12), (0, -10 / 12), (1, 18 / 12), (2, -6 / 12), (3, 1 / 12))


def _stencil(i: int, lo: int, hi: int):
    if hi - lo + 1 >= 5:
        if i - lo >= 2 and hi - i >= 2:
            return _FD_INTERIOR
        if i == lo:
            return _FD_LEFT0
        if i == lo + 1:
            return _FD_LEFT1
        if i == hi:
            return tuple((-o, -c) for o, c in _FD_LEFT0)
        return tuple((-o, -c) for o, c in _FD_LEFT1)
    if hi - lo + 1 >= 3:
        if i == lo:
            return ((0, -1.5), (1, 2.0), (2, -0.5))
        if i == hi:
            return ((0, 1.5), (-1, -2.0), (-2, 0.5))
        return ((-1, -0.5), (1, 0.5))
    return ((0, -1.0), (1, 1.0)) if i == lo else ((-1, -1.0), (0, 1.0))


def residual(system: HamiltonianSystem, traj: Trajectory,
             guard: float = DENOMINATOR_GUARD) -> float:
    """Defect proxy: max |finite-difference derivative - exact field|."""
    if not traj.times:
        raise ValueError("empty trajectory")
    rhs = compile_field(system.vector_field(), traj.params, guard)
    worst = 0.0
    for lo, hi in traj.segments:
        if hi <= lo:
            continue
        step = (traj.times[hi] - traj.times[lo]) / (hi - lo)
        if step == 0:
            continue
        for i in range(lo, hi + 1):
            fd = [0j] * len(traj.states[0])
            for offset, coeff in _stencil(i, lo, hi):
                sample = traj.states[i + offset]
                for c in range(len(fd)):
                    fd[c] += coeff * sample[c]
            exact = rhs(traj.times[i], traj.states[i])
            for c in range(len(fd)):
                worst = max(worst, abs(fd[c] / step - exact[c]))
    return worst


def compile_map(m: BirationalMap, source_params: Mapping[str, complex],
                guard: float = DENOMINATOR_GUARD):
    """Numeric point transform (t, state) -> (t', state') for a cataloged map."""
    phase = make_hamiltonian(m.family).phase_vars()
    exprs = [m.time_image] + [m.var_images[v] for v in phase]
    ev = CompiledEvaluator(exprs, phase, "t", source_params, guard)

    def apply(t: complex, state: Sequence[complex]):
        out = ev(t, state)
        return out[0], tuple(out[1:])

    return apply


def map_parameters(m: BirationalMap,
                   source_params: Mapping[str, complex]) -> dict[str, complex]:
    vec = [complex(source_params[s]) for s in m.param_symbols]
    out = {}
    for i, sym in enumerate(m.param_symbols_out):
        acc = complex(Fraction(m.param_offset[i]))
        for j, coeff in enumerate(m.param_matrix[i]):
            acc += complex(Fraction(coeff)) * vec[j]
        out[sym] = acc
    return out


_SOURCE_CACHE: dict = {}


def _cached_source(system: HamiltonianSystem, params: Mapping[str, complex],
                   initial_state, path, tol, samples) -> Trajectory:
    key = (system.family,
           tuple(sorted((k, v) for k, v in params.items())),
           tuple(complex(c) for c in initial_state),
           tuple(_as_complex(p) for p in path), tuple(tol), samples)
    if key not in _SOURCE_CACHE:
        _SOURCE_CACHE[key] = integrate(system, params, initial_state, path,
                                       tol=tol, samples=samples)
    return _SOURCE_CACHE[key]


def verify_backlund_numeric(m: BirationalMap,
                            system: Optional[HamiltonianSystem] = None,
                            initial_state: Optional[Sequence[complex]] = None,
                            params=None,
                            path: Optional[Sequence] = None,
                            tol: tuple[float, float] = DEFAULT_TOL,
                            samples: int = DEFAULT_SAMPLES,
                            mutate: Optional[tuple[str, float]] = None,
                            threshold: float = 1e-6) -> VerificationReport:
    """Integrate, transform pointwise, and independently integrate the image.

    Passes when the pointwise gap and both trajectory defects stay under the
    threshold.  `mutate` perturbs one target parameter after the map, which
    breaks the solution correspondence and must flip the verdict."""
    start = time.monotonic()
    if system is None:
        system = make_hamiltonian(m.family)
    bench = DEFAULT_BENCHMARK
    if initial_state is None:
        initial_state = bench["initial_state"]
    if params is None:
        params = bench["params"] if m.family == "d4" else None
    if params is None:
        raise ConstraintViolation("no benchmark parameters for this family")
    if path is None:
        path = bench["path"]
    name = f"numeric/{m.family}/{m.label}" + ("/mutated" if mutate else "")
    p_src = _params_dict(system, params)
    source = _cached_source(system, p_src, initial_state, path, tol, samples)
    p_tgt = map_parameters(m, p_src)
    constraint_tol = 1e-12
    if mutate:
        sym, delta = mutate
        p_tgt[sym] += delta
        constraint_tol = math.inf
    push = compile_map(m, p_src)
    try:
        t0_tgt, state0_tgt = push(source.times[0], source.states[0])
    except GuardTrip as exc:
        return report(name, False, "numeric", family=m.family,
                      witness=f"initial point singular under the map: {exc}",
                      started=start)
    target_system = make_hamiltonian(m.family_out)
    time_ev = CompiledEvaluator([m.time_image], (), "t", p_src)
    tgt_path = [time_ev(_as_complex(p), ())[0] for p in path]
    target = integrate(target_system, p_tgt, state0_tgt, tgt_path,
                       tol=tol, samples=samples,
                       constraint_tol=constraint_tol)
    gap = 0.0
    for i in range(len(source.times)):
        _, mapped = push(source.times[i], source.states[i])
        for a, b in zip(mapped, target.states[i]):
            gap = max(gap, abs(a - b))
    defect_src = residual(system, source)
    defect_tgt = residual(target_system, target)
    ok = gap <= threshold and defect_src <= threshold and defect_tgt <= threshold
    witness = (f"pointwise gap {gap:.3e}, defects "
               f"{defect_src:.3e}/{defect_tgt:.3e}")
    return report(name, ok, "numeric", family=m.family,
                  witness=witness, started=start)


def load_benchmark(source) -> dict:
    """Benchmark configuration from a dict, JSON text, or file path."""
    if isinstance(source, Mapping):
        cfg = dict(source)
    else:
        text = source
        if "\n" not in str(source) and not str(source).lstrip().startswith("{"):
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        cfg = json.loads(text)
    merged = dict(DEFAULT_BENCHMARK)
    merged.update(cfg)
    return merged


def run_benchmark(cfg: Optional[dict] = None) -> Trajectory:
    cfg = load_benchmark(cfg or DEFAULT_BENCHMARK)
    system = make_hamiltonian(cfg["family"])
    return integrate(system, cfg["params"],
                     [_as_complex(c) for c in cfg["initial_state"]],
                     cfg["path"], tol=tuple(cfg["tol"]),
                     samples=int(cfg["samples"]))
