"""Catalog of the coupled Hamiltonian systems and their phase-space data.

Five four-dimensional families are cataloged, keyed d4, b4f, b4s, d52 and
d51, together with the two-dimensional building blocks p3, p3t and pv.
Each four-dimensional Hamiltonian is assembled from the two-dimensional
kernels with shifted parameter slots plus a coupling term, and the four
families with published right-hand sides carry an independently typed
transcription of those right-hand sides (REFERENCE_FIELDS) so the partial
derivatives and the transcription check each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable, Mapping, Optional, Sequence

from .algebra import (Polynomial, RationalExpression, rational, variable)

X, Y, Z, W, T = (variable(v) for v in "xyzwt")
Q, P = variable("q"), variable("p")
A = [variable(f"a{i}") for i in range(5)]
B = [variable(f"b{i}") for i in range(6)]
G = [variable(f"g{i}") for i in range(4)]


class UnknownFamily(KeyError):
    pass


class WindowEmpty(ValueError):
    pass


@dataclass(frozen=True)
class ParameterVector:
    """Parameter symbols with an optional affine normalization."""

    symbols: tuple[str, ...]
    constraint_coeffs: Optional[tuple[Fraction, ...]] = None
    constraint_value: Fraction = Fraction(1)

    def constraint_residual(self, values: Mapping[str, Fraction]) -> Fraction:
        if self.constraint_coeffs is None:
            return Fraction(0)
        total = -self.constraint_value
        for c, s in zip(self.constraint_coeffs, self.symbols):
            total += c * Fraction(values[s])
        return total

    def constraint_residual_complex(self, values: Mapping[str, complex]) -> complex:
        if self.constraint_coeffs is None:
            return 0j
        total = -complex(self.constraint_value)
        for c, s in zip(self.constraint_coeffs, self.symbols):
            total += complex(c) * complex(values[s])
        return total

    def eliminate_first(self) -> dict[str, RationalExpression]:
        """Expression for the first symbol forced by the normalization."""
        if self.constraint_coeffs is None:
            return {}
        expr = rational(self.constraint_value)
        for c, s in zip(self.constraint_coeffs[1:], self.symbols[1:]):
            expr = expr - rational(c) * variable(s)
        return {self.symbols[0]: expr / rational(self.constraint_coeffs[0])}

    def constraint_expression(self) -> Optional[RationalExpression]:
        if self.constraint_coeffs is None:
            return None
        expr = -rational(self.constraint_value)
        for c, s in zip(self.constraint_coeffs, self.symbols):
            expr = expr + rational(c) * variable(s)
        return expr


@dataclass(frozen=True)
class FieldComponents:
    """Right-hand sides of the evolution equations, keyed by phase variable."""

    order: tuple[str, ...]
    components: Mapping[str, RationalExpression]
    time: str = "t"

    def __getitem__(self, var: str) -> RationalExpression:
        return self.components[var]

    def to_obj(self) -> dict:
        return {"time": self.time,
                "components": {v: self.components[v].to_obj() for v in self.order}}


@dataclass(frozen=True)
class HamiltonianSystem:
    family: str
    hamiltonian: RationalExpression
    pairs: tuple[tuple[str, str], ...]
    params: ParameterVector
    time: str = "t"

    def phase_vars(self) -> tuple[str, ...]:
        out: list[str] = []
        for u, v in self.pairs:
            out.extend((u, v))
        return tuple(out)

    def vector_field(self) -> FieldComponents:
        comps: dict[str, RationalExpression] = {}
        for u, v in self.pairs:
            comps[u] = self.hamiltonian.diff(v)
            comps[v] = -self.hamiltonian.diff(u)
        return FieldComponents(order=self.phase_vars(), components=comps, time=self.time)

    def to_obj(self) -> dict:
        obj = {
            "family": self.family,
            "time": self.time,
            "pairs": [list(p) for p in self.pairs],
            "parameters": list(self.params.symbols),
            "hamiltonian": self.hamiltonian.to_obj(),
        }
        if self.params.constraint_coeffs is not None:
            obj["constraint"] = {
                "coeffs": {s: str(c) for s, c in
                           zip(self.params.symbols, self.params.constraint_coeffs)},
                "value": str(self.params.constraint_value),
            }
        return obj


# Two-dimensional kernels.  The middle parameter of each displayed triple is
# fixed by the normalization and does not occur in the formula itself.

def kernel_iii(q, p, t, c0, c2) -> RationalExpression:
    return (q ** 2 * p * (p - 1) + q * ((c0 + c2) * p - c0) + t * p) / t


def kernel_iii_shifted(q, p, t, c0, c2) -> RationalExpression:
    return (q ** 2 * p * (p - t) - q * ((-c0 + c2) * p + c0 * t) + p) / t


def kernel_v(q, p, t, c1, c2, c3) -> RationalExpression:
    return (q * (q - 1) * p * (p + t) - (c1 + c3) * q * p + c1 * p + c2 * t * q) / t


def _coeffs(*cs) -> tuple[Fraction, ...]:
    return tuple(Fraction(c) for c in cs)


_PARAMS_4D = tuple(f"a{i}" for i in range(5))
_PARAMS_6 = tuple(f"b{i}" for i in range(6))
_PARAMS_G3 = ("g0", "g1", "g2")


def _build_d4() -> HamiltonianSystem:
    h = (kernel_iii(X, Y, T, A[1], A[0])
         + kernel_iii_shifted(Z, W, T, A[3], 1 - A[4])
         - 2 * Y * W / T)
    return HamiltonianSystem(
        family="d4", hamiltonian=h, pairs=(("x", "y"), ("z", "w")),
        params=ParameterVector(_PARAMS_4D, _coeffs(1, 1, 2, 1, 1), Fraction(1)))


def _build_b4f() -> HamiltonianSystem:
    h = (kernel_iii_shifted(X, Y, T, A[1], 2 * A[0] + A[1])
         + kernel_iii_shifted(Z, W, T, A[3], 1 - A[4])
         + 2 * X * W * (X * Y + A[1]) / T)
    return HamiltonianSystem(
        family="b4f", hamiltonian=h, pairs=(("x", "y"), ("z", "w")),
        params=ParameterVector(_PARAMS_4D, _coeffs(2, 2, 2, 1, 1), Fraction(1)))


def _build_b4s() -> HamiltonianSystem:
    h = (kernel_iii(X, Y, T, A[1], A[0])
         + kernel_iii(Z, W, T, A[3], 1 - A[3] - 2 * A[4])
         + 2 * Y * Z * (Z * W + A[3]) / T)
    return HamiltonianSystem(
        family="b4s", hamiltonian=h, pairs=(("x", "y"), ("z", "w")),
        params=ParameterVector(_PARAMS_4D, _coeffs(1, 1, 2, 2, 2), Fraction(1)))


def _build_d52() -> HamiltonianSystem:
    h = (kernel_iii_shifted(X, Y, T, A[1], 2 * A[0] + A[1])
         + kernel_iii(Z, W, T, A[3], 1 - A[3] - 2 * A[4])
         - 2 * X * Z * (X * Y + A[1]) * (Z * W + A[3]) / T)
    return HamiltonianSystem(
        family="d52", hamiltonian=h, pairs=(("x", "y"), ("z", "w")),
        params=ParameterVector(_PARAMS_4D, _coeffs(1, 1, 1, 1, 1), Fraction(1, 2)))


def _build_d51() -> HamiltonianSystem:
    h = (kernel_v(X, Y, T, B[2] + B[5], B[1], B[2] + 2 * B[3] + B[4])
         + kernel_v(Z, W, T, B[5], B[3], B[4])
         + 2 * Y * Z * ((Z - 1) * W + B[3]) / T)
    return HamiltonianSystem(
        family="d51", hamiltonian=h, pairs=(("x", "y"), ("z", "w")),
        params=ParameterVector(_PARAMS_6, _coeffs(1, 1, 2, 2, 1, 1), Fraction(1)))


def _build_p3() -> HamiltonianSystem:
    return HamiltonianSystem(
        family="p3", hamiltonian=kernel_iii(Q, P, T, G[0], G[2]),
        pairs=(("q", "p"),),
        params=ParameterVector(_PARAMS_G3, _coeffs(1, 2, 1), Fraction(1)))


def _build_p3t() -> HamiltonianSystem:
    return HamiltonianSystem(
        family="p3t", hamiltonian=kernel_iii_shifted(Q, P, T, G[0], G[2]),
        pairs=(("q", "p"),),
        params=ParameterVector(_PARAMS_G3, _coeffs(1, 2, 1), Fraction(1)))


def _build_pv() -> HamiltonianSystem:
    return HamiltonianSystem(
        family="pv", hamiltonian=kernel_v(Q, P, T, G[1], G[2], G[3]),
        pairs=(("q", "p"),),
        params=ParameterVector(("g1", "g2", "g3"), None))


_BUILDERS: dict[str, Callable[[], HamiltonianSystem]] = {
    "d4": _build_d4,
    "b4f": _build_b4f,
    "b4s": _build_b4s,
    "d52": _build_d52,
    "d51": _build_d51,
    "p3": _build_p3,
    "p3t": _build_p3t,
    "pv": _build_pv,
}

FAMILIES = tuple(_BUILDERS)
FAMILIES_4D = ("d4", "b4f", "b4s", "d52", "d51")

_CACHE: dict[str, HamiltonianSystem] = {}


def make_hamiltonian(family: str) -> HamiltonianSystem:
    try:
        builder = _BUILDERS[family]
    except KeyError:
        raise UnknownFamily(family) from None
    if family not in _CACHE:
        system = builder()
        den = system.hamiltonian.den
        if den.variables() - {"t"}:
            raise AssertionError(f"{family}: Hamiltonian denominator is not a power of t")
        _CACHE[family] = system
    return _CACHE[family]


def toy_system() -> HamiltonianSystem:
    """Free drift on one canonical pair, used to exercise the integral search."""
    return HamiltonianSystem(family="toy", hamiltonian=P, pairs=(("q", "p"),),
                             params=ParameterVector((), None))


# Right-hand sides as published, retyped term by term (not derived), so the
# Hamiltonian assembly above and this transcription check one another.

def _reference_fields() -> dict[str, FieldComponents]:
    a0, a1, a2, a3, a4 = A
    d4 = {
        "x": (2 * X ** 2 * Y - X ** 2 + (a0 + a1) * X - 2 * W) / T + 1,
        "y": (-2 * X * Y ** 2 + 2 * X * Y - (a0 + a1) * Y + a1) / T,
        "z": (2 * Z ** 2 * W - T * Z ** 2 - (1 - a3 - a4) * Z + 1 - 2 * Y) / T,
        "w": (-2 * Z * W ** 2 + 2 * T * Z * W + (1 - a3 - a4) * W + a3 * T) / T,
    }
    b4f = {
        "x": (2 * X ** 2 * Y - T * X ** 2 - 2 * a0 * X + 1) / T + 2 * X ** 2 * W / T,
        "y": (-2 * X * Y ** 2 + 2 * T * X * Y + 2 * a0 * Y + a1 * T) / T
             - 2 * W * (2 * X * Y + a1) / T,
        "z": (2 * Z ** 2 * W - T * Z ** 2 - (1 - a3 - a4) * Z + 1) / T
             + 2 * X * (X * Y + a1) / T,
        "w": (-2 * Z * W ** 2 + 2 * T * Z * W + (1 - a3 - a4) * W + a3 * T) / T,
    }
    b4s = {
        "x": (2 * X ** 2 * Y - X ** 2 + (a0 + a1) * X + T) / T + 2 * Z * (Z * W + a3) / T,
        "y": (-2 * X * Y ** 2 + 2 * X * Y - (a0 + a1) * Y + a1) / T,
        "z": (2 * Z ** 2 * W - Z ** 2 + (1 - 2 * a4) * Z + T) / T + 2 * Y * Z ** 2 / T,
        "w": (-2 * Z * W ** 2 + 2 * Z * W - (1 - 2 * a4) * W + a3) / T
             - 2 * Y * (2 * Z * W + a3) / T,
    }
    d52 = {
        "x": (2 * X ** 2 * Y - T * X ** 2 - 2 * a0 * X + 1) / T
             - 2 * X ** 2 * Z * (Z * W + a3) / T,
        "y": (-2 * X * Y ** 2 + 2 * T * X * Y + 2 * a0 * Y + a1 * T) / T
             + 2 * Z * (Z * W + a3) * (2 * X * Y + a1) / T,
        "z": (2 * Z ** 2 * W - Z ** 2 + (1 - 2 * a4) * Z + T) / T
             - 2 * X * Z ** 2 * (X * Y + a1) / T,
        "w": (-2 * Z * W ** 2 + 2 * Z * W - (1 - 2 * a4) * W + a3) / T
             + 2 * X * (X * Y + a1) * (2 * Z * W + a3) / T,
    }
    order = ("x", "y", "z", "w")
    return {k: FieldComponents(order=order, components=v)
            for k, v in (("d4", d4), ("b4f", b4f), ("b4s", b4s), ("d52", d52))}


_REFERENCE: Optional[dict[str, FieldComponents]] = None


def reference_field(family: str) -> FieldComponents:
    global _REFERENCE
    if _REFERENCE is None:
        _REFERENCE = _reference_fields()
    try:
        return _REFERENCE[family]
    except KeyError:
        raise UnknownFamily(f"{family} has no transcribed right-hand sides") from None


def check_field_matches_display(family: str):
    """Compare the derived field against the retyped right-hand sides."""
    import time as _time
    from .reports import report
    start = _time.monotonic()
    system = make_hamiltonian(family)
    derived = system.vector_field()
    ref = reference_field(family)
    bad = []
    for v in derived.order:
        if not derived[v].equals(ref[v]):
            bad.append(v)
    return report(f"fields/{family}", not bad, "exact", family=family,
                  witness=f"mismatch in components {bad}" if bad else None,
                  started=start)


def degree_report(family: str) -> dict:
    """Observed total degree of the Hamiltonian in the phase variables."""
    system = make_hamiltonian(family)
    phase = set(system.phase_vars())
    return {
        "family": family,
        "phase_degree": system.hamiltonian.num.total_degree(phase),
        "time_denominator_degree": system.hamiltonian.den.total_degree({"t"}),
    }


# First integral search: linear algebra over Q on an ansatz
# sum c_{m,k} * m(phase) * t^k with deg m <= degree_bound, k in the window.

def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    matrix = [row[:] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(matrix)):
            if matrix[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        matrix[r], matrix[pivot] = matrix[pivot], matrix[r]
        inv = 1 / matrix[r][c]
        matrix[r] = [v * inv for v in matrix[r]]
        for i in range(len(matrix)):
            if i != r and matrix[i][c]:
                f = matrix[i][c]
                matrix[i] = [a - f * b for a, b in zip(matrix[i], matrix[r])]
        pivots.append(c)
        r += 1
        if r == len(matrix):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for ri, pc in enumerate(pivots):
            vec[pc] = -matrix[ri][fc]
        basis.append(vec)
    return basis


def _phase_monomials(phase: Sequence[str], bound: int) -> list[Polynomial]:
    out = [Polynomial.constant(1)]
    for deg in range(1, bound + 1):
        for combo in combinations_with_replacement(phase, deg):
            m = Polynomial.constant(1)
            for v in combo:
                m = m * Polynomial.variable(v)
            out.append(m)
    return out


def first_integral_search(system: HamiltonianSystem, degree_bound: int,
                          window: tuple[int, int]) -> list[RationalExpression]:
    """Basis of the kernel of F -> dF/dt + sum dF/du * u' + dF/dv * v'.

    The condition is imposed identically in phase variables, time and free
    parameters after substituting the family normalization.
    """
    lo, hi = window
    if lo > hi:
        raise WindowEmpty(f"t-power window {window} is empty")
    elim = system.params.eliminate_first()
    field = system.vector_field()
    comps = {v: field[v].substitute(elim) if elim else field[v]
             for v in field.order}
    shift = max(0, -lo)
    tpow = Polynomial.variable("t")
    phase = system.phase_vars()
    ansatz: list[RationalExpression] = []
    for mono in _phase_monomials(phase, degree_bound):
        for k in range(lo, hi + 1):
            num = mono * tpow ** (k + shift)
            ansatz.append(RationalExpression(num, tpow ** shift))
    columns: list[RationalExpression] = []
    for f in ansatz:
        lf = f.diff("t")
        for v in phase:
            lf = lf + f.diff(v) * comps[v]
        columns.append(lf)
    # all denominators are powers of t; rescale onto the common one
    tdegs = [col.den.total_degree({"t"}) for col in columns]
    for col in columns:
        if col.den.variables() - {"t"}:
            raise AssertionError("unexpected non-t denominator in integral search")
    top = max(tdegs, default=0)
    row_index: dict = {}
    col_vectors: list[dict[int, Fraction]] = []
    for col, d in zip(columns, tdegs):
        scaled = col.num * tpow ** (top - d)
        vec: dict[int, Fraction] = {}
        for m, c in scaled.terms.items():
            idx = row_index.setdefault(m, len(row_index))
            vec[idx] = c
        col_vectors.append(vec)
    nrows = len(row_index)
    rows = [[Fraction(0)] * len(ansatz) for _ in range(nrows)]
    for j, vec in enumerate(col_vectors):
        for i, c in vec.items():
            rows[i][j] = c
    basis_vecs = _nullspace(rows, len(ansatz))
    out = []
    for vec in basis_vecs:
        expr = rational(0)
        for coeff, f in zip(vec, ansatz):
            if coeff:
                expr = expr + rational(coeff) * f
        out.append(expr)
    return out


def _rref(dense: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(dense[0]) if dense else 0
    r = 0
    for c in range(n):
        pivot = None
        for i in range(r, len(dense)):
            if dense[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        dense[r], dense[pivot] = dense[pivot], dense[r]
        inv = 1 / dense[r][c]
        dense[r] = [v * inv for v in dense[r]]
        for i in range(len(dense)):
            if i != r and dense[i][c]:
                f = dense[i][c]
                dense[i] = [a - f * b for a, b in zip(dense[i], dense[r])]
        r += 1
    return [row for row in dense if any(row)]


def span_equal(found: Sequence[RationalExpression],
               expected: Sequence[RationalExpression]) -> bool:
    """Whether two lists of t-denominated polynomials span the same Q-space."""
    from .algebra import _mono_key
    tpow = Polynomial.variable("t")
    everything = list(found) + list(expected)
    if not everything:
        return True
    shift = max(e.den.total_degree({"t"}) for e in everything)
    scaled = [e.num * tpow ** (shift - e.den.total_degree({"t"})) for e in everything]
    monos = sorted({m for p in scaled for m in p.terms}, key=_mono_key)
    index = {m: i for i, m in enumerate(monos)}
    def dense(polys):
        rows = []
        for p in polys:
            row = [Fraction(0)] * len(index)
            for m, c in p.terms.items():
                row[index[m]] = c
            rows.append(row)
        return rows
    nf = len(found)
    return _rref(dense(scaled[:nf])) == _rref(dense(scaled[nf:]))
