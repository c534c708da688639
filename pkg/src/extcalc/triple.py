"""Dissipative triples described by their invariant ``(mu, kappa)``.

The characteristic function is the Möbius image

    S(z) = (s(z) - kappa) / (conj(kappa) s(z) - 1),

and the Weyl-Titchmarsh function of the dissipative extension is
``calM = i (1 + conj(kappa) s) / (1 - conj(kappa) s)``.  Both are computed
from ``s``; the resolvent-based route to ``calM`` lives in
:mod:`extcalc.resolvent`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Union

from .errors import DegeneracyError, DomainError, MeasureError, NormalizationError
from .herglotz import HerglotzEvaluator, _upper, eval_s
from .measure import NORM_TOL, Measure, _num, measure_from_spec

# |s - 1| below this is treated as a pole of the recovered M
_POLE_TOL = 1e-14


@dataclass(frozen=True)
class DissipativeTriple:
    """Measure plus von Neumann parameter ``kappa`` with ``|kappa| < 1``."""

    measure: Measure
    kappa: complex

    def __post_init__(self):
        k = complex(self.kappa)
        if not abs(k) < 1:
            raise DomainError(f"von Neumann parameter must satisfy |kappa| < 1, got {k}")
        if not self.measure.is_normalized:
            raise NormalizationError(self.measure.defect, self.measure.norm_tol)
        object.__setattr__(self, "kappa", k)

    @property
    def herglotz(self) -> HerglotzEvaluator:
        return HerglotzEvaluator(self.measure)

    @property
    def tags(self) -> tuple:
        return self.measure.tags

    def S(self, z):
        return eval_S(self, z)

    def cal_M(self, z):
        return eval_cal_M(self, z)

    def to_spec(self) -> dict:
        return {"measure": self.measure.to_spec(),
                "kappa": {"re": self.kappa.real, "im": self.kappa.imag}}


def _mobius_S(s, kappa):
    return (s - kappa) / (kappa.conjugate() * s - 1)


def eval_S(t: DissipativeTriple, z: complex) -> complex:
    """Characteristic function of the triple, ``Im z > 0``."""
    return _mobius_S(eval_s(t.herglotz, z), t.kappa)


def eval_cal_M(t: DissipativeTriple, z: complex) -> complex:
    """Weyl-Titchmarsh function of the dissipative extension, ``Im z > 0``."""
    z = _upper(z, "the dissipative Weyl-Titchmarsh function")
    if t.kappa == 0:
        return 1j
    ks = t.kappa.conjugate() * eval_s(t.herglotz, z)
    return 1j * (1 + ks) / (1 - ks)


def verify_linear_relation(t: DissipativeTriple, z: complex) -> float:
    """Residual of ``conj(k) S = ((|k|^2 - 1)/2i) calM + (|k|^2 + 1)/2``."""
    k2 = abs(t.kappa) ** 2
    lhs = t.kappa.conjugate() * eval_S(t, z)
    rhs = (k2 - 1) / 2j * eval_cal_M(t, z) + (k2 + 1) / 2
    return abs(lhs - rhs)


@dataclass(frozen=True)
class RangeDisk:
    """Closed disk in the upper half-plane containing every value of ``calM``."""

    center: complex
    radius: float

    @property
    def im_bounds(self) -> tuple:
        """Range of ``Im calM``: ``((1-|k|)/(1+|k|), (1+|k|)/(1-|k|))``."""
        return self.center.imag - self.radius, self.center.imag + self.radius

    def margin(self, w: complex) -> float:
        """``radius - |w - center|``; nonnegative inside."""
        return self.radius - abs(complex(w) - self.center)

    def contains(self, w: complex, tol: float = 1e-10) -> bool:
        return self.margin(w) >= -tol


def range_disk(kappa: complex) -> RangeDisk:
    k2 = abs(complex(kappa)) ** 2
    if not k2 < 1:
        raise DomainError(f"|kappa| must be below 1, got {abs(complex(kappa))}")
    return RangeDisk(1j * (1 + k2) / (1 - k2), 2 * abs(complex(kappa)) / (1 - k2))


# ---------------------------------------------------------------------------
# inverse direction


@dataclass(frozen=True)
class RecoveredInvariants:
    """``kappa``, ``s`` and ``M`` reconstructed from a characteristic function.

    ``samples`` holds ``(z, s(z), M(z))`` for the requested grid, with
    ``M = None`` where ``s(z) = 1``; those points are also listed in
    ``poles``.
    """

    kappa: complex
    s: Callable[[complex], complex]
    M: Callable[[complex], complex]
    samples: tuple = ()
    poles: tuple = ()


def recover_invariants(S_func: Callable[[complex], complex],
                       sample_grid: Iterable[complex] = ()) -> RecoveredInvariants:
    """Rebuild ``kappa = S(i)``, ``s`` and ``M`` from the characteristic function.

    ``M`` is continued to the lower half-plane by Schwarz reflection.

    Raises
    ------
    DomainError
        If ``|S(i)| >= 1``.
    """
    kappa = complex(S_func(1j))
    if not abs(kappa) < 1:
        raise DomainError(f"|S(i)| = {abs(kappa)} >= 1; not a characteristic function")

    def s(z):
        z = _upper(z, "s")
        S = complex(S_func(z))
        return (S - kappa) / (kappa.conjugate() * S - 1)

    def M(z):
        z = complex(z)
        if z.imag < 0:
            return M(z.conjugate()).conjugate()
        sv = s(z)
        if abs(sv - 1) <= _POLE_TOL:
            raise DegeneracyError(f"s(z) = 1 at z = {z}: M has a pole there")
        return -1j * (sv + 1) / (sv - 1)

    samples, poles = [], []
    for z in sample_grid:
        z = complex(z)
        sz = s(z if z.imag > 0 else z.conjugate())
        try:
            mz = M(z)
        except DegeneracyError:
            mz = None
            poles.append(z)
        samples.append((z, sz, mz))
    return RecoveredInvariants(kappa, s, M, tuple(samples), tuple(poles))


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    max_deviation: float
    argmax: complex


def equivalence_check(tA: DissipativeTriple, tB: DissipativeTriple, grid: Iterable[complex],
                      tol: float = 1e-10) -> EquivalenceResult:
    """Compare characteristic functions pointwise on ``grid``."""
    grid = [_upper(z, "the characteristic function") for z in grid]
    if not grid:
        raise DomainError("comparison grid is empty")
    dev = [abs(eval_S(tA, z) - eval_S(tB, z)) for z in grid]
    k = max(range(len(dev)), key=dev.__getitem__)
    return EquivalenceResult(dev[k] <= tol, dev[k], grid[k])


# ---------------------------------------------------------------------------
# file format


def parse_complex(value) -> complex:
    """Complex number from ``{"re": r, "im": r}``, a number, or ``"a+bi"`` text."""
    if isinstance(value, dict):
        return complex(_num(value.get("re", 0.0), "re"), _num(value.get("im", 0.0), "im"))
    if isinstance(value, str):
        text = value.strip().replace(" ", "").replace("i", "j")
        try:
            return complex(text)
        except ValueError:
            raise MeasureError(f"cannot parse {value!r} as a complex number") from None
    return complex(_num(value, "complex value"))


def load_triple(spec: Union[dict, str, Path], *, norm_tol: float = NORM_TOL,
                quad_tol: float | None = None) -> DissipativeTriple:
    """Parse ``{"measure": ..., "kappa": {"re": r, "im": r}}``."""
    if isinstance(spec, Path) or (isinstance(spec, str) and not spec.lstrip().startswith("{")):
        try:
            spec = Path(spec).read_text()
        except OSError as exc:
            raise MeasureError(f"cannot read triple file: {exc}") from None
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise MeasureError(f"triple file is not valid JSON: {exc}") from None
    if not isinstance(spec, dict) or "measure" not in spec or "kappa" not in spec:
        raise MeasureError("triple needs 'measure' and 'kappa' fields")
    mu = measure_from_spec(spec["measure"], norm_tol=norm_tol, quad_tol=quad_tol)
    if mu.defect > norm_tol:
        raise NormalizationError(mu.defect, norm_tol)
    return DissipativeTriple(mu, parse_complex(spec["kappa"]))
