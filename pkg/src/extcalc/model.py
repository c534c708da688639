"""Functional model on L2(mu) for finitely many atoms.

A vector is its list of values at the atoms.  The symmetric operator is
multiplication by ``x`` restricted to vectors with ``l(f) = sum w f = 0``;
the dissipative extension adds ``g_+ - kappa g_-`` to that domain, where
``g_(+/-)(x) = 1/(x -/+ i)``.  On the added direction the adjoint acts by
``g_(+/-) -> +/- i g_(+/-)``, which gives the pointwise rule

    (B f)(x) = x f(x) - K (1 - kappa),

``K`` being the coefficient of ``g_+ - kappa g_-`` in ``f``.  Plain
multiplication is wrong on that direction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import DecompositionError, DomainError, MeasureError, SupportError
from .measure import Measure
from .triple import DissipativeTriple, parse_complex

DOMAIN_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class ModelVector:
    """Values of a function at the atoms of the ambient measure, in atom order."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise DomainError("model vector has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __add__(self, other):
        return ModelVector(self.values + _vals(other))

    def __sub__(self, other):
        return ModelVector(self.values - _vals(other))

    def __mul__(self, c):
        return ModelVector(self.values * complex(c))

    __rmul__ = __mul__

    def norm(self, mu: Measure) -> float:
        _check_length(mu, self)
        return math.sqrt(float(np.sum(mu.weights * np.abs(self.values) ** 2)))

    def to_spec(self) -> dict:
        return {"values": [{"re": float(v.real), "im": float(v.imag)} for v in self.values]}


def _vals(f):
    return f.values if isinstance(f, ModelVector) else np.asarray(f, dtype=complex)


def _atomic(mu: Measure) -> Measure:
    if not mu.is_atomic:
        raise DomainError("model vectors need a measure made of finitely many atoms")
    return mu


def _check_length(mu, f):
    if len(f) != len(mu.atoms):
        raise DomainError(f"vector has {len(f)} entries but the measure has {len(mu.atoms)} atoms")


def inner(mu: Measure, f: ModelVector, g: ModelVector) -> complex:
    """``sum w f conj(g)``."""
    _check_length(mu, f)
    _check_length(mu, g)
    return complex(np.sum(mu.weights * f.values * np.conj(g.values)))


def functional_l(mu: Measure, f: ModelVector) -> complex:
    """``l(f) = sum w f``, whose kernel is the domain of the symmetric operator."""
    _check_length(_atomic(mu), f)
    return complex(np.sum(mu.weights * f.values))


def deficiency_element(mu: Measure, z: complex) -> ModelVector:
    """``g_z(x) = 1/(x - z)`` at the atoms."""
    x = _atomic(mu).locations
    z = complex(z)
    if z.imag == 0 and np.any(x == z.real):
        raise SupportError(f"z = {z} is an atom location")
    return ModelVector(1.0 / (x - z))


def _scale(mu, f):
    return max(f.norm(mu), 1e-300) * max(1.0, float(np.max(np.abs(mu.locations))))


@dataclass(frozen=True)
class DomainTest:
    member: bool
    defect: float

    def __bool__(self):
        return self.member


def in_dom_dot_B(mu: Measure, f: ModelVector, tol: float | None = None) -> DomainTest:
    """Whether ``l(f) = 0`` within ``tol``.

    Default ``tol`` is ``1e-10 * ||f|| * max(1, max|x|)``.  Square
    integrability of ``x f`` is automatic for finitely many atoms.
    """
    d = abs(functional_l(mu, f))
    if tol is None:
        tol = DOMAIN_RTOL * _scale(mu, f)
    return DomainTest(d <= tol, d)


@dataclass(frozen=True)
class DomainDecomposition:
    """``f = f0 + K (g_+ - kappa g_-)`` with ``l(f0) = 0``."""

    f0: ModelVector
    K: complex
    residual: float


def extension_direction(t: DissipativeTriple) -> ModelVector:
    """``g_+ - kappa g_-``."""
    mu = _atomic(t.measure)
    x = mu.locations
    return ModelVector(1.0 / (x - 1j) - t.kappa / (x + 1j))


def decompose_dom_hat_B(t: DissipativeTriple, f: ModelVector) -> DomainDecomposition:
    """Split ``f`` along the domain of the dissipative extension.

    Raises
    ------
    DecompositionError
        If ``l(g_+ - kappa g_-)`` vanishes, which cannot happen for
        ``|kappa| < 1`` but is checked anyway.
    """
    mu = t.measure
    u = extension_direction(t)
    _check_length(mu, f)
    den = functional_l(mu, u)
    if abs(den) <= 1e-14 * u.norm(mu):
        raise DecompositionError(
            f"l(g_+ - kappa g_-) = {den} vanishes; the direction lies in the symmetric domain")
    K = functional_l(mu, f) / den
    f0 = f - K * u
    return DomainDecomposition(f0, K, abs(functional_l(mu, f0)))


def apply_hat_B(t: DissipativeTriple, f: ModelVector, tol: float | None = None) -> ModelVector:
    """Action of the dissipative extension: ``x f(x) - K (1 - kappa)``."""
    dec = decompose_dom_hat_B(t, f)
    if tol is None:
        tol = DOMAIN_RTOL * _scale(t.measure, f)
    if dec.residual > tol:
        raise DecompositionError(f"decomposition residual {dec.residual:.3e} exceeds {tol:.1e}")
    return ModelVector(t.measure.locations * f.values - dec.K * (1 - t.kappa))


def apply_B(mu: Measure, f: ModelVector) -> ModelVector:
    """Multiplication by ``x`` (the self-adjoint reference extension)."""
    _check_length(_atomic(mu), f)
    return ModelVector(mu.locations * f.values)


def eigenfunction_check(t: DissipativeTriple, z0: complex) -> float:
    """``||B g - z0 g|| / ||g||`` for ``g = 1/(x - z0)``; zero exactly at eigenvalues."""
    z0 = complex(z0)
    if not z0.imag > 0:
        raise DomainError(f"eigenvalue candidates lie in the upper half-plane, got {z0}")
    g = deficiency_element(t.measure, z0)
    r = apply_hat_B(t, g) - z0 * g
    return r.norm(t.measure) / g.norm(t.measure)


# ---------------------------------------------------------------------------
# file format


def vector_from_spec(spec, n_atoms: int | None = None) -> ModelVector:
    if not isinstance(spec, dict) or not isinstance(spec.get("values"), list):
        raise MeasureError("vector must be an object with a 'values' list")
    v = ModelVector([parse_complex(x) for x in spec["values"]])
    if n_atoms is not None and len(v) != n_atoms:
        raise MeasureError(f"vector has {len(v)} entries, measure has {n_atoms} atoms")
    return v


def load_vector(spec: Union[dict, str, Path], n_atoms: int | None = None) -> ModelVector:
    if isinstance(spec, Path) or (isinstance(spec, str) and not spec.lstrip().startswith("{")):
        try:
            spec = Path(spec).read_text()
        except OSError as exc:
            raise MeasureError(f"cannot read vector file: {exc}") from None
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise MeasureError(f"vector file is not valid JSON: {exc}") from None
    return vector_from_spec(spec, n_atoms)


def as_vector(values: Union[ModelVector, Sequence[complex]]) -> ModelVector:
    return values if isinstance(values, ModelVector) else ModelVector(values)
