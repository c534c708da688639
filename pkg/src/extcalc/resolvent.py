"""Krein-type resolvent formula for the dissipative extension.

For ``z`` off the spectrum of both the extension and the multiplication
operator,

    (B_kappa - z)^-1 h = h/(x - z) - p(z) <h, g_zbar> g_z,
    p(z) = 1 / (M(z) + i (kappa + 1)/(kappa - 1)),

with ``<h, g_zbar> = sum w h(x)/(x - z)``.  ``p`` has poles exactly at
the eigenvalues.  Self-adjoint boundary values ``|kappa| = 1`` are
admitted here (except ``kappa = 1``, the reference extension itself).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, EigenvalueError, NormalizationError
from .herglotz import HerglotzEvaluator, _upper, eval_M, eval_s
from .measure import Measure, resolvent_inner_product
from .model import (ModelVector, _atomic, _check_length, apply_hat_B, deficiency_element,
                    inner)
from .triple import DissipativeTriple

VIA_M = "via_M"
VIA_S = "via_s"

# relative size of the denominator below which z counts as an eigenvalue
_POLE_RTOL = 1e-10


@dataclass(frozen=True)
class Extension:
    """Quasi-self-adjoint extension with parameter ``|kappa| <= 1``, ``kappa != 1``."""

    measure: Measure
    kappa: complex

    def __post_init__(self):
        k = complex(self.kappa)
        if abs(k) > 1 + 1e-15:
            raise DomainError(f"|kappa| must not exceed 1, got {abs(k)}")
        if abs(k - 1) <= 1e-15:
            raise DomainError("kappa = 1 is the reference extension; its coefficient degenerates")
        if not self.measure.is_normalized:
            raise NormalizationError(self.measure.defect, self.measure.norm_tol)
        object.__setattr__(self, "kappa", k)


Ext = Union[DissipativeTriple, Extension]


def _ext(t) -> Ext:
    if isinstance(t, (DissipativeTriple, Extension)):
        return t
    mu, kappa = t
    return Extension(mu, kappa)


@dataclass(frozen=True)
class KreinCoefficient:
    """``p(z)`` plus the value from the independent Livšic route when available."""

    value: complex
    path: str
    cross: complex | None = None

    @property
    def path_gap(self) -> float:
        return math.nan if self.cross is None else abs(self.value - self.cross)


def krein_p(t, z: complex) -> KreinCoefficient:
    """Coefficient ``p(z)`` of the rank-one resolvent correction.

    Computed from ``M`` (reflected below the axis); for ``Im z > 0`` also
    from ``s`` as ``i ((s + 1)/(s - 1) - (kappa + 1)/(kappa - 1))^-1``.

    Raises
    ------
    EigenvalueError
        If ``M(z) + i (kappa + 1)/(kappa - 1)`` vanishes, i.e. ``z`` is an
        eigenvalue of the extension.
    """
    t = _ext(t)
    z = complex(z)
    if z.imag == 0:
        raise DomainError("the resolvent coefficient needs Im z != 0")
    k = t.kappa
    h = HerglotzEvaluator(t.measure)
    m = eval_M(h, z)
    c = 1j * (k + 1) / (k - 1)
    den = m + c
    if abs(den) <= _POLE_RTOL * max(1.0, abs(m), abs(c)):
        raise EigenvalueError(
            f"z = {z} is an eigenvalue of the extension: M(z) = {m} equals "
            f"i(1 + kappa)/(1 - kappa), where the characteristic function vanishes")
    cross = None
    if z.imag > 0:
        s = eval_s(h, z)
        cross = 1j / ((s + 1) / (s - 1) - (k + 1) / (k - 1))
    return KreinCoefficient(1 / den, VIA_M, cross)


def krein_q(t1, t2, z: complex) -> complex:
    """``p2(z) - p1(z)``: coefficient relating the resolvents of two extensions."""
    t1, t2 = _ext(t1), _ext(t2)
    if t1.measure != t2.measure:
        raise DomainError("the two extensions must share one measure")
    if t1.kappa == t2.kappa:
        krein_p(t1, z)  # still reject eigenvalues
        return 0j
    return krein_p(t2, z).value - krein_p(t1, z).value


def _cauchy_pairing(mu, h, z):
    # <h, g_zbar> = sum w h / (x - z)
    return complex(np.sum(mu.weights * h.values / (mu.locations - z)))


def apply_resolvent(t, z: complex, h: ModelVector) -> ModelVector:
    """``(B_kappa - z)^-1 h`` for an atomic measure."""
    t = _ext(t)
    mu = _atomic(t.measure)
    _check_length(mu, h)
    z = complex(z)
    g = deficiency_element(mu, z)
    p = krein_p(t, z).value
    return ModelVector(h.values * g.values - p * _cauchy_pairing(mu, h, z) * g.values)


def resolvent_residual(t, z: complex, h: ModelVector, u: ModelVector | None = None) -> float:
    """``||(B_kappa - z) u - h|| / ||h||`` (absolute when ``h = 0``)."""
    t = _ext(t)
    if u is None:
        u = apply_resolvent(t, z, h)
    r = (apply_hat_B(t, u) - complex(z) * u - h).norm(t.measure)
    nh = h.norm(t.measure)
    return r / nh if nh > 0 else r


def deficiency_norm(mu: Measure, z: complex) -> float:
    """``||g_z|| = (integral dmu / |x - z|^2)^(1/2)``."""
    return math.sqrt(resolvent_inner_product(mu, z, z).real)


def cal_M_via_resolvent(t: DissipativeTriple, z: complex) -> complex:
    """Dissipative Weyl-Titchmarsh function from resolvents of the adjoint.

    Uses ``(T z + I)(T - z)^-1 = z + (1 + z^2)(T - z)^-1`` for ``T`` the
    adjoint of the extension, and
    ``((T - z)^-1 g_+, g_+) = conj(((B_kappa - zbar)^-1 g_+, g_+))``; the
    resolvent at ``zbar`` is always defined since ``zbar`` lies in the
    lower half-plane.
    """
    z = _upper(z, "the dissipative Weyl-Titchmarsh function")
    mu = _atomic(t.measure)
    gp = deficiency_element(mu, 1j)
    w = apply_resolvent(t, z.conjugate(), gp)
    return z * gp.norm(mu) ** 2 + (1 + z * z) * inner(mu, w, gp).conjugate()
