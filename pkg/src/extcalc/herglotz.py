"""Weyl-Titchmarsh function ``M``, its Cayley transform ``s``, and probes of both.

``M`` is the Herglotz integral of a normalized measure; ``s = (M - i)/(M + i)``
maps the upper half-plane into the unit disk and vanishes at ``i``.  The
same ``s`` is also available from a ratio of deficiency-element inner
products, which never touches ``M`` and serves as an independent check.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import ConvergenceError, DegeneracyError, DomainError, NormalizationError
from .measure import Measure, herglotz_kernel_integral, resolvent_inner_product

#: verdicts of :func:`livsic_criterion_diagnostic`
CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
INCONCLUSIVE = "inconclusive"

DEFAULT_RADII = tuple(np.geomspace(1.0, 1e6, 13))
DEFAULT_RAYS = (math.pi / 6, math.pi / 3, math.pi / 2, 2 * math.pi / 3, 5 * math.pi / 6)
DEFAULT_ALPHAS = tuple(k * math.pi / 16 for k in range(16))
DEFAULT_EPSILONS = tuple(0.1 * 2.0 ** -k for k in range(21))

# log-log slope above which a sampled sequence counts as unbounded
_DIVERGENT_SLOPE = 0.5


@dataclass(frozen=True)
class HerglotzEvaluator:
    """Evaluator of ``M``, ``s`` for a fixed normalized measure."""

    measure: Measure

    def __post_init__(self):
        if not self.measure.is_normalized:
            raise NormalizationError(self.measure.defect, self.measure.norm_tol)

    @property
    def tags(self) -> tuple:
        return self.measure.tags

    def M(self, z):
        return eval_M(self, z)

    def s(self, z):
        return eval_s(self, z)

    def s_by_ratio(self, z):
        return eval_s_by_ratio(self, z)


def _evaluator(h) -> HerglotzEvaluator:
    return h if isinstance(h, HerglotzEvaluator) else HerglotzEvaluator(h)


def _upper(z, what) -> complex:
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"{what} is defined on the open upper half-plane only, got z = {z}")
    return z


def eval_M(h: HerglotzEvaluator, z: complex) -> complex:
    """Weyl-Titchmarsh function.

    Values below the real axis come from Schwarz reflection; real ``z`` is
    accepted off the support.
    """
    h = _evaluator(h)
    z = complex(z)
    if z.imag < 0:
        return herglotz_kernel_integral(h.measure, z.conjugate()).conjugate()
    return herglotz_kernel_integral(h.measure, z)


def eval_s(h: HerglotzEvaluator, z: complex) -> complex:
    """Livšic function ``(M - i)/(M + i)`` on the upper half-plane.

    There is no reflection rule for ``s``; ``Im z <= 0`` raises
    :class:`DomainError`.
    """
    z = _upper(z, "s")
    m = eval_M(h, z)
    return (m - 1j) / (m + 1j)


def eval_s_by_ratio(h: HerglotzEvaluator, z: complex) -> complex:
    """Livšic function from deficiency elements, without going through ``M``.

    ``s(z) = (z - i)/(z + i) * (g_z, g_-) / (g_z, g_+)`` with
    ``g_w(x) = 1/(x - w)`` and ``g_(+/-) = g_(+/-i)``.
    """
    h = _evaluator(h)
    z = _upper(z, "s")
    num = resolvent_inner_product(h.measure, z, -1j)
    den = resolvent_inner_product(h.measure, z, 1j)
    if abs(den) <= 1e-300 or abs(den) <= 1e-14 * abs(num):
        raise DegeneracyError(f"(g_z, g_+) vanishes numerically at z = {z}")
    return (z - 1j) / (z + 1j) * num / den


# ---------------------------------------------------------------------------
# asymptotic diagnostic


@dataclass(frozen=True)
class RayGrowth:
    """Samples of ``|z (s(z) - exp(2i alpha))|`` along the ray ``arg z = ray``."""

    alpha: float
    ray: float
    radii: tuple
    values: tuple
    behaviour: str  # "divergent", "bounded-decreasing" or "undecided"


@dataclass(frozen=True)
class CriterionReport:
    s_at_i: complex
    ray_growth: tuple
    verdict: str
    tags: tuple = ()
    notes: tuple = field(default=())

    def failing(self):
        """Ray samples that keep the verdict from being ``consistent``."""
        return [g for g in self.ray_growth if g.behaviour != "divergent"]


def _classify_growth(radii, values, tol):
    v = np.asarray(values, dtype=float)
    if np.all(v[1:] <= v[:-1] * (1 + 1e-9) + tol):
        return "bounded-decreasing"
    half = len(v) // 2
    r, w = np.log(np.asarray(radii[half:])), v[half:]
    if np.all(w > 0):
        slope = np.polyfit(r, np.log(w), 1)[0]
        if slope >= _DIVERGENT_SLOPE:
            return "divergent"
    return "undecided"


def livsic_criterion_diagnostic(
    h: Union[HerglotzEvaluator, Measure, Callable[[complex], complex]],
    rays: Sequence[float] = DEFAULT_RAYS,
    radii: Sequence[float] = DEFAULT_RADII,
    alphas: Iterable[float] | None = None,
    *,
    tol: float = 1e-9,
) -> CriterionReport:
    """Finite-sample probe of the two conditions characterizing Livšic functions.

    A Livšic function vanishes at ``i`` and ``z (s(z) - exp(2i alpha))``
    is unbounded as ``z -> oo`` nontangentially, for every real ``alpha``.
    A limit cannot be decided from samples, so the verdict is
    ``inconsistent`` only when ``s(i) != 0`` or a sampled sequence is
    bounded and non-increasing; ``consistent`` needs every sequence to
    grow with log-log slope of at least 1/2 over the outer half of the
    radii; anything else is ``inconclusive``.

    Besides ``alphas`` (default: 16 equispaced angles in ``[0, pi)``), each
    ray is also tested at the angle ``arg(s(z_far))/2`` where ``z_far`` is
    its outermost sample: that is the angle at which a bounded sequence
    would show up.

    Parameters
    ----------
    h : HerglotzEvaluator, Measure or callable
        A callable is taken to be ``s`` itself (useful for synthetic input).
    rays : angles in the open interval (0, pi)
    radii : increasing positive radii
    """
    if callable(h) and not isinstance(h, (HerglotzEvaluator, Measure)):
        s, tags = h, ()
    else:
        ev = _evaluator(h)
        s, tags = ev.s, ev.tags
    rays = [float(a) for a in rays]
    if not rays or any(not 0 < a < math.pi for a in rays):
        raise DomainError("ray angles must lie strictly between 0 and pi")
    radii = [float(r) for r in radii]
    if len(radii) < 3 or any(not r > 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be at least three increasing positive numbers")
    base_alphas = [float(a) % math.pi for a in (DEFAULT_ALPHAS if alphas is None else alphas)]

    s_i = complex(s(1j))
    growth = []
    for ray in rays:
        unit = cmath.exp(1j * ray)
        pts = [r * unit for r in radii]
        svals = [complex(s(z)) for z in pts]
        far = svals[-1]
        extra = [(cmath.phase(far) / 2) % math.pi] if abs(far) > 0.5 else []
        for alpha in sorted(set(base_alphas + extra)):
            e = cmath.exp(2j * alpha)
            vals = tuple(abs(z * (sv - e)) for z, sv in zip(pts, svals))
            growth.append(RayGrowth(alpha, ray, tuple(radii), vals,
                                    _classify_growth(radii, vals, tol)))

    notes = []
    if abs(s_i) > tol:
        verdict = INCONSISTENT
        notes.append(f"|s(i)| = {abs(s_i):.3e} is not zero")
    elif any(g.behaviour == "bounded-decreasing" for g in growth):
        verdict = INCONSISTENT
        notes.append("a sampled sequence is bounded and non-increasing")
    elif all(g.behaviour == "divergent" for g in growth):
        verdict = CONSISTENT
    else:
        verdict = INCONCLUSIVE
        notes.append("some sequence neither clearly diverges nor decreases over the sampled radii")
    return CriterionReport(s_i, tuple(growth), verdict, tuple(tags), tuple(notes))


# ---------------------------------------------------------------------------
# boundary values


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    error: float
    samples: tuple


def boundary_density(
    cal_m: Callable[[complex], complex],
    lam0: float,
    epsilon_schedule: Sequence[float] = DEFAULT_EPSILONS,
    *,
    tol: float = 1e-6,
    full_output: bool = False,
):
    """Density ``(1/pi) lim Im F(lam0 + i eps)`` of the measure behind a Herglotz function ``F``.

    One Richardson step assuming an expansion linear in ``eps``; the error
    estimate is the gap between the last two extrapolants.

    Raises
    ------
    ConvergenceError
        If that gap exceeds ``tol * max(1, |value|)``.
    """
    eps = [float(e) for e in epsilon_schedule]
    if len(eps) < 3:
        raise DomainError("need at least three epsilons")
    if any(not e > 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError("epsilon schedule must be positive and strictly decreasing")
    lam0 = float(lam0)
    v = [complex(cal_m(complex(lam0, e))).imag / math.pi for e in eps]
    # extrapolate v(e) = f + c e to e = 0 from consecutive pairs
    rich = [(e0 * v1 - e1 * v0) / (e0 - e1) for e0, e1, v0, v1 in zip(eps, eps[1:], v, v[1:])]
    value, err = rich[-1], abs(rich[-1] - rich[-2])
    if not math.isfinite(value) or err > tol * max(1.0, abs(value)):
        raise ConvergenceError(
            f"boundary density at {lam0} did not settle: last extrapolants {rich[-2]!r}, {rich[-1]!r}")
    est = DensityEstimate(value, err, tuple(zip(eps, v)))
    return est if full_output else value
