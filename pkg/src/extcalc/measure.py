"""Representing measures and the integrals every evaluator is built on.

A :class:`Measure` is a finite list of atoms, absolutely continuous pieces,
and two kinds of infinite atom families: periodic lattices (infinite mass)
and sequences accumulating at a point (finite mass).  The normalization

    integral of dmu(x) / (1 + x^2) = 1

is checked on construction of every measure that enters the function
calculus.

Integrals against density pieces use singularity subtraction: the density
is replaced by its value (and, near the evaluation point, its first-order
Taylor polynomial) whose contribution is integrated in closed form, and only
the smooth remainder goes to adaptive quadrature in the variable
``theta = arctan(x)``.  Without the subtraction a Lorentzian peak of width
``Im z`` is invisible to Gauss-Kronrod nodes once ``Im z`` gets small.
"""

from __future__ import annotations

import bisect
import cmath
import json
import math
import os
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import ClassVar, Sequence, Union

import numpy as np
from scipy import integrate

from .errors import MeasureError, NormalizationError, QuadratureError, SupportError

NORM_TOL = 1e-9
QUAD_TOL = 1e-10
SURROGATE_TAG = "computational surrogate"

_TAIL_REL = 1e-18
_MAX_SEQUENCE_TERMS = 1_000_000
_MAX_BREAKPOINTS = 40


def default_quad_tol() -> float:
    """Quadrature tolerance, overridable through ``EXTCALC_QUAD_TOL``."""
    env = os.environ.get("EXTCALC_QUAD_TOL")
    if env:
        try:
            value = float(env)
        except ValueError:
            raise MeasureError(f"EXTCALC_QUAD_TOL is not a number: {env!r}") from None
        if not value > 0:
            raise MeasureError("EXTCALC_QUAD_TOL must be positive")
        return value
    return QUAD_TOL


# ---------------------------------------------------------------------------
# density descriptors


@dataclass(frozen=True)
class ConstantDensity:
    value: float
    kind: ClassVar[str] = "constant"

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise MeasureError(f"constant density must be positive and finite, got {self.value}")

    def at(self, x: float) -> float:
        return self.value

    def slope(self, x: float) -> float:
        return 0.0

    def scaled(self, c: float) -> "ConstantDensity":
        return ConstantDensity(self.value * c)

    def infinite_mass_towards(self, side: int) -> bool:
        return True

    def breakpoints(self):
        return ()

    def to_spec(self):
        return {"type": self.kind, "value": self.value}


def _horner(coeffs, x):
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class RationalDensity:
    """``numerator(x) / denominator(x)``; coefficients highest degree first."""

    numerator: tuple
    denominator: tuple
    kind: ClassVar[str] = "rational"

    def __post_init__(self):
        num = np.trim_zeros(np.asarray(self.numerator, dtype=float), "f")
        den = np.trim_zeros(np.asarray(self.denominator, dtype=float), "f")
        if num.size == 0 or den.size == 0:
            raise MeasureError("rational density needs nonzero numerator and denominator")
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise MeasureError("rational density coefficients must be finite")
        object.__setattr__(self, "numerator", tuple(float(c) for c in num))
        object.__setattr__(self, "denominator", tuple(float(c) for c in den))

    @cached_property
    def _dnum(self):
        return tuple(np.polyder(np.asarray(self.numerator)).tolist()) or (0.0,)

    @cached_property
    def _dden(self):
        return tuple(np.polyder(np.asarray(self.denominator)).tolist()) or (0.0,)

    def at(self, x: float) -> float:
        return _horner(self.numerator, x) / _horner(self.denominator, x)

    def slope(self, x: float) -> float:
        n, d = _horner(self.numerator, x), _horner(self.denominator, x)
        dn, dd = _horner(self._dnum, x), _horner(self._dden, x)
        return (dn * d - n * dd) / (d * d)

    def scaled(self, c: float) -> "RationalDensity":
        return RationalDensity(tuple(c * v for v in self.numerator), self.denominator)

    @property
    def degree_gap(self) -> int:
        return (len(self.denominator) - 1) - (len(self.numerator) - 1)

    def infinite_mass_towards(self, side: int) -> bool:
        return self.degree_gap <= 1

    def breakpoints(self):
        return ()

    def to_spec(self):
        return {"type": self.kind, "numerator": list(self.numerator),
                "denominator": list(self.denominator)}


@dataclass(frozen=True)
class TabulatedDensity:
    """Samples joined by straight lines, held constant beyond the end samples."""

    x: tuple
    y: tuple
    interpolation: str = "linear"
    kind: ClassVar[str] = "table"

    def __post_init__(self):
        if self.interpolation != "linear":
            raise MeasureError(f"unsupported interpolation rule {self.interpolation!r}")
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        if len(x) < 2 or len(x) != len(y):
            raise MeasureError("tabulated density needs at least two (x, y) samples of equal length")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise MeasureError("tabulated abscissae must be strictly increasing")
        if any(v < 0 or not math.isfinite(v) for v in y):
            raise MeasureError("tabulated density values must be finite and nonnegative")
        if not all(math.isfinite(v) for v in x):
            raise MeasureError("tabulated abscissae must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def _segment(self, t):
        k = bisect.bisect_right(self.x, t) - 1
        return min(max(k, 0), len(self.x) - 2)

    def at(self, t: float) -> float:
        x, y = self.x, self.y
        if t <= x[0]:
            return y[0]
        if t >= x[-1]:
            return y[-1]
        k = self._segment(t)
        return y[k] + (y[k + 1] - y[k]) * (t - x[k]) / (x[k + 1] - x[k])

    def slope(self, t: float) -> float:
        x, y = self.x, self.y
        if t < x[0] or t >= x[-1]:
            return 0.0
        k = self._segment(t)
        return (y[k + 1] - y[k]) / (x[k + 1] - x[k])

    def scaled(self, c: float) -> "TabulatedDensity":
        return TabulatedDensity(self.x, tuple(c * v for v in self.y), self.interpolation)

    def infinite_mass_towards(self, side: int) -> bool:
        return (self.y[-1] if side > 0 else self.y[0]) > 0

    def breakpoints(self):
        return self.x

    def to_spec(self):
        return {"type": self.kind, "x": list(self.x), "y": list(self.y),
                "interpolation": self.interpolation}


Density = Union[ConstantDensity, RationalDensity, TabulatedDensity]


# ---------------------------------------------------------------------------
# measure components


@dataclass(frozen=True)
class Atom:
    location: float
    weight: float

    def __post_init__(self):
        if not math.isfinite(self.location):
            raise MeasureError(f"atom location must be finite, got {self.location}")
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise MeasureError(f"atom weight must be positive and finite, got {self.weight}")


@dataclass(frozen=True)
class DensityPiece:
    a: float
    b: float
    density: Density

    def __post_init__(self):
        if math.isnan(self.a) or math.isnan(self.b) or not self.a < self.b:
            raise MeasureError(f"density interval needs a < b, got ({self.a}, {self.b})")
        if self.a == math.inf or self.b == -math.inf:
            raise MeasureError("density interval endpoints are reversed infinities")
        self._check_nonnegative()

    def _check_nonnegative(self):
        d = self.density
        if isinstance(d, RationalDensity):
            if math.isinf(self.a) or math.isinf(self.b):
                if d.degree_gap < 0:
                    raise MeasureError("rational density grows at infinity; not normalizable")
            for r in np.roots(d.denominator):
                if abs(r.imag) <= 1e-12 * max(1.0, abs(r)) and self.a <= r.real <= self.b:
                    raise MeasureError(f"rational density has a pole at {r.real:g} inside its interval")
            theta = np.linspace(math.atan(self.a), math.atan(self.b), 1025)[1:-1]
            vals = np.array([d.at(math.tan(t)) for t in theta])
            if np.min(vals) < -1e-12 * max(1.0, np.max(np.abs(vals))):
                raise MeasureError("rational density takes negative values on its interval")
        # constants and tables validate themselves

    @property
    def theta_range(self):
        return math.atan(self.a), math.atan(self.b)

    def scaled(self, c: float) -> "DensityPiece":
        return DensityPiece(self.a, self.b, self.density.scaled(c))


@dataclass(frozen=True)
class Lattice:
    """Atoms of equal weight at ``offset + n * spacing`` for every integer ``n``."""

    spacing: float
    weight: float
    offset: float = 0.0

    def __post_init__(self):
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise MeasureError("lattice spacing must be positive")
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise MeasureError("lattice weight must be positive")
        if not math.isfinite(self.offset):
            raise MeasureError("lattice offset must be finite")

    def _arg(self, z):
        return math.pi * (self.offset - z) / self.spacing

    def cauchy_sum(self, z: complex) -> complex:
        """Symmetric sum of ``weight / (x_n - z)`` (Mittag-Leffler)."""
        return self.weight * math.pi / self.spacing * _cot(self._arg(z))

    def kernel_sum(self, z: complex) -> complex:
        ref = self.cauchy_sum(1j).real
        return self.cauchy_sum(z) - ref

    def normalization(self) -> float:
        return self.cauchy_sum(1j).imag

    def pair_sum(self, z: complex, wbar: complex) -> complex:
        """Sum of ``weight / ((x_n - z)(x_n - wbar))``."""
        scale = self.weight * math.pi / self.spacing
        a, b = self._arg(z), self._arg(wbar)
        d = z - wbar
        if abs(d) < 0.25 * self.spacing:
            # cot a - cot b = (1 + cot a cot b) tan(b - a), stable as b -> a
            x = math.pi * d / self.spacing
            ratio = (math.pi / self.spacing) * (cmath.tan(x) / x if x != 0 else 1.0)
            return scale * (1 + _cot(a) * _cot(b)) * ratio
        return scale * (_cot(a) - _cot(b)) / d

    def nearest_distance(self, x: float) -> float:
        """Distance from ``x`` to the lattice, ignoring a lattice point at ``x`` itself."""
        if self.contains(x):
            return self.spacing
        t = (x - self.offset) / self.spacing
        return abs(t - round(t)) * self.spacing

    def contains(self, x: float) -> bool:
        t = (x - self.offset) / self.spacing
        return abs(t - round(t)) * self.spacing <= 1e-12 * max(1.0, abs(x))

    def atoms_in(self, lo: float, hi: float):
        n0 = math.ceil((lo - self.offset) / self.spacing)
        n1 = math.floor((hi - self.offset) / self.spacing)
        return [Atom(self.offset + n * self.spacing, self.weight) for n in range(n0, n1 + 1)]

    def scaled(self, c: float) -> "Lattice":
        return replace(self, weight=self.weight * c)

    def to_spec(self):
        return {"spacing": self.spacing, "weight": self.weight, "offset": self.offset}


@dataclass(frozen=True)
class AtomSequence:
    """Atoms at ``center + scale * n**(-power)`` with weights ``weight * decay**(n-1)``, n >= 1.

    The sequence accumulates at ``center``; geometric weights keep the total
    mass finite and the truncation error below double precision.
    """

    center: float
    scale: float
    weight: float
    decay: float
    power: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.center) and math.isfinite(self.scale) and self.scale != 0):
            raise MeasureError("sequence center must be finite and scale nonzero")
        if not (self.weight > 0 and 0 < self.decay < 1 and self.power > 0):
            raise MeasureError("sequence needs weight > 0, 0 < decay < 1, power > 0")

    @cached_property
    def _terms(self):
        n_terms = math.ceil(math.log(_TAIL_REL * (1 - self.decay)) / math.log(self.decay)) + 1
        if n_terms > _MAX_SEQUENCE_TERMS:
            raise MeasureError("sequence weights decay too slowly for truncation")
        n = np.arange(1, n_terms + 1, dtype=float)
        locs = self.center + self.scale * n ** (-self.power)
        wts = self.weight * self.decay ** (n - 1)
        return locs, wts

    @property
    def locations(self):
        return self._terms[0]

    @property
    def weights(self):
        return self._terms[1]

    def location(self, n: int) -> float:
        return self.center + self.scale * n ** (-self.power)

    def nearest_distance(self, x: float) -> float:
        """Distance from ``x`` to the support, ignoring an atom sitting exactly at ``x``."""
        if x == self.center:
            return 0.0
        best = abs(x - self.center)
        t = (x - self.center) / self.scale
        candidates = {1}
        if t > 0:
            nstar = t ** (-1.0 / self.power)
            base = int(min(nstar, 1e15))
            candidates.update(k for k in (base - 1, base, base + 1, base + 2) if k >= 1)
        for k in candidates:
            d = abs(x - self.location(k))
            if d > 1e-12 * max(1.0, abs(x)):
                best = min(best, d)
        return best

    def contains(self, x: float) -> bool:
        if x == self.center:
            return True
        t = (x - self.center) / self.scale
        if t <= 0:
            return False
        n = round(t ** (-1.0 / self.power))
        return n >= 1 and abs(self.location(n) - x) <= 1e-12 * max(1.0, abs(x))

    def scaled(self, c: float) -> "AtomSequence":
        return replace(self, weight=self.weight * c)

    def to_spec(self):
        return {"center": self.center, "scale": self.scale, "weight": self.weight,
                "decay": self.decay, "power": self.power}


def _cot(w: complex) -> complex:
    """Cotangent that stays finite far from the real axis."""
    w = complex(w)
    if w.imag < 0:
        return _cot(w.conjugate()).conjugate()
    q = cmath.exp(2j * w)
    return 1j * (q + 1) / (q - 1)


# ---------------------------------------------------------------------------
# the measure


@dataclass(frozen=True)
class Measure:
    """Immutable measure description; see the module docstring."""

    atoms: tuple = ()
    pieces: tuple = ()
    lattices: tuple = ()
    sequences: tuple = ()
    declared_infinite: bool | None = None
    norm_tol: float = NORM_TOL
    quad_tol: float = field(default_factory=default_quad_tol)

    def __post_init__(self):
        for name in ("atoms", "pieces", "lattices", "sequences"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        locs = [a.location for a in self.atoms]
        if len(set(locs)) != len(locs):
            raise MeasureError("atom locations must be pairwise distinct")
        ordered = sorted(self.pieces, key=lambda p: p.a)
        for p, q in zip(ordered, ordered[1:]):
            if q.a < p.b:
                raise MeasureError(
                    f"density intervals ({p.a}, {p.b}) and ({q.a}, {q.b}) overlap")
        structural = self._structurally_infinite()
        if self.declared_infinite is None:
            object.__setattr__(self, "declared_infinite", structural)
        elif bool(self.declared_infinite) != structural:
            raise MeasureError(
                f"measure declared {'infinite' if self.declared_infinite else 'finite'} "
                f"but its components give {'infinite' if structural else 'finite'} total mass")
        object.__setattr__(self, "defect", abs(self.normalization_integral() - 1.0))

    def _structurally_infinite(self) -> bool:
        if self.lattices:
            return True
        for p in self.pieces:
            if p.b == math.inf and p.density.infinite_mass_towards(+1):
                return True
            if p.a == -math.inf and p.density.infinite_mass_towards(-1):
                return True
        return False

    # -- views

    @property
    def is_surrogate(self) -> bool:
        """True for finite measures, which sit outside the normalized infinite class."""
        return not self.declared_infinite

    @property
    def tags(self) -> tuple:
        return (SURROGATE_TAG,) if self.is_surrogate else ()

    @property
    def is_atomic(self) -> bool:
        """Finitely many atoms and nothing else."""
        return bool(self.atoms) and not (self.pieces or self.lattices or self.sequences)

    @property
    def is_normalized(self) -> bool:
        return self.defect <= self.norm_tol

    @cached_property
    def locations(self) -> np.ndarray:
        arr = np.array([a.location for a in self.atoms], dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def weights(self) -> np.ndarray:
        arr = np.array([a.weight for a in self.atoms], dtype=float)
        arr.setflags(write=False)
        return arr

    # -- derived measures

    def scaled(self, c: float) -> "Measure":
        return replace(
            self,
            atoms=tuple(Atom(a.location, a.weight * c) for a in self.atoms),
            pieces=tuple(p.scaled(c) for p in self.pieces),
            lattices=tuple(t.scaled(c) for t in self.lattices),
            sequences=tuple(s.scaled(c) for s in self.sequences),
        )

    def normalized(self) -> "Measure":
        total = self.normalization_integral()
        if not total > 0:
            raise MeasureError("cannot normalize a measure with zero mass")
        return self.scaled(1.0 / total)

    # -- geometry

    def on_support(self, z: complex) -> bool:
        """Whether ``z`` lies on the closed support (only possible for real ``z``)."""
        z = complex(z)
        if z.imag != 0:
            return False
        x = z.real
        if self.atoms and np.any(self.locations == x):
            return True
        if any(p.a <= x <= p.b for p in self.pieces):
            return True
        if any(t.contains(x) for t in self.lattices):
            return True
        return any(s.contains(x) for s in self.sequences)

    def _check_off_support(self, *points):
        for z in points:
            if self.on_support(z):
                raise SupportError(f"z = {complex(z)} lies on the support of the measure")

    # -- integrals

    def normalization_integral(self) -> float:
        total = float(np.sum(self.weights / (1.0 + self.locations ** 2))) if self.atoms else 0.0
        for p in self.pieces:
            total += _piece_normalization(p, self.quad_tol)
        for t in self.lattices:
            total += t.normalization()
        for s in self.sequences:
            total += float(np.sum(s.weights / (1.0 + s.locations ** 2)))
        return total

    def to_spec(self) -> dict:
        spec = {
            "atoms": [{"location": a.location, "weight": a.weight} for a in self.atoms],
            "pieces": [{"interval": [p.a, p.b], "density": p.density.to_spec()} for p in self.pieces],
            "infinite": bool(self.declared_infinite),
        }
        if self.lattices:
            spec["lattices"] = [t.to_spec() for t in self.lattices]
        if self.sequences:
            spec["sequences"] = [s.to_spec() for s in self.sequences]
        return spec


# ---------------------------------------------------------------------------
# piece integrals


def _clog(w: complex) -> complex:
    w = complex(w)
    if w.imag == 0:
        w = complex(w.real, 0.0)
    return cmath.log(w)


class _HerglotzKernel:
    """``1/(x - zeta) - x/(1 + x^2)``; primitive normalized to vanish at +inf."""

    def __init__(self, zeta):
        self.zeta = zeta
        self.anchor = zeta

    def primitive(self, lam):
        zeta = self.zeta
        if lam == math.inf:
            return 0j
        if lam == -math.inf:
            return -1j * math.pi if zeta.imag > 0 else 1j * math.pi
        return _clog(lam - zeta) - 0.5 * math.log1p(lam * lam)

    def moment(self, lam, x0):
        # primitive of (x - x0) * kernel, finite lam only
        zeta = self.zeta
        return (zeta - x0) * _clog(lam - zeta) + math.atan(lam) + 0.5 * x0 * math.log1p(lam * lam)

    def theta(self, s, c):
        # kernel * (1 + x^2) at x = s / c
        return (c + self.zeta * s) / (s - self.zeta * c)


class _SquareKernel:
    """``1/(x - zeta)^2``."""

    def __init__(self, zeta):
        self.zeta = zeta
        self.anchor = zeta

    def primitive(self, lam):
        if math.isinf(lam):
            return 0j
        return -1.0 / (lam - self.zeta)

    def moment(self, lam, x0):
        return _clog(lam - self.zeta) - (self.zeta - x0) / (lam - self.zeta)

    def theta(self, s, c):
        return 1.0 / (s - self.zeta * c) ** 2


def _log_at(lam, p):
    # log(lam - p) up to the additive log|lam| that cancels in differences
    if lam == math.inf:
        return 0j
    if lam == -math.inf:
        return -1j * math.pi if p.imag > 0 else 1j * math.pi
    return _clog(lam - p)


class _PairKernel:
    """``1/((x - z)(x - wbar))`` with ``z != wbar``."""

    def __init__(self, z, wbar, anchor):
        self.z, self.wbar = z, wbar
        self.anchor = anchor
        self.d = z - wbar

    def primitive(self, lam):
        return (_log_at(lam, self.z) - _log_at(lam, self.wbar)) / self.d

    def moment(self, lam, x0):
        z, wb = self.z, self.wbar
        return ((z - x0) * _clog(lam - z) - (wb - x0) * _clog(lam - wb)) / self.d

    def theta(self, s, c):
        return 1.0 / ((s - self.z * c) * (s - self.wbar * c))


def _quad_complex(fun, t0, t1, points, tol, what):
    """Adaptive Gauss-Kronrod on [t0, t1] for a complex integrand."""
    pts = sorted({p for p in points if t0 < p < t1})
    kwargs = dict(epsabs=0.1 * tol, epsrel=tol, limit=400, full_output=1)
    if pts:
        kwargs["points"] = pts
    value = 0j
    err = 0.0
    failed = False
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for part, sel in ((1.0, lambda t: fun(t).real), (1j, lambda t: fun(t).imag)):
            out = integrate.quad(sel, t0, t1, **kwargs)
            value += part * out[0]
            err += abs(out[1])
            failed |= len(out) > 3
    if failed and err > 10 * tol * max(1.0, abs(value)):
        raise QuadratureError(
            f"quadrature for {what} did not converge (error estimate {err:.2e})", err)
    return value, err


def _piece_normalization(piece: DensityPiece, tol: float) -> float:
    t0, t1 = piece.theta_range
    d = piece.density
    if isinstance(d, ConstantDensity):
        return d.value * (t1 - t0)
    pts = [math.atan(x) for x in d.breakpoints()[:_MAX_BREAKPOINTS]]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(lambda t: d.at(math.tan(t)), t0, t1,
                             epsabs=0.1 * tol, epsrel=tol, limit=400, full_output=1,
                             **({"points": [p for p in pts if t0 < p < t1]} if pts else {}))
    if len(out) > 3 and out[1] > 10 * tol * max(1.0, abs(out[0])):
        raise QuadratureError(f"normalization quadrature did not converge ({out[1]:.2e})", out[1])
    return out[0]


def _piece_integral(piece: DensityPiece, kernel, tol: float) -> complex:
    """Integral of the piece density against ``kernel``.

    The density value at the anchor is integrated in closed form over the
    whole piece; when the anchor sits above the interior, so is the linear
    Taylor term on a window around it.  The remainder is smooth.
    """
    a, b, f = piece.a, piece.b, piece.density
    anchor = kernel.anchor
    x0 = min(max(anchor.real, a), b)
    c0 = f.at(x0)
    value = c0 * (kernel.primitive(b) - kernel.primitive(a))
    if isinstance(f, ConstantDensity):
        return value

    # one-sided slopes, so that a kink at x0 (table node or piece end) is
    # removed on both sides
    if isinstance(f, TabulatedDensity):
        delta = 1e-9 * max(1.0, abs(x0))
        sl = f.slope(x0 - delta) if x0 > a else 0.0
        sr = f.slope(x0 + delta) if x0 < b else 0.0
    else:
        sl = sr = f.slope(x0)
    half = max(1.0, abs(anchor.imag))
    wl, wr = max(a, x0 - half), min(b, x0 + half)
    if sl != 0.0:
        value += sl * (kernel.moment(x0, x0) - kernel.moment(wl, x0))
    if sr != 0.0:
        value += sr * (kernel.moment(wr, x0) - kernel.moment(x0, x0))

    def remainder(t):
        s, c = math.sin(t), math.cos(t)
        lam = s / c
        p = c0
        if wl <= lam < x0:
            p += sl * (lam - x0)
        elif x0 <= lam <= wr:
            p += sr * (lam - x0)
        return (f.at(lam) - p) * kernel.theta(s, c)

    t0, t1 = piece.theta_range
    pts = [math.atan(x0), math.atan(wl), math.atan(wr)]
    # the remainder still varies on the scale Im(anchor) next to x0
    eps = abs(anchor.imag)
    while 0 < eps <= half / 4:
        pts += [math.atan(x0 - eps), math.atan(x0 + eps)]
        eps *= 16.0
    pts += [math.atan(x) for x in f.breakpoints()[:_MAX_BREAKPOINTS]]
    rest, _ = _quad_complex(remainder, t0, t1, pts, tol, f"density piece near z={anchor}")
    return value + rest


def _distance_to_piece(p: complex, piece: DensityPiece) -> float:
    x = min(max(p.real, piece.a), piece.b)
    return abs(p - x)


def _piece_pair(piece: DensityPiece, z: complex, wbar: complex, tol: float) -> complex:
    dz, dw = _distance_to_piece(z, piece), _distance_to_piece(wbar, piece)
    d = z - wbar
    if abs(d) <= 1e-7 * max(dz, dw):
        return _piece_integral(piece, _SquareKernel(0.5 * (z + wbar)), tol)
    near_z = dz < 0.1 * (1.0 + abs(z))
    near_w = dw < 0.1 * (1.0 + abs(wbar))
    if near_z and near_w:
        # two nearly singular points: split into two Herglotz transforms
        return (_piece_integral(piece, _HerglotzKernel(z), tol)
                - _piece_integral(piece, _HerglotzKernel(wbar), tol)) / d
    anchor = z if dz <= dw else wbar
    return _piece_integral(piece, _PairKernel(z, wbar, anchor), tol)


# ---------------------------------------------------------------------------
# public operations


def _atom_kernel(locs, wts, z):
    return complex(np.sum(wts * (1.0 + locs * z) / ((locs - z) * (1.0 + locs * locs))))


def herglotz_kernel_integral(mu: Measure, z: complex) -> complex:
    """Integral of ``1/(x - z) - x/(1 + x^2)`` against ``mu``.

    Raises
    ------
    SupportError
        If ``z`` is real and lies on the closed support.
    QuadratureError
        If a density piece integral fails to converge.
    """
    z = complex(z)
    mu._check_off_support(z)
    total = _atom_kernel(mu.locations, mu.weights, z) if mu.atoms else 0j
    for p in mu.pieces:
        total += _piece_integral(p, _HerglotzKernel(z), mu.quad_tol)
    for t in mu.lattices:
        total += t.kernel_sum(z)
    for s in mu.sequences:
        total += _atom_kernel(s.locations, s.weights, z)
    return total


def resolvent_inner_product(mu: Measure, z: complex, w: complex) -> complex:
    """Inner product of ``1/(x - z)`` and ``1/(x - w)`` in L2(mu).

    Linear in the first slot, conjugate-linear in the second:
    ``integral dmu(x) / ((x - z) * conj(x - w))``.
    """
    z, w = complex(z), complex(w)
    mu._check_off_support(z, w)
    wbar = w.conjugate()
    total = 0j
    if mu.atoms:
        x, m = mu.locations, mu.weights
        total += complex(np.sum(m / ((x - z) * (x - wbar))))
    for p in mu.pieces:
        total += _piece_pair(p, z, wbar, mu.quad_tol)
    for t in mu.lattices:
        total += t.pair_sum(z, wbar)
    for s in mu.sequences:
        total += complex(np.sum(s.weights / ((s.locations - z) * (s.locations - wbar))))
    return total


def normalization_defect(mu: Measure) -> float:
    """``|integral dmu/(1 + x^2) - 1|``; computed once at construction."""
    return mu.defect


# ---------------------------------------------------------------------------
# construction helpers and file format


def _num(value, what):
    if isinstance(value, bool) or value is None:
        raise MeasureError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return math.inf
        if text in ("-inf", "-infinity"):
            return -math.inf
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise MeasureError(f"{what}: cannot parse {value!r} as a number") from None
    if math.isnan(out):
        raise MeasureError(f"{what}: NaN is not allowed")
    return out


def _density_from_spec(spec) -> Density:
    if not isinstance(spec, dict) or "type" not in spec:
        raise MeasureError("density must be an object with a 'type' field")
    kind = spec["type"]
    if kind == "constant":
        return ConstantDensity(_num(spec.get("value"), "constant density"))
    if kind == "rational":
        num = [_num(c, "numerator") for c in spec.get("numerator", [])]
        den = [_num(c, "denominator") for c in spec.get("denominator", [])]
        return RationalDensity(tuple(num), tuple(den))
    if kind == "table":
        xs = [_num(v, "table x") for v in spec.get("x", [])]
        ys = [_num(v, "table y") for v in spec.get("y", [])]
        return TabulatedDensity(tuple(xs), tuple(ys), spec.get("interpolation", "linear"))
    raise MeasureError(f"unknown density type {kind!r}")


def measure_from_spec(spec: dict, *, norm_tol: float = NORM_TOL, quad_tol: float | None = None) -> Measure:
    """Build a :class:`Measure` from the JSON-compatible description, without
    enforcing normalization."""
    if not isinstance(spec, dict):
        raise MeasureError("measure description must be a JSON object")
    unknown = set(spec) - {"atoms", "pieces", "lattices", "sequences", "infinite", "normalize"}
    if unknown:
        raise MeasureError(f"unknown measure fields: {sorted(unknown)}")
    try:
        atoms = [Atom(_num(a["location"], "atom location"), _num(a["weight"], "atom weight"))
                 for a in spec.get("atoms", [])]
        pieces = []
        for p in spec.get("pieces", []):
            lo, hi = p["interval"]
            pieces.append(DensityPiece(_num(lo, "interval"), _num(hi, "interval"),
                                       _density_from_spec(p["density"])))
        lattices = [Lattice(_num(t["spacing"], "lattice spacing"), _num(t["weight"], "lattice weight"),
                            _num(t.get("offset", 0.0), "lattice offset"))
                    for t in spec.get("lattices", [])]
        sequences = [AtomSequence(_num(s["center"], "sequence center"), _num(s["scale"], "sequence scale"),
                                  _num(s["weight"], "sequence weight"), _num(s["decay"], "sequence decay"),
                                  _num(s.get("power", 1.0), "sequence power"))
                     for s in spec.get("sequences", [])]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MeasureError):
            raise
        raise MeasureError(f"malformed measure description: {exc!r}") from None
    infinite = spec.get("infinite")
    if infinite is not None and not isinstance(infinite, bool):
        raise MeasureError("'infinite' must be true or false")
    if not (atoms or pieces or lattices or sequences):
        raise MeasureError("measure has no components")
    mu = Measure(tuple(atoms), tuple(pieces), tuple(lattices), tuple(sequences), infinite,
                 norm_tol, default_quad_tol() if quad_tol is None else quad_tol)
    if spec.get("normalize"):
        mu = mu.normalized()
    return mu


def load_measure(spec: Union[dict, str, Path], *, norm_tol: float = NORM_TOL,
                 quad_tol: float | None = None) -> Measure:
    """Parse and validate a measure.

    ``spec`` is a dict, a JSON string, or a path to a JSON file.

    Raises
    ------
    MeasureError
        On parse failures, overlapping intervals, or bad weights.
    NormalizationError
        If the normalization defect exceeds ``norm_tol``.
    """
    if isinstance(spec, Path) or (isinstance(spec, str) and not spec.lstrip().startswith("{")):
        try:
            spec = Path(spec).read_text()
        except OSError as exc:
            raise MeasureError(f"cannot read measure file: {exc}") from None
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise MeasureError(f"measure file is not valid JSON: {exc}") from None
    mu = measure_from_spec(spec, norm_tol=norm_tol, quad_tol=quad_tol)
    if mu.defect > norm_tol:
        raise NormalizationError(mu.defect, norm_tol)
    return mu


def atomic_measure(locations: Sequence[float], weights: Sequence[float], *, normalize: bool = False,
                   **kwargs) -> Measure:
    mu = Measure(tuple(Atom(float(x), float(w)) for x, w in zip(locations, weights, strict=True)),
                 **kwargs)
    return mu.normalized() if normalize else mu


def lebesgue_measure(**kwargs) -> Measure:
    """Lebesgue measure divided by pi, whose Weyl-Titchmarsh function is identically i."""
    return Measure(pieces=(DensityPiece(-math.inf, math.inf, ConstantDensity(1 / math.pi)),), **kwargs)


def random_atomic_measure(rng: np.random.Generator, n_atoms: int | None = None, *,
                          max_atoms: int = 50, spread: float = 5.0) -> Measure:
    """Random normalized atomic measure with distinct locations."""
    n = int(rng.integers(1, max_atoms + 1)) if n_atoms is None else n_atoms
    while True:
        locs = np.sort(rng.uniform(-spread, spread, n))
        if n == 1 or np.min(np.diff(locs)) > 1e-9:
            break
    wts = rng.uniform(0.1, 1.0, n)
    return atomic_measure(locs, wts, normalize=True)
