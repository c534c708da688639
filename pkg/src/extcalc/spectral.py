"""Eigenvalues of the dissipative extension and the spectral core.

Eigenvalues in the upper half-plane are the zeros of the characteristic
function ``S``.  They are located by the argument principle on rectangles
(recursive quadrisection down to cells winding once) and polished by
Newton's method.  ``S`` has no poles in the upper half-plane, so the
winding number of a cell is its zero count.

A real point is quasi-regular when some punctured neighbourhood of it
carries no mass; otherwise it belongs to the spectral core.  That is a
question about the geometry of the support, answered exactly from the
measure description.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError
from .measure import Measure
from .triple import DissipativeTriple, eval_S

QUASI_REGULAR = "quasi_regular"
CORE = "core"

ISOLATED = "isolated"
FILLS_HALF_PLANE = "fills_upper_half_plane"

DEFAULT_EPSILON_GRID = tuple(2.0 ** -k for k in range(21))

_START_POINTS = 16  # per edge, so 64 around a cell
_MAX_POINTS = 1 << 14
_CLUSTER_RTOL = 1e-6
_SPLITS = (0.5123, 0.4629, 0.5371, 0.4411)


@dataclass(frozen=True)
class SearchRegion:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    max_depth: int = 24
    refine_tol: float = 1e-10

    def __post_init__(self):
        if not (self.im_min > 0):
            raise DomainError("search region must stay in the open upper half-plane (im_min > 0)")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise DomainError("search region needs re_min < re_max and im_min < im_max")
        if not all(map(math.isfinite, (self.re_min, self.re_max, self.im_min, self.im_max))):
            raise DomainError("search region must be bounded")
        if self.max_depth < 1 or not self.refine_tol > 0:
            raise DomainError("max_depth must be positive and refine_tol > 0")


@dataclass(frozen=True)
class Root:
    z: complex
    multiplicity: int
    residual: float
    boundary_suspect: bool = False


@dataclass(frozen=True)
class EigenvalueSearch:
    """Outcome of :func:`find_eigenvalues`; iterating yields the roots as complex numbers."""

    roots: tuple
    winding: int
    verdict: str = ISOLATED
    notes: tuple = ()
    tags: tuple = ()

    def __iter__(self):
        return iter([r.z for r in self.roots])

    def __len__(self):
        return len(self.roots)

    @property
    def points(self) -> list:
        return [r.z for r in self.roots]


class _Unstable(Exception):
    pass


class _Cell:
    __slots__ = ("x0", "x1", "y0", "y1")

    def __init__(self, x0, x1, y0, y1):
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1

    @property
    def size(self):
        return max(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def center(self):
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def contains(self, z, pad=0.0):
        return (self.x0 - pad <= z.real <= self.x1 + pad) and (self.y0 - pad <= z.imag <= self.y1 + pad)

    def boundary(self, n):
        t = np.arange(n) / n
        a, b, c, d = (complex(self.x0, self.y0), complex(self.x1, self.y0),
                      complex(self.x1, self.y1), complex(self.x0, self.y1))
        return np.concatenate([a + (b - a) * t, b + (c - b) * t, c + (d - c) * t, d + (a - d) * t])

    def split(self, fx, fy):
        xm = self.x0 + fx * (self.x1 - self.x0)
        ym = self.y0 + fy * (self.y1 - self.y0)
        return [_Cell(self.x0, xm, self.y0, ym), _Cell(xm, self.x1, self.y0, ym),
                _Cell(self.x0, xm, ym, self.y1), _Cell(xm, self.x1, ym, self.y1)]


class _RootFinder:
    def __init__(self, f: Callable[[complex], complex], region: SearchRegion):
        self.f = f
        self.region = region
        self.cache = {}
        self.notes = []

    def value(self, z):
        z = complex(z)
        v = self.cache.get(z)
        if v is None:
            v = self.cache[z] = complex(self.f(z))
        return v

    def winding(self, cell: _Cell) -> int:
        n = _START_POINTS
        while n <= _MAX_POINTS:
            vals = np.array([self.value(z) for z in cell.boundary(n)])
            scale = float(np.max(np.abs(vals)))
            if not np.all(np.isfinite(vals)) or np.min(np.abs(vals)) <= 1e-13 * max(scale, 1e-300):
                raise _Unstable("S nearly vanishes on the cell boundary")
            steps = np.angle(np.roll(vals, -1) / vals)
            if np.max(np.abs(steps)) < math.pi / 2:
                return int(round(float(np.sum(steps)) / (2 * math.pi)))
            n *= 2
        raise _Unstable("a zero lies on or next to the cell boundary")

    def newton(self, z, mult, cell):
        tol = self.region.refine_tol
        scale = max(1.0, abs(z))
        fz = self.value(z)
        for _ in range(60):
            h = 1e-6 * scale
            d = (self.value(z + h) - self.value(z - h)) / (2 * h)
            if d == 0 or not cmath.isfinite(d):
                break
            step = mult * fz / d
            z_new = z - step
            if not z_new.imag > 0:
                break
            f_new = self.value(z_new)
            if abs(f_new) > 2 * abs(fz) and abs(step) > 1e-12 * scale:
                break
            z, fz = z_new, f_new
            if abs(step) <= 1e-15 * scale or (abs(fz) <= 1e-3 * tol and abs(step) <= 1e-10 * scale):
                break
        return z, abs(fz)

    def solve(self, cell: _Cell, w: int, depth: int):
        if w == 0:
            return []
        tol = self.region.refine_tol
        if w == 1 or depth >= self.region.max_depth or cell.size <= 1e-9 * max(1.0, abs(cell.center)):
            z, res = self.newton(cell.center, w, cell)
            if res <= tol and cell.contains(z, pad=1e-6 * cell.size):
                return [Root(z, w, res)]
            if depth >= self.region.max_depth or cell.size <= 1e-12 * max(1.0, abs(cell.center)):
                self.notes.append(f"refinement stalled near {cell.center} (|S| = {res:.2e})")
                return [Root(z, w, res)]
        # quadrisect; retry with another split point if a child boundary
        # passes too close to a zero
        for fx in _SPLITS:
            fy = 1.0 - fx
            kids = cell.split(fx, fy)
            try:
                counts = [self.winding(k) for k in kids]
            except _Unstable:
                continue
            if sum(counts) != w:
                continue
            out = []
            for k, c in zip(kids, counts):
                out.extend(self.solve(k, c, depth + 1))
            return out
        raise ConvergenceError(f"could not separate zeros inside cell centred at {cell.center}")


def _is_identically_zero(t: DissipativeTriple, region: SearchRegion) -> bool:
    if t.kappa != 0:
        return False
    probes = [1j, complex(region.re_min, region.im_max), complex(region.re_max, region.im_min),
              complex(0.5 * (region.re_min + region.re_max), 0.5 * (region.im_min + region.im_max)),
              complex(0.37, 2.9)]
    return all(abs(eval_S(t, z)) <= 1e-12 for z in probes)


def find_eigenvalues(t: DissipativeTriple, region: SearchRegion,
                     S: Callable[[complex], complex] | None = None) -> EigenvalueSearch:
    """All zeros of ``S`` in ``region``, sorted by (re, im).

    Each root carries the winding-number multiplicity of its final cell and
    the residual ``|S(z0)|``.  Roots with ``Im z0 <= 2 im_min`` are flagged
    ``boundary_suspect``: they may be the trace of zeros that continue
    towards the real axis.

    When ``S`` vanishes identically (``kappa = 0`` over a measure with
    ``M = i``) every point of the half-plane is an eigenvalue; the result
    then has no roots and verdict ``fills_upper_half_plane``.

    ``S`` may be supplied to search a different function with the same
    machinery.
    """
    if S is None:
        if _is_identically_zero(t, region):
            return EigenvalueSearch((), 0, FILLS_HALF_PLANE,
                                    ("the characteristic function vanishes identically",), t.tags)
        S = t.S
    finder = _RootFinder(S, region)
    cell = _Cell(region.re_min, region.re_max, region.im_min, region.im_max)
    try:
        w = finder.winding(cell)
    except _Unstable as exc:
        raise ConvergenceError(
            f"cannot count zeros: {exc} (move the region edges away from the zeros)") from None
    roots = finder.solve(cell, w, 0) if w > 0 else []
    roots = sorted(roots, key=lambda r: (r.z.real, r.z.imag))
    # a zero of multiplicity m is split by rounding into m simple zeros
    # about eps**(1/m) apart; gather those and polish with the multiplicity
    merged = []
    for r in roots:
        near = [q for q in merged if abs(q.z - r.z) <= _CLUSTER_RTOL * max(1.0, abs(r.z))]
        if not near:
            merged.append(r)
            continue
        q = near[0]
        m = q.multiplicity + r.multiplicity
        z0 = (q.z * q.multiplicity + r.z * r.multiplicity) / m
        z, res = finder.newton(z0, m, None)
        merged[merged.index(q)] = Root(z, m, res)
    merged = [Root(r.z, r.multiplicity, r.residual, r.z.imag <= 2 * region.im_min) for r in merged]
    notes = list(finder.notes)
    if any(r.multiplicity > 1 for r in merged):
        notes.append("multiplicity > 1 is the winding count; geometric multiplicity is not asserted")
    bad = [r for r in merged if r.residual > region.refine_tol]
    if bad:
        notes.append(f"{len(bad)} root(s) above refine_tol")
    return EigenvalueSearch(tuple(merged), w, ISOLATED, tuple(notes), t.tags)


# ---------------------------------------------------------------------------
# real points


@dataclass(frozen=True)
class SpectralPointClass:
    point: float
    epsilon_found: float | None
    verdict: str
    gap: float = field(default=math.nan)  # distance to the rest of the support

    def __post_init__(self):
        assert (self.verdict == QUASI_REGULAR) == (self.epsilon_found is not None)


def punctured_gap(mu: Measure, lam0: float) -> float:
    """Largest ``eps`` with no mass in ``(lam0 - eps, lam0) U (lam0, lam0 + eps)``.

    Density pieces count as support on their whole closed interval.
    """
    lam0 = float(lam0)
    gap = math.inf
    if mu.atoms:
        d = np.abs(mu.locations - lam0)
        d = d[d > 0]
        if d.size:
            gap = float(np.min(d))
    for p in mu.pieces:
        if p.a <= lam0 <= p.b:
            return 0.0
        gap = min(gap, p.a - lam0 if lam0 < p.a else lam0 - p.b)
    for t in mu.lattices:
        gap = min(gap, t.nearest_distance(lam0))
    for s in mu.sequences:
        gap = min(gap, s.nearest_distance(lam0))
    return gap


def classify_spectral_point(mu: Measure, lam0: float,
                            epsilon_grid: Sequence[float] = DEFAULT_EPSILON_GRID) -> SpectralPointClass:
    """Quasi-regular point or spectral-core point of the model symmetric operator.

    The witness is the largest grid ``eps`` whose punctured neighbourhood
    carries no mass.  If the point is quasi-regular but every grid value is
    too large, the exact gap itself is reported.
    """
    grid = sorted((float(e) for e in epsilon_grid), reverse=True)
    if not grid or any(not e > 0 for e in grid):
        raise DomainError("epsilon grid must be non-empty and positive")
    gap = punctured_gap(mu, lam0)
    if gap > 0:
        fits = [e for e in grid if e <= gap]
        eps = fits[0] if fits else gap
        return SpectralPointClass(float(lam0), eps, QUASI_REGULAR, gap)
    return SpectralPointClass(float(lam0), None, CORE, 0.0)
