"""Uniform cell-centered grids, sampled fields, and the test-function catalog.

Every quantity in this package lives on a uniform tensor grid over a box:
cell centers sit at ``lo + (k + 1/2) h`` and all integrals are midpoint-rule
sums ``sum(value) * prod(h)``.  Fields carry an optional closed-form gradient
so that downstream functionals can prefer analytic derivatives over finite
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "SampledField",
    "DomainMask",
    "TestFunctionSpec",
    "make_grid",
    "sample",
    "truncate",
    "gradient_fd",
    "gradient_magnitude",
    "auto_box",
    "parse_function",
    "restrict_values",
]


def _as_tuple(x, dim: int, cast=float) -> tuple:
    """Broadcast a scalar or sequence to a length-``dim`` tuple."""
    if np.isscalar(x):
        return tuple(cast(x) for _ in range(dim))
    seq = tuple(cast(v) for v in x)
    if len(seq) != dim:
        raise ValueError(f"expected {dim} entries, got {len(seq)}")
    return seq


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid over the box ``prod_i [lo_i, hi_i]``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    points: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or len(self.lo) != len(self.points):
            raise ValueError("lo, hi, points must have equal length")
        for a, b in zip(self.lo, self.hi):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("grid bounds must be finite")
            if not b > a:
                raise ValueError(f"grid bounds must satisfy hi > lo, got [{a}, {b}]")
        for n in self.points:
            if int(n) != n or n < 2:
                raise ValueError(f"need at least 2 cells per axis, got {n}")

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def cell_size(self) -> tuple[float, ...]:
        return tuple((b - a) / n for a, b, n in zip(self.lo, self.hi, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.cell_size))

    @property
    def total_cells(self) -> int:
        return int(np.prod(self.points))

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.cell_size[axis]
        return self.lo[axis] + (np.arange(self.points[axis]) + 0.5) * h

    def meshgrid(self) -> list[np.ndarray]:
        """Coordinate arrays of shape ``self.shape``, one per axis."""
        return list(np.meshgrid(*[self.axis_centers(i) for i in range(self.dim)], indexing="ij"))

    def coords(self) -> np.ndarray:
        """All cell centers as a flat ``(total_cells, dim)`` array in C order."""
        mesh = self.meshgrid()
        return np.column_stack([m.ravel() for m in mesh])

    def diameter(self) -> float:
        return float(np.hypot.reduce([b - a for a, b in zip(self.lo, self.hi)]))

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.lo, self.hi, tuple(n * factor for n in self.points))

    def describe(self) -> str:
        lo = ",".join(repr(v) for v in self.lo)
        hi = ",".join(repr(v) for v in self.hi)
        pts = ",".join(str(n) for n in self.points)
        return f"box=[{lo}]..[{hi}] N=[{pts}]"


def make_grid(dim: int, lo, hi, points) -> Grid:
    """Build a grid; ``lo``/``hi``/``points`` may be scalars or per-axis sequences."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return Grid(_as_tuple(lo, dim), _as_tuple(hi, dim), _as_tuple(points, dim, cast=int))


@dataclass(frozen=True)
class SampledField:
    """Function values on a grid, with an optional closed-form gradient.

    ``analytic_gradient`` has shape ``(dim, *grid.shape)`` when present.
    """

    grid: Grid
    values: np.ndarray
    analytic_gradient: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)
        if self.analytic_gradient is not None:
            g = np.asarray(self.analytic_gradient, dtype=float)
            if g.shape != (self.grid.dim,) + self.grid.shape:
                raise ValueError("analytic_gradient must have shape (dim, *grid.shape)")
            object.__setattr__(self, "analytic_gradient", g)


@dataclass(frozen=True)
class DomainMask:
    """Per-cell membership of a domain inside the ambient grid box."""

    grid: Grid
    cells: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=bool)
        if c.shape != self.grid.shape:
            raise ValueError("mask shape must match grid shape")
        if not c.any():
            raise ValueError("domain mask is empty")
        object.__setattr__(self, "cells", c)

    @property
    def measure(self) -> float:
        return float(np.count_nonzero(self.cells)) * self.grid.cell_volume

    def full(self) -> bool:
        return bool(self.cells.all())


def restrict_values(f: SampledField, omega: DomainMask | None) -> np.ndarray:
    """Values of ``f`` zero-extended outside ``omega`` (identity when omega is None)."""
    if omega is None:
        return f.values
    if omega.grid != f.grid:
        raise ValueError("field and mask live on different grids")
    return np.where(omega.cells, f.values, 0.0)


# ---------------------------------------------------------------------------
# test-function catalog
# ---------------------------------------------------------------------------

_KINDS = ("gaussian", "tent", "coordinate", "bump", "polygauss")


class TestFunctionSpec:
    """One member of the closed-form test family.

    (Not a test case; the ``__test__`` flag keeps pytest from collecting it.)

    Kinds and parameters:
      gaussian    sigma > 0, center          exp(-|x-c|^2 / sigma^2)
      tent        width > 0, center          max(0, 1 - |x-c| / (width/2))
      coordinate  axis                       x_axis
      bump        radius > 0, center         exp(1 - 1/(1 - (|x-c|/R)^2)) inside R
      polygauss   degree >= 0, sigma, center (x_0-c_0)^degree * gaussian

    All kinds have closed-form gradients.
    """

    __test__ = False

    def __init__(self, kind: str, **params):
        if kind not in _KINDS:
            raise ValueError(f"unknown test-function kind {kind!r}")
        self.kind = kind
        self.params = dict(params)
        self._validate()

    def _validate(self):
        p = self.params
        if self.kind == "gaussian":
            p.setdefault("sigma", 1.0)
            p.setdefault("center", 0.0)
            if not p["sigma"] > 0:
                raise ValueError("gaussian sigma must be > 0")
        elif self.kind == "tent":
            p.setdefault("width", 2.0)
            p.setdefault("center", 0.0)
            if not p["width"] > 0:
                raise ValueError("tent width must be > 0")
        elif self.kind == "coordinate":
            p.setdefault("axis", 0)
            p["axis"] = int(p["axis"])
        elif self.kind == "bump":
            p.setdefault("radius", 1.0)
            p.setdefault("center", 0.0)
            if not p["radius"] > 0:
                raise ValueError("bump radius must be > 0")
        elif self.kind == "polygauss":
            p.setdefault("degree", 1)
            p.setdefault("sigma", 1.0)
            p.setdefault("center", 0.0)
            p["degree"] = int(p["degree"])
            if p["degree"] < 0:
                raise ValueError("polygauss degree must be >= 0")
            if not p["sigma"] > 0:
                raise ValueError("polygauss sigma must be > 0")

    def canonical(self) -> str:
        """Textual form ``kind:key=value,...`` with sorted keys."""
        def fmt(v):
            if isinstance(v, (tuple, list, np.ndarray)):
                return ";".join(repr(float(x)) for x in v)
            if isinstance(v, (int, np.integer)):
                return str(int(v))
            return repr(float(v))

        body = ",".join(f"{k}={fmt(v)}" for k, v in sorted(self.params.items()))
        return f"{self.kind}:{body}" if body else self.kind

    def __repr__(self):
        return f"TestFunctionSpec({self.canonical()!r})"

    def __eq__(self, other):
        return isinstance(other, TestFunctionSpec) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def _center(self, dim: int) -> np.ndarray:
        return np.asarray(_as_tuple(self.params.get("center", 0.0), dim))

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at ``points`` of shape (M, dim)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dim = pts.shape[1]
        p = self.params
        if self.kind == "gaussian":
            d2 = np.sum((pts - self._center(dim)) ** 2, axis=1)
            return np.exp(-d2 / p["sigma"] ** 2)
        if self.kind == "tent":
            r = np.linalg.norm(pts - self._center(dim), axis=1)
            return np.maximum(0.0, 1.0 - r / (p["width"] / 2.0))
        if self.kind == "coordinate":
            return pts[:, p["axis"]].copy()
        if self.kind == "bump":
            u2 = np.sum((pts - self._center(dim)) ** 2, axis=1) / p["radius"] ** 2
            out = np.zeros(len(pts))
            inside = u2 < 1.0
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - u2[inside]))
            return out
        if self.kind == "polygauss":
            c = self._center(dim)
            d2 = np.sum((pts - c) ** 2, axis=1)
            g = np.exp(-d2 / p["sigma"] ** 2)
            return (pts[:, 0] - c[0]) ** p["degree"] * g
        raise AssertionError(self.kind)

    def gradient(self, points: np.ndarray) -> np.ndarray:
        """Closed-form gradient at ``points``; shape (M, dim)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dim = pts.shape[1]
        p = self.params
        if self.kind == "gaussian":
            c = self._center(dim)
            v = self.evaluate(pts)
            return -2.0 * (pts - c) / p["sigma"] ** 2 * v[:, None]
        if self.kind == "tent":
            c = self._center(dim)
            rel = pts - c
            r = np.linalg.norm(rel, axis=1)
            half = p["width"] / 2.0
            out = np.zeros_like(pts)
            on = (r > 0) & (r < half)
            out[on] = -rel[on] / (r[on, None] * half)
            return out
        if self.kind == "coordinate":
            out = np.zeros_like(pts)
            out[:, p["axis"]] = 1.0
            return out
        if self.kind == "bump":
            c = self._center(dim)
            R = p["radius"]
            rel = pts - c
            u2 = np.sum(rel ** 2, axis=1) / R ** 2
            out = np.zeros_like(pts)
            inside = u2 < 1.0
            v = np.exp(1.0 - 1.0 / (1.0 - u2[inside]))
            out[inside] = v[:, None] * (-2.0 * rel[inside] / R ** 2) / (1.0 - u2[inside])[:, None] ** 2
            return out
        if self.kind == "polygauss":
            c = self._center(dim)
            d = p["degree"]
            rel = pts - c
            g = np.exp(-np.sum(rel ** 2, axis=1) / p["sigma"] ** 2)
            poly = rel[:, 0] ** d
            out = poly[:, None] * (-2.0 * rel / p["sigma"] ** 2) * g[:, None]
            if d > 0:
                out[:, 0] += d * rel[:, 0] ** (d - 1) * g
            return out
        raise AssertionError(self.kind)


def parse_function(text: str) -> TestFunctionSpec:
    """Parse the canonical textual form ``kind:key=value,...``."""
    kind, _, body = text.strip().partition(":")
    params: dict = {}
    if body:
        for item in body.split(","):
            k, _, v = item.partition("=")
            if not _:
                raise ValueError(f"bad parameter {item!r} in {text!r}")
            if ";" in v:
                params[k.strip()] = tuple(float(x) for x in v.split(";"))
            else:
                fv = float(v)
                params[k.strip()] = int(fv) if k.strip() in ("axis", "degree") else fv
    return TestFunctionSpec(kind.strip(), **params)


def sample(spec: TestFunctionSpec, grid: Grid) -> SampledField:
    """Evaluate a test function and its closed-form gradient at cell centers."""
    pts = grid.coords()
    values = spec.evaluate(pts).reshape(grid.shape)
    grad = spec.gradient(pts).T.reshape((grid.dim,) + grid.shape)
    return SampledField(grid, values, grad)


def truncate(f: SampledField, m: float) -> SampledField:
    """Pointwise truncation at height ``m``: clamp to [-m, m].  Gradient dropped."""
    if not m > 0:
        raise ValueError("truncation level must be positive")
    return SampledField(f.grid, np.clip(f.values, -m, m))


def gradient_fd(f: SampledField) -> np.ndarray:
    """Finite-difference gradient: second-order central, one-sided at boundaries.

    Returns an array of shape ``(dim, *grid.shape)``.
    """
    for npts in f.grid.points:
        if npts < 3:
            raise ValueError("finite-difference gradient needs >= 3 points per axis")
    return np.stack(
        [
            np.gradient(f.values, f.grid.cell_size[i], axis=i, edge_order=2)
            for i in range(f.grid.dim)
        ]
    )


def gradient_magnitude(f: SampledField) -> np.ndarray:
    """Euclidean magnitude |grad f| per cell; analytic gradient preferred."""
    g = f.analytic_gradient if f.analytic_gradient is not None else gradient_fd(f)
    return np.sqrt(np.sum(g * g, axis=0))


def auto_box(spec: TestFunctionSpec, dim: int, tail_tol: float = 1e-8) -> tuple[tuple, tuple]:
    """Box half-width such that the tail of |f| outside carries < tail_tol of its mass.

    Compactly supported kinds get their support plus a small margin; decaying
    kinds grow the box by doubling until the radial tail estimate drops below
    ``tail_tol``.  The coordinate function has no decay and is rejected.
    """
    p = spec.params
    center = np.asarray(_as_tuple(p.get("center", 0.0), dim))
    if spec.kind == "tent":
        half = p["width"] / 2.0 * 1.05
    elif spec.kind == "bump":
        half = p["radius"] * 1.05
    elif spec.kind in ("gaussian", "polygauss"):
        sigma = p["sigma"]
        deg = p.get("degree", 0)

        def tail_fraction(L):
            r = np.linspace(0, 8 * max(L, sigma), 20001)
            prof = r ** deg * np.exp(-(r ** 2) / sigma ** 2) * r ** (dim - 1)
            total = np.trapezoid(prof, r)
            out = np.trapezoid(np.where(r > L, prof, 0.0), r)
            return out / total

        half = 2.0 * sigma
        while tail_fraction(half) > tail_tol:
            half *= 2.0
    else:
        raise ValueError(f"{spec.kind} has no decaying tail; give the box explicitly")
    lo = tuple(c - half for c in center)
    hi = tuple(c + half for c in center)
    return lo, hi
