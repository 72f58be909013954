"""Nonlocal gradient functionals: the Gagliardo seminorm, the scaled limit
that recovers the gradient norm as the smoothness index tends to one, and the
level-set functional with its lambda sweep.

The singular kernels |x-y|^(-n-sp) and |x-y|^(gamma-n) are integrated by a
midpoint pair sum away from the diagonal plus a frozen-gradient analytic model
inside a small near-field ball (the "equivalent-ball correction"); see
:class:`KernelPolicy`.  A pure-discrete mode (``diagonal="exclude"``) exists
so evaluators can be matched bitwise against naive double-loop oracles.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import DomainMask, Grid, SampledField, gradient_magnitude
from .spaces import SpaceSpec, norm

__all__ = [
    "KernelPolicy",
    "BsvyParams",
    "GagliardoParams",
    "FunctionalReport",
    "bbm_constant",
    "sphere_area",
    "sphere_moment",
    "gagliardo_seminorm",
    "gagliardo_seminorm_sweep",
    "fractional_inner_field",
    "bbm_scaled_value",
    "bbm_limit_extrapolate",
    "bsvy_inner",
    "bsvy_inner_profile",
    "bsvy_functional",
    "bsvy_sup",
    "default_lambda_grid",
    "weak_product_quasinorm",
    "weighted_mu_measure",
    "weak_holder_check",
    "WeakHolderResult",
    "sobolev_norm",
]


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def bbm_constant(p: float, n: int) -> float:
    """The gradient-recovery limit constant 2 pi^((n-1)/2) G((p+1)/2) / (p G((p+n)/2))."""
    if not (1 <= p < math.inf):
        raise ValueError("p must lie in [1, inf)")
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return 2.0 * math.pi ** ((n - 1) / 2.0) * math.gamma((p + 1) / 2.0) / (
        p * math.gamma((p + n) / 2.0)
    )


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (equals 2 when n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def sphere_moment(p: float, n: int) -> float:
    """Integral of |e . theta|^p over the unit sphere; the directional average
    that replaces the full sphere measure when the increment f(x)-f(y) is
    modeled by grad f(x) . (x-y).  Equals p * bbm_constant(p, n)."""
    return p * bbm_constant(p, n)


# ---------------------------------------------------------------------------
# policies and parameter bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelPolicy:
    """Diagonal/near-field handling for singular pair kernels.

    diagonal:          "equivalent-ball" replaces pairs closer than
                       near_window * h by a frozen-gradient analytic ball
                       integral; "exclude" drops the diagonal and keeps every
                       off-diagonal cell pair discrete (oracle mode).
    near_window:       near-field radius in units of the smallest cell size.
    subsample:         per-axis refinement factor for cells just outside the
                       near-field ball, where whole-cell membership tests are
                       at their coarsest (the level-set floor for negative
                       kernel exponents, the handoff shell for positive ones).
    subsample_window:  radius (in cells) of the subsampled neighborhood.
    """

    diagonal: str = "equivalent-ball"
    near_window: float = 1.5
    subsample: int = 4
    subsample_window: float = 4.0

    def __post_init__(self):
        if self.diagonal not in ("equivalent-ball", "exclude"):
            raise ValueError("diagonal policy must be 'equivalent-ball' or 'exclude'")
        if self.subsample < 1:
            raise ValueError("subsample factor must be >= 1")
        if self.near_window <= 0:
            raise ValueError("near window must be positive")

    def canonical(self) -> str:
        return (f"diagonal={self.diagonal},near_window={self.near_window!r},"
                f"subsample={self.subsample},subsample_window={self.subsample_window!r}")


DEFAULT_POLICY = KernelPolicy()
EXCLUDE_POLICY = KernelPolicy(diagonal="exclude")


@dataclass(frozen=True)
class BsvyParams:
    """Level-set functional parameters: kernel exponent gamma and power p."""

    gamma: float
    p: float
    lam_grid: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.gamma == 0 or not math.isfinite(self.gamma):
            raise ValueError("gamma must be nonzero and finite")
        if not (1 <= self.p < math.inf):
            raise ValueError("p must lie in [1, inf)")
        if self.lam_grid is not None:
            lam = np.asarray(self.lam_grid)
            if lam.ndim != 1 or np.any(lam <= 0) or np.any(np.diff(lam) <= 0):
                raise ValueError("lambda grid must be strictly increasing and positive")

    @property
    def theorem_conditional(self) -> bool:
        """p = 1 with gamma in [-1, 0) lies outside the classical hypothesis set."""
        return self.p == 1.0 and -1.0 <= self.gamma < 0.0


@dataclass(frozen=True)
class GagliardoParams:
    s: float
    p: float

    def __post_init__(self):
        if not (0 < self.s < 1):
            raise ValueError("s must lie in (0, 1)")
        if not (1 <= self.p < math.inf):
            raise ValueError("p must lie in [1, inf)")


# ---------------------------------------------------------------------------
# offset iteration helpers
# ---------------------------------------------------------------------------


def _half_offsets(shape: tuple[int, ...]):
    """Integer offsets whose first nonzero component is positive.

    Each unordered cell pair {x, x+o} appears exactly once; contributions are
    accumulated at both ends.
    """
    ranges = [range(-(n - 1), n) for n in shape]
    for off in itertools.product(*ranges):
        lead = 0
        for o in off:
            if o != 0:
                lead = 1 if o > 0 else -1
                break
        if lead == 1:
            yield off


def _offset_slices(off, shape):
    a, b = [], []
    for o, n in zip(off, shape):
        if o >= 0:
            a.append(slice(0, n - o))
            b.append(slice(o, n))
        else:
            a.append(slice(-o, n))
            b.append(slice(0, n + o))
    return tuple(a), tuple(b)


def _mask_array(omega: DomainMask | None, grid: Grid):
    if omega is None:
        return None
    if omega.grid != grid:
        raise ValueError("field and mask live on different grids")
    return omega.cells


def _equivalent_radius(n_removed_offsets: int, grid: Grid) -> float:
    """Radius of the ball whose volume matches the removed near-field cells."""
    cells = 2 * n_removed_offsets + 1
    vol = cells * grid.cell_volume
    vball = math.pi ** (grid.dim / 2.0) / math.gamma(grid.dim / 2.0 + 1.0)
    return (vol / vball) ** (1.0 / grid.dim)


def _directional_extent_1d(grid: Grid, mask: np.ndarray | None):
    """Per-cell free distance to the domain boundary in the -/+ axis direction.

    Measured from the cell center to the far face of the last contiguous
    domain cell (the box face when the domain reaches the box edge).
    """
    n = grid.points[0]
    h = grid.cell_size[0]
    if mask is None:
        x = grid.axis_centers(0)
        return x - grid.lo[0], grid.hi[0] - x
    m = mask.astype(bool).ravel()
    ahead = np.zeros(n)
    run = 0.0
    for i in range(n - 1, -1, -1):
        ahead[i] = run
        run = run + 1.0 if m[i] else 0.0
        if not m[i]:
            ahead[i] = 0.0
    behind = np.zeros(n)
    run = 0.0
    for i in range(n):
        behind[i] = run
        run = run + 1.0 if m[i] else 0.0
        if not m[i]:
            behind[i] = 0.0
    return (behind + 0.5) * h, (ahead + 0.5) * h


# ---------------------------------------------------------------------------
# Gagliardo seminorm and the s -> 1 limit
# ---------------------------------------------------------------------------


def gagliardo_seminorm_sweep(f: SampledField, s_values, p: float,
                             omega: DomainMask | None = None,
                             policy: KernelPolicy = DEFAULT_POLICY) -> list[float]:
    """Gagliardo seminorms for several s at once (the pair sums are shared).

    [sum over x != y in Omega of |f(x)-f(y)|^p / |x-y|^(sp+n) vol^2]^(1/p),
    with the near-field handled per policy.
    """
    s_values = [float(s) for s in s_values]
    for s in s_values:
        GagliardoParams(s, p)
    grid = f.grid
    n = grid.dim
    h = np.asarray(grid.cell_size)
    mask = _mask_array(omega, grid)
    v = f.values
    eq_ball = policy.diagonal == "equivalent-ball"
    W = policy.near_window * min(grid.cell_size) if eq_ball else 0.0
    dists, sums = [], []
    removed = 0
    for off in _half_offsets(grid.shape):
        dist = float(np.linalg.norm(np.asarray(off) * h))
        if eq_ball and dist <= W:
            removed += 1
            continue
        sa, sb = _offset_slices(off, grid.shape)
        d = np.abs(v[sa] - v[sb]) ** p
        if mask is not None:
            d = d * (mask[sa] & mask[sb])
        dists.append(dist)
        sums.append(float(np.sum(d)))
    dists = np.asarray(dists)
    sums = np.asarray(sums)
    vol = grid.cell_volume
    if eq_ball:
        g = gradient_magnitude(f)
        if mask is not None:
            g = np.where(mask, g, 0.0)
        gradp = float(np.sum(g ** p)) * vol
        r_eq = _equivalent_radius(removed, grid)
        moment = sphere_moment(p, n)
    out = []
    for s in s_values:
        total = 2.0 * vol * vol * float(np.sum(sums * dists ** (-(s * p + n))))
        if eq_ball:
            total += gradp * moment * r_eq ** (p * (1.0 - s)) / (p * (1.0 - s))
        out.append(total ** (1.0 / p))
    return out


def gagliardo_seminorm(f: SampledField, s: float, p: float,
                       omega: DomainMask | None = None,
                       policy: KernelPolicy = DEFAULT_POLICY) -> float:
    return gagliardo_seminorm_sweep(f, [s], p, omega, policy)[0]


def fractional_inner_field(f: SampledField, s: float, p: float,
                           omega: DomainMask | None = None,
                           policy: KernelPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Per-cell inner integral  x -> sum_y |f(x)-f(y)|^p / |x-y|^(n+sp) vol."""
    GagliardoParams(s, p)
    grid = f.grid
    n = grid.dim
    h = np.asarray(grid.cell_size)
    mask = _mask_array(omega, grid)
    v = f.values
    eq_ball = policy.diagonal == "equivalent-ball"
    W = policy.near_window * min(grid.cell_size) if eq_ball else 0.0
    vol = grid.cell_volume
    inner = np.zeros(grid.shape)
    removed = 0
    for off in _half_offsets(grid.shape):
        dist = float(np.linalg.norm(np.asarray(off) * h))
        if eq_ball and dist <= W:
            removed += 1
            continue
        sa, sb = _offset_slices(off, grid.shape)
        d = np.abs(v[sa] - v[sb]) ** p
        if mask is not None:
            d = d * (mask[sa] & mask[sb])
        ker = dist ** (-(s * p + n)) * vol
        inner[sa] += d * ker
        inner[sb] += d * ker
    if eq_ball:
        g = gradient_magnitude(f)
        r_eq = _equivalent_radius(removed, grid)
        diag = g ** p * sphere_moment(p, n) * r_eq ** (p * (1.0 - s)) / (p * (1.0 - s))
        if mask is not None:
            diag = np.where(mask, diag, 0.0)
        inner += diag
    if mask is not None:
        inner = np.where(mask, inner, 0.0)
    return inner


def bbm_scaled_value(f: SampledField, s: float, p: float, space: SpaceSpec,
                     omega: DomainMask | None = None,
                     policy: KernelPolicy = DEFAULT_POLICY) -> float:
    """(1-s)^(1/p) * || [inner fractional integral]^(1/p) ||_X(Omega)."""
    inner = fractional_inner_field(f, s, p, omega, policy)
    fld = SampledField(f.grid, inner ** (1.0 / p))
    return (1.0 - s) ** (1.0 / p) * norm(fld, space, omega)


def bbm_limit_extrapolate(pairs) -> tuple[float, float]:
    """Affine fit a + b(1-s) through the three largest-s samples; returns (a, residual)."""
    pts = sorted({(float(s), float(v)) for s, v in pairs})
    if len(pts) < 3:
        raise ValueError("need at least 3 distinct s values")
    tail = pts[-3:]
    s = np.array([q[0] for q in tail])
    val = np.array([q[1] for q in tail])
    design = np.vstack([np.ones_like(s), 1.0 - s]).T
    coef, res, *_ = np.linalg.lstsq(design, val, rcond=None)
    residual = float(np.sqrt(res[0])) if res.size else 0.0
    return float(coef[0]), residual


# ---------------------------------------------------------------------------
# level-set functional
# ---------------------------------------------------------------------------


def bsvy_inner_profile(f: SampledField, lams, params: BsvyParams,
                       omega: DomainMask | None = None,
                       policy: KernelPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Level-set kernel integrals for a whole lambda batch.

    Entry [l, x] is  sum over y with |f(x)-f(y)| > lam_l |x-y|^(1+gamma/p)
    of |x-y|^(gamma-n) vol, handled per policy near the diagonal.
    Returns an array of shape (len(lams), *grid.shape).
    """
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or np.any(lams <= 0):
        raise ValueError("lambda values must be positive")
    gamma, p = params.gamma, params.p
    grid = f.grid
    n = grid.dim
    h = np.asarray(grid.cell_size)
    hmin = min(grid.cell_size)
    mask = _mask_array(omega, grid)
    v = f.values
    vol = grid.cell_volume
    expo = 1.0 + gamma / p
    model_on = policy.diagonal == "equivalent-ball"
    W = policy.near_window * hmin if model_on else 0.0
    # near cells outside the analytic window are subsampled: they sit at the
    # membership handoff where whole-cell granularity is worst; oracle mode
    # stays purely discrete
    subsampled = model_on and policy.subsample > 1
    sub_w = policy.subsample_window * hmin if subsampled else 0.0
    k = policy.subsample
    sub_shifts = None
    if sub_w > 0:
        axes = [((np.arange(k) + 0.5) / k - 0.5) * h[i] for i in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        sub_shifts = np.column_stack([m.ravel() for m in mesh])
    lam_shape = (lams.size,) + (1,) * n
    lam_col = lams.reshape(lam_shape)
    inner = np.zeros((lams.size,) + grid.shape)
    removed = 0
    for off in _half_offsets(grid.shape):
        vec = np.asarray(off) * h
        dist = float(np.linalg.norm(vec))
        if model_on and dist <= W:
            removed += 1
            continue
        sa, sb = _offset_slices(off, grid.shape)
        delta = np.abs(v[sa] - v[sb])
        if mask is not None:
            pm = mask[sa] & mask[sb]
        if sub_w > 0 and dist <= sub_w:
            dsub = np.linalg.norm(vec + sub_shifts, axis=1)
            kersub = dsub ** (gamma - n) * vol / k ** n
            thr = dsub ** expo
            order = np.argsort(thr)
            thr = thr[order]
            cumker = np.concatenate(([0.0], np.cumsum(kersub[order])))
            # membership delta > lam * thr_j: prefix of the threshold-sorted
            # subcells; one searchsorted replaces the per-subcell loop
            ratio = delta[None] / lam_col
            counts = np.searchsorted(thr, ratio.ravel(), side="left").reshape(ratio.shape)
            contrib = cumker[counts]
            if mask is not None:
                contrib = contrib * pm[None]
            inner[(slice(None),) + sa] += contrib
            inner[(slice(None),) + sb] += contrib
        else:
            ker = dist ** (gamma - n) * vol
            memb = delta[None] > lam_col * dist ** expo
            if mask is not None:
                memb = memb & pm[None]
            inner[(slice(None),) + sa] += memb * ker
            inner[(slice(None),) + sb] += memb * ker
    if model_on:
        # frozen-gradient analytic near-field over the removed ball: the
        # inclusion radius rho(x) = (|grad f(x)| / lam)^(p/gamma) is a ceiling
        # for gamma > 0 and a floor for gamma < 0
        g = gradient_magnitude(f)
        r_cap = _equivalent_radius(removed, grid)
        # where grad f = 0 the power yields the right inclusion sentinel for
        # either sign of gamma: ceiling 0 (gamma > 0) or floor inf (gamma < 0)
        with np.errstate(divide="ignore", over="ignore"):
            rho = (g[None] / lam_col) ** (p / gamma)

        def radial(cap):
            # integral of z^(gamma-1) over the included part of (0, cap]:
            # (0, min(rho, cap)] when gamma > 0, (min(rho, cap), cap] otherwise
            a = np.minimum(rho, cap)
            if gamma > 0:
                return a ** gamma / gamma
            return (cap ** gamma - a ** gamma) / gamma

        if n == 1:
            lo_ext, hi_ext = _directional_extent_1d(grid, mask)
            caps_up = np.minimum(r_cap, hi_ext)[None] * np.ones_like(rho)
            caps_dn = np.minimum(r_cap, lo_ext)[None] * np.ones_like(rho)
            diag = radial(caps_up) + radial(caps_dn)
        else:
            diag = sphere_area(n) * radial(np.full_like(rho, r_cap))
        if mask is not None:
            diag = np.where(mask[None], diag, 0.0)
        inner += diag
    if mask is not None:
        inner = np.where(mask[None], inner, 0.0)
    return inner


def bsvy_inner(f: SampledField, lam: float, params: BsvyParams,
               omega: DomainMask | None = None,
               policy: KernelPolicy = DEFAULT_POLICY) -> SampledField:
    """Level-set kernel integral field at a single lambda."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return SampledField(f.grid, bsvy_inner_profile(f, [lam], params, omega, policy)[0])


def bsvy_functional(f: SampledField, lam: float, params: BsvyParams, space: SpaceSpec,
                    omega: DomainMask | None = None,
                    policy: KernelPolicy = DEFAULT_POLICY) -> float:
    """lam * || (level-set inner integral)^(1/p) ||_X(Omega)."""
    inner = bsvy_inner(f, lam, params, omega, policy)
    fld = SampledField(f.grid, inner.values ** (1.0 / params.p))
    return lam * norm(fld, space, omega)


def default_lambda_grid(f: SampledField, omega: DomainMask | None = None,
                        points: int = 40, decades=(1e-3, 1e4)) -> np.ndarray:
    """Log-spaced lambdas over decades * max |grad f| (the natural slope scale)."""
    g = gradient_magnitude(f)
    if omega is not None:
        g = np.where(omega.cells, g, 0.0)
    scale = float(np.max(g))
    if scale == 0.0:
        scale = 1.0
    return np.geomspace(decades[0] * scale, decades[1] * scale, points)


@dataclass
class FunctionalReport:
    """One experiment row with its sweep provenance."""

    kind: str
    inputs: dict
    lam_grid: list[float] = field(default_factory=list)
    profile: list[float] = field(default_factory=list)
    sup: float = 0.0
    argmax_lam: float = 0.0
    endpoint: bool = False
    extended: bool = False
    flags: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FunctionalReport":
        return cls(**json.loads(text))


def bsvy_sup(f: SampledField, params: BsvyParams, space: SpaceSpec,
             omega: DomainMask | None = None,
             policy: KernelPolicy = DEFAULT_POLICY,
             lam_grid=None, refine_points: int = 10) -> FunctionalReport:
    """Supremum over the lambda grid of the level-set functional.

    The default grid spans seven decades around the gradient scale; an
    endpoint argmax triggers one automatic two-decade extension, and one
    refinement pass localizes the maximum between its grid neighbors.
    """
    if lam_grid is None:
        lam_grid = params.lam_grid if params.lam_grid is not None else default_lambda_grid(f, omega)
    lam = np.asarray(lam_grid, dtype=float)
    if lam.size < 25 or lam[-1] / lam[0] < 10 ** 6:
        raise ValueError("lambda grid must span >= 6 decades with >= 25 points")
    report = FunctionalReport(
        kind="level-set-sup",
        inputs={"space": space.canonical(), "gamma": params.gamma, "p": params.p},
        extra={"grid": f.grid.describe(), "policy": policy.canonical()},
    )
    if params.theorem_conditional:
        report.flags.append("theorem-conditional")

    def profile_for(lams: np.ndarray) -> np.ndarray:
        inner = bsvy_inner_profile(f, lams, params, omega, policy)
        vals = np.empty(lams.size)
        for i in range(lams.size):
            fld = SampledField(f.grid, inner[i] ** (1.0 / params.p))
            vals[i] = lams[i] * norm(fld, space, omega)
        return vals

    def merge(lams, vals, extra):
        ev = profile_for(extra)
        lams = np.concatenate([lams, extra])
        vals = np.concatenate([vals, ev])
        order = np.argsort(lams)
        return lams[order], vals[order]

    vals = profile_for(lam)
    if not np.any(vals > 0):
        report.lam_grid = lam.tolist()
        report.profile = vals.tolist()
        report.flags.append("degenerate")
        return report
    k = int(np.argmax(vals))
    if k in (0, lam.size - 1):
        report.extended = True
        if k == 0:
            ext = np.geomspace(lam[0] / 100.0, lam[0], refine_points, endpoint=False)
        else:
            ext = np.geomspace(lam[-1], lam[-1] * 100.0, refine_points + 1)[1:]
        lam, vals = merge(lam, vals, ext)
        k = int(np.argmax(vals))
    lo = lam[max(k - 1, 0)]
    hi = lam[min(k + 1, lam.size - 1)]
    if hi > lo:
        fine = np.geomspace(lo, hi, refine_points + 2)[1:-1]
        lam, vals = merge(lam, vals, fine)
        k = int(np.argmax(vals))
    report.lam_grid = lam.tolist()
    report.profile = vals.tolist()
    report.sup = float(vals[k])
    report.argmax_lam = float(lam[k])
    report.endpoint = k in (0, lam.size - 1)
    if report.endpoint:
        report.flags.append("endpoint-argmax")
    return report


# ---------------------------------------------------------------------------
# pair measures and the weak Hoelder inequality
# ---------------------------------------------------------------------------


def weak_product_quasinorm(f: SampledField, params: BsvyParams,
                           omega: DomainMask | None = None,
                           lam_grid=None) -> float:
    """sup over lambda of lam * [pair measure of the level set]^(1/p).

    The pair measure integrates |x-y|^(gamma-n) over ordered pairs x != y of
    the level set; no diagonal model is applied, matching the exclude-policy
    inner field summed over the domain.
    """
    if lam_grid is None:
        lam_grid = default_lambda_grid(f, omega)
    lam = np.asarray(lam_grid, dtype=float)
    gamma, p = params.gamma, params.p
    grid = f.grid
    n = grid.dim
    h = np.asarray(grid.cell_size)
    mask = _mask_array(omega, grid)
    v = f.values
    vol = grid.cell_volume
    expo = 1.0 + gamma / p
    measures = np.zeros(lam.size)
    for off in _half_offsets(grid.shape):
        dist = float(np.linalg.norm(np.asarray(off) * h))
        sa, sb = _offset_slices(off, grid.shape)
        delta = np.abs(v[sa] - v[sb])
        if mask is not None:
            delta = np.where(mask[sa] & mask[sb], delta, 0.0)
        thresh = lam * dist ** expo
        ordered = np.sort(delta.ravel())
        counts = ordered.size - np.searchsorted(ordered, thresh, side="right")
        measures += 2.0 * counts * dist ** (gamma - n) * vol * vol
    vals = lam * measures ** (1.0 / p)
    return float(np.max(vals))


def weighted_mu_measure(predicate, gamma: float, weight: np.ndarray,
                        omega: DomainMask | None, grid: Grid) -> float:
    """Pair measure sum_{x != y in E} |x-y|^(gamma-n) w(x) vol^2.

    ``predicate(x_points, y_points)`` receives (M, dim) coordinate blocks and
    returns a boolean membership array.
    """
    w = np.asarray(weight, dtype=float)
    if w.shape != grid.shape:
        raise ValueError("weight must match the grid shape")
    mask = _mask_array(omega, grid)
    mesh = grid.meshgrid()
    h = np.asarray(grid.cell_size)
    vol = grid.cell_volume
    n = grid.dim
    total = 0.0
    for off in _half_offsets(grid.shape):
        dist = float(np.linalg.norm(np.asarray(off) * h))
        sa, sb = _offset_slices(off, grid.shape)
        xa = np.column_stack([m[sa].ravel() for m in mesh])
        xb = np.column_stack([m[sb].ravel() for m in mesh])
        pm = None
        if mask is not None:
            pm = (mask[sa] & mask[sb]).ravel()
        ker = dist ** (gamma - n) * vol * vol
        for first, second, wslice in ((xa, xb, w[sa]), (xb, xa, w[sb])):
            memb = np.asarray(predicate(first, second), dtype=bool)
            if pm is not None:
                memb = memb & pm
            total += ker * float(np.sum(wslice.ravel()[memb]))
    return total


@dataclass(frozen=True)
class WeakHolderResult:
    lhs: float
    rhs: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0


def weak_holder_check(F: np.ndarray, G: np.ndarray, gamma: float, weight: np.ndarray,
                      p: float, omega: DomainMask | None, grid: Grid) -> WeakHolderResult:
    """Weak-type Hoelder inequality for pair fields against the pair measure.

    F, G are (total_cells, total_cells) pair fields (flat C order).  Verifies

      sum |F G| dmu <= p' * sup_l l mu(|F|>l)^(1/p) * int_0^inf mu(|G|>s)^(1/p') ds

    with the sup and the integral evaluated exactly on the level breakpoints
    of the discrete pair fields.
    """
    if not (1 < p < math.inf):
        raise ValueError("p must lie in (1, inf)")
    total = grid.total_cells
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    if F.shape != (total, total) or G.shape != (total, total):
        raise ValueError("pair fields must have shape (total_cells, total_cells)")
    pts = grid.coords()
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diff ** 2, axis=2))
    w = np.asarray(weight, dtype=float).ravel()
    with np.errstate(divide="ignore"):
        kern = dist ** (gamma - grid.dim)
    np.fill_diagonal(kern, 0.0)
    kern = kern * w[:, None] * grid.cell_volume ** 2
    if omega is not None:
        m = omega.cells.ravel()
        kern = kern * (m[:, None] & m[None, :])
    absF = np.abs(F)
    absG = np.abs(G)
    lhs = float(np.sum(absF * absG * kern))
    if not (math.isfinite(lhs)):
        raise FloatingPointError("non-finite left-hand side")
    pp = p / (p - 1.0)
    fvals = np.unique(absF[kern > 0]) if np.any(kern > 0) else np.array([])
    fvals = fvals[fvals > 0]
    sup = 0.0
    for v in fvals:
        mu = float(np.sum(kern[absF >= v]))
        sup = max(sup, v * mu ** (1.0 / p))
    gvals = np.concatenate(([0.0], np.unique(absG[kern > 0]))) if np.any(kern > 0) else np.array([0.0])
    integral = 0.0
    for lo, hi in zip(gvals[:-1], gvals[1:]):
        mu = float(np.sum(kern[absG >= hi]))
        integral += (hi - lo) * mu ** (1.0 / pp)
    rhs = pp * sup * integral
    passed = lhs <= rhs * (1.0 + 1e-12) + 1e-300
    return WeakHolderResult(lhs, rhs, passed)


def sobolev_norm(f: SampledField, space: SpaceSpec, omega: DomainMask | None = None) -> float:
    """|| |grad f| ||_X(Omega); analytic gradient preferred, finite differences otherwise."""
    g = gradient_magnitude(f)
    return norm(SampledField(f.grid, g), space, omega)
