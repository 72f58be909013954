"""The acceptance suite: every exit criterion as a callable check.

Each criterion pins its own grid, parameters, and tolerance; ``run_acceptance``
executes a selection and prints one pass/fail line per criterion.  The CLI
``verify`` subcommand and ``tests/test_acceptance.py`` both drive this module.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .domains import DomainSpec, epsilon_falsifier, mask, parse_domain
from .functionals import (
    BsvyParams,
    KernelPolicy,
    bbm_constant,
    bbm_limit_extrapolate,
    bsvy_functional,
    bsvy_sup,
    gagliardo_seminorm_sweep,
    sobolev_norm,
)
from .grid import SampledField, TestFunctionSpec, make_grid, sample
from .spaces import (
    HerzLocal,
    HerzWeight,
    Lebesgue,
    Lorentz,
    MixedNorm,
    Morrey,
    Orlicz,
    OrliczFunction,
    WeightedLebesgue,
    dyadic_cover,
    herz_local_norm,
    lorentz_norm,
    luxemburg_norm,
    mixed_norm,
    morrey_norm,
    norm,
)
from .weights import (
    anchored_cube_family,
    estimate_maximal_opnorm,
    explicit_weight,
    hl_maximal,
    muckenhoupt_constant,
    power_weight,
    rubio_de_francia,
)
from .experiments import DEFAULT_S_GRID, run_weak_holder_suite, ExperimentConfig

__all__ = ["AcceptanceResult", "CRITERIA", "run_acceptance"]


@dataclass
class AcceptanceResult:
    key: str
    description: str
    passed: bool
    measured: str
    tolerance: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.key}: {self.description} | measured {self.measured}"
                f" | tolerance {self.tolerance} | {self.seconds:.1f}s")


def _bbm_limit_1d(p: float, npts: int = 4096, half: float = 8.0) -> tuple[float, float]:
    grid = make_grid(1, -half, half, npts)
    f = sample(TestFunctionSpec("gaussian", sigma=1.0, center=0.0), grid)
    semis = gagliardo_seminorm_sweep(f, DEFAULT_S_GRID, p)
    pairs = [(s, (1.0 - s) * g ** p) for s, g in zip(DEFAULT_S_GRID, semis)]
    est, _ = bbm_limit_extrapolate(pairs)
    gradp = float(np.sum(np.abs(f.analytic_gradient[0]) ** p) * grid.cell_volume)
    return est, bbm_constant(p, 1) * gradp


def criterion_1() -> AcceptanceResult:
    t0 = time.time()
    est, ref = _bbm_limit_1d(1.0)
    rel = abs(est - ref) / ref
    dt = time.time() - t0
    return AcceptanceResult(
        "bbm-1d-p1", "gradient-limit constant, n=1 p=1 (target 2 ||f'||_1)",
        rel <= 0.03 and dt <= 60.0, f"rel err {rel:.4f}, {dt:.1f}s", "3% and 60 s", dt)


def criterion_2() -> AcceptanceResult:
    t0 = time.time()
    est, ref = _bbm_limit_1d(2.0)
    rel = abs(est - ref) / ref
    return AcceptanceResult(
        "bbm-1d-p2", "gradient-limit constant, n=1 p=2 (target ||f'||_2^2)",
        rel <= 0.03, f"rel err {rel:.4f}", "3%", time.time() - t0)


def criterion_3() -> AcceptanceResult:
    t0 = time.time()
    grid = make_grid(2, -5.0, 5.0, 128)
    f = sample(TestFunctionSpec("gaussian", sigma=1.0, center=0.0), grid)
    p = 2.0
    semis = gagliardo_seminorm_sweep(f, DEFAULT_S_GRID, p)
    pairs = [(s, (1.0 - s) * g ** p) for s, g in zip(DEFAULT_S_GRID, semis)]
    est, _ = bbm_limit_extrapolate(pairs)
    gmag2 = np.sum(f.analytic_gradient ** 2, axis=0)
    ref = bbm_constant(p, 2) * float(np.sum(gmag2) * grid.cell_volume)
    rel = abs(est - ref) / ref
    dt = time.time() - t0
    return AcceptanceResult(
        "bbm-2d-p2", "gradient-limit constant, n=2 p=2 (target pi/2 ||grad f||_2^2)",
        rel <= 0.05 and dt <= 600.0, f"rel err {rel:.4f}, {dt:.1f}s", "5% and 10 min", dt)


def criterion_4() -> AcceptanceResult:
    t0 = time.time()
    grid = make_grid(1, 0.0, 1.0, 8192)
    f = sample(TestFunctionSpec("coordinate", axis=0), grid)
    params = BsvyParams(1.0, 1.0)
    space = Lebesgue(1.0)
    policy = KernelPolicy(near_window=160.0)
    lams = np.geomspace(2.0, 1000.0, 25)
    worst = 0.0
    for lam in lams:
        val = bsvy_functional(f, float(lam), params, space, None, policy)
        ref = 2.0 - 1.0 / lam
        worst = max(worst, abs(val - ref) / ref)
    rep = bsvy_sup(f, params, space, None, policy)
    ok = worst <= 0.01 and rep.sup >= 1.99
    return AcceptanceResult(
        "bsvy-desk", "level-set functional closed form 2 - 1/lambda on (0,1)",
        ok, f"max profile err {worst:.4f}, sup {rep.sup:.4f}", "1% profile, sup >= 1.99",
        time.time() - t0)


def criterion_5() -> AcceptanceResult:
    t0 = time.time()
    grid = make_grid(1, 0.0, 1.0, 64)
    ind = (grid.coords()[:, 0] < 0.5).astype(float).reshape(grid.shape)
    f = SampledField(grid, ind)
    val = lorentz_norm(f, 2.0, 3.0)
    ref = (2.0 / 3.0) ** (1.0 / 3.0) * 0.5 ** 0.5
    rel = abs(val - ref) / ref
    return AcceptanceResult(
        "lorentz-indicator", "Lorentz norm of a measure-1/2 indicator, (r,tau)=(2,3)",
        rel <= 0.01, f"rel err {rel:.2e}", "1%", time.time() - t0)


def criterion_6() -> AcceptanceResult:
    t0 = time.time()
    grid = make_grid(1, -2.0, 2.0, 4096)
    ones = explicit_weight(grid, np.ones(grid.shape))
    exact = all(muckenhoupt_constant(ones, p) == 1.0 for p in (1.0, 2.0, 3.0))
    w = power_weight(grid, -0.5, center=0.0)
    a1 = muckenhoupt_constant(w, 1.0, family=anchored_cube_family(grid, 0.0))
    rel = abs(a1 - 2.0) / 2.0
    return AcceptanceResult(
        "muckenhoupt", "constant weight gives exactly 1; |x|^-1/2 gives 2",
        exact and rel <= 0.02, f"unit exact: {exact}, power rel err {rel:.4f}",
        "exact and 2%", time.time() - t0)


def criterion_7() -> AcceptanceResult:
    t0 = time.time()
    grid = make_grid(1, -4.0, 4.0, 256)
    probes = [
        TestFunctionSpec("gaussian", sigma=1.0, center=0.0),
        TestFunctionSpec("gaussian", sigma=0.5, center=0.7),
        TestFunctionSpec("tent", width=2.0, center=-0.5),
        TestFunctionSpec("bump", radius=1.5, center=0.0),
        TestFunctionSpec("polygauss", degree=2, sigma=1.0, center=0.0),
    ]
    space = Lebesgue(2.0)
    opnorm = max(estimate_maximal_opnorm(space, grid).value, 1.0)
    depth = 12
    ok = True
    details = []
    for spec in probes:
        g0 = sample(spec, grid)
        g = SampledField(grid, np.abs(g0.values))
        res = rubio_de_francia(g, space, opnorm, depth=depth)
        rg = res.weight.samples
        dom = bool(np.all(rg >= np.abs(g.values)))
        mrg = hl_maximal(rg, grid)
        slack = float(np.max(mrg - 2.0 * opnorm * rg))
        bound = bool(slack <= res.eps_tail + 1e-9 * np.max(rg))
        tailok = bool(res.eps_tail <= 2.0 ** (-(depth + 1)) * res.running_norm + 1e-300)
        ok = ok and dom and bound and tailok
        details.append(f"{spec.kind}:{'ok' if dom and bound and tailok else 'bad'}")
    return AcceptanceResult(
        "majorant-iteration", "R_K g >= |g| and M(R_K g) <= 2c R_K g + eps_K, K=12, 5 probes",
        ok, ",".join(details), "cell-wise, eps_K <= 2^-(K+1) running norm", time.time() - t0)


def criterion_8() -> AcceptanceResult:
    t0 = time.time()
    checks = {}
    grid = make_grid(1, -2.0, 2.0, 32)
    f = sample(TestFunctionSpec("gaussian", sigma=1.0, center=0.1), grid)
    lp = norm(f, Lebesgue(2.5))
    checks["orlicz"] = abs(luxemburg_norm(f, OrliczFunction("power", 2.5)) - lp) / lp
    checks["morrey"] = abs(morrey_norm(f, 2.5, 2.5) - lp) / lp
    checks["herz"] = abs(
        herz_local_norm(f, 2.5, 2.5, HerzWeight(0.0), 0.0) - lp) / lp
    steps = np.zeros(grid.shape)
    steps[(grid.coords()[:, 0] > -1.0) & (grid.coords()[:, 0] < 0.0)] = 1.5
    steps[(grid.coords()[:, 0] >= 0.0) & (grid.coords()[:, 0] < 1.0)] = 0.5
    fs = SampledField(grid, steps)
    lps = norm(fs, Lebesgue(2.5))
    checks["lorentz"] = abs(lorentz_norm(fs, 2.5, 2.5) - lps) / lps
    g2 = make_grid(2, -2.0, 2.0, 16)
    f2 = sample(TestFunctionSpec("gaussian", sigma=1.0, center=0.0), g2)
    lp2 = norm(f2, Lebesgue(3.0))
    checks["mixed"] = abs(mixed_norm(f2, (3.0, 3.0)) - lp2) / lp2
    worst = max(checks.values())
    return AcceptanceResult(
        "collapse-identities",
        "Orlicz power/Morrey(r,r)/Herz(p,p,0)/Lorentz(p,p)/uniform mixed all equal L^p",
        worst <= 1e-10, f"worst rel dev {worst:.2e}", "1e-10 relative", time.time() - t0)


def criterion_9() -> AcceptanceResult:
    from . import oracles  # independent naive-loop implementations

    t0 = time.time()
    devs = {}
    # Gagliardo seminorm, indicator on [-2, 3]
    grid = make_grid(1, -2.0, 3.0, 64)
    ind = ((grid.coords()[:, 0] > 0) & (grid.coords()[:, 0] < 1)).astype(float)
    f = SampledField(grid, ind.reshape(grid.shape))
    mine = gagliardo_seminorm_sweep(f, [0.25], 1.0, None, KernelPolicy(diagonal="exclude"))[0]
    ref = oracles.gagliardo(f.values.ravel(), grid.coords(), grid.cell_volume, 0.25, 1.0)
    devs["gagliardo"] = abs(mine - ref) / ref
    # level-set inner field, gaussian
    from .functionals import bsvy_inner

    gridb = make_grid(1, -2.0, 2.0, 64)
    fb = sample(TestFunctionSpec("gaussian", sigma=1.0, center=0.0), gridb)
    inner = bsvy_inner(fb, 1.0, BsvyParams(2.0, 2.0), None, KernelPolicy(diagonal="exclude")).values
    oin = oracles.level_set_inner(fb.values.ravel(), gridb.coords(), gridb.cell_volume,
                                  1.0, 2.0, 2.0)
    scale = float(np.max(np.abs(oin)))
    devs["bsvy-inner"] = float(np.max(np.abs(inner.ravel() - oin))) / scale
    # dyadic-cube space norm
    gridc = make_grid(1, 0.0, 1.0, 32)
    indc = (gridc.coords()[:, 0] > 0.0).astype(float).reshape(gridc.shape)
    fc = SampledField(gridc, indc)
    from .spaces import bbm_morrey_norm

    mine_c = bbm_morrey_norm(fc, 2.0, 3.0, 4.0, math.inf, nu_range=(-3, 3))
    ref_c = oracles.bbm_morrey(fc.values.ravel(), gridc.coords(), gridc.cell_volume,
                               2.0, 3.0, 4.0, math.inf, (-3, 3))
    devs["bbmorrey"] = abs(mine_c - ref_c) / ref_c
    # Herz local norm
    gridh = make_grid(1, -2.0, 2.0, 64)
    indh = (np.abs(gridh.coords()[:, 0]) < 1.0).astype(float).reshape(gridh.shape)
    fh = SampledField(gridh, indh)
    mine_h = herz_local_norm(fh, 2.0, 2.0, HerzWeight(1.0), 0.0)
    ref_h = oracles.herz_local(fh.values.ravel(), gridh.coords(), gridh.cell_volume,
                               2.0, 2.0, 1.0, 0.0)
    devs["herz"] = abs(mine_h - ref_h) / ref_h
    worst = max(devs.values())
    detail = ",".join(f"{k}={v:.1e}" for k, v in devs.items())
    return AcceptanceResult(
        "oracle-equivalence", "evaluators match naive double-loop oracles on small grids",
        worst <= 1e-12, detail, "1e-12", time.time() - t0)


def criterion_10() -> AcceptanceResult:
    t0 = time.time()
    cfg = ExperimentConfig(kind="weak-holder", grid=make_grid(1, 0.0, 1.0, 16), seed=20260809)
    summary, _ = run_weak_holder_suite(cfg, instances=100, gamma=1.0)
    ok = summary["passes"] == summary["instances"]
    return AcceptanceResult(
        "weak-holder", "100 random pair-field instances satisfy the weak Hoelder bound",
        ok, f"{summary['passes']}/{summary['instances']} (trivial {summary['trivial']})",
        "100 passes", time.time() - t0)


def criterion_11() -> AcceptanceResult:
    t0 = time.time()
    rng = np.random.default_rng(11)
    n = 2
    bound = (6.0 * math.sqrt(n)) ** n
    vball = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    failures = 0
    worst = 0.0
    for _ in range(200):
        c = rng.uniform(-10.0, 10.0, size=n)
        r = float(np.exp(rng.uniform(np.log(1e-3), np.log(1e3))))
        hit = dyadic_cover(c, r)
        if hit is None:
            failures += 1
            continue
        ratio = hit[1].volume / (vball * r ** n)
        worst = max(worst, ratio)
        if ratio > bound:
            failures += 1
    return AcceptanceResult(
        "dyadic-cover", "200 random balls each inside a shifted dyadic cube of bounded volume",
        failures == 0, f"failures {failures}, worst |Q|/|B| {worst:.2f}",
        f"|Q|/|B| <= {bound:.1f}, zero failures", time.time() - t0)


_EQ_FUNCTIONS_1D = (
    TestFunctionSpec("gaussian", sigma=1.0, center=0.0),
    TestFunctionSpec("gaussian", sigma=0.6, center=0.3),
    TestFunctionSpec("tent", width=1.5, center=0.0),
    TestFunctionSpec("bump", radius=1.2, center=0.0),
    TestFunctionSpec("polygauss", degree=1, sigma=1.0, center=0.0),
)

_EQ_SPACES_1D = (
    Lebesgue(2.0),
    WeightedLebesgue(3.0, a=-0.3, center=0.0),
    Lorentz(3.0, 2.5),
    Orlicz(OrliczFunction("two-power", 2.5, 3.0)),
    Morrey(2.0, 4.0),
    HerzLocal(2.5, 2.5, -0.2, xi=0.0),
)

_EQ_DOMAINS = ("full", "ball:radius=1.3", "halfspace:axis=0,offset=-0.4")
_EQ_GAMMAS = (1.0, 2.0, -1.0)


_EQ_POLICY = KernelPolicy(near_window=2.5, subsample=8, subsample_window=8.0)


def criterion_12(progress: bool = False) -> AcceptanceResult:
    t0 = time.time()
    p = 2.0
    worst_width = 0.0
    worst_delta = 0.0
    failures = []

    def run_suite(dim, npts, functions, spaces):
        nonlocal worst_width, worst_delta
        for dom_txt in _EQ_DOMAINS:
            for space in spaces:
                for gamma in _EQ_GAMMAS:
                    ratios = {}
                    for npts_k, scale in ((npts, "coarse"), (npts * 2, "fine")):
                        grid = make_grid(dim, -2.0, 2.0, npts_k)
                        dom = parse_domain(dom_txt, box=(grid.lo, grid.hi))
                        omega = None if dom_txt == "full" else mask(dom, grid)
                        for fn in functions:
                            f = sample(fn, grid)
                            ref = sobolev_norm(f, space, omega)
                            rep = bsvy_sup(f, BsvyParams(gamma, p), space, omega, _EQ_POLICY)
                            ratios.setdefault(fn.canonical(), {})[scale] = (
                                rep.sup / ref if ref > 0 else math.nan)
                    fine = [v["fine"] for v in ratios.values() if math.isfinite(v["fine"])]
                    width = max(fine) / min(fine)
                    worst_width = max(worst_width, width)
                    if width > 10.0:
                        failures.append(f"width {width:.1f} @ {space.canonical()},g={gamma},{dom_txt}")
                    for fname, v in ratios.items():
                        delta = abs(v["fine"] - v["coarse"]) / v["fine"]
                        worst_delta = max(worst_delta, delta)
                        if delta > 0.10:
                            failures.append(
                                f"delta {delta:.2f} @ {fname},{space.canonical()},g={gamma},{dom_txt}")
                    if progress:
                        print(f"  [{space.canonical()} g={gamma} {dom_txt}] width {width:.2f}")

    run_suite(1, 64, _EQ_FUNCTIONS_1D, _EQ_SPACES_1D)
    fn2 = tuple(TestFunctionSpec(s.kind, **s.params) for s in _EQ_FUNCTIONS_1D)
    run_suite(2, 16, fn2, (MixedNorm((2.5, 3.0)),))
    ok = not failures
    return AcceptanceResult(
        "equivalence-bracket",
        "sup/gradient-norm ratios bracketed (width <= 10) and refinement-stable (10%)",
        ok, f"worst width {worst_width:.2f}, worst refine delta {worst_delta:.3f};"
        + ("; ".join(failures[:3]) if failures else ""),
        "c2/c1 <= 10 and 10% under N -> 2N", time.time() - t0)


def criterion_13() -> AcceptanceResult:
    t0 = time.time()
    box = ((-1.0, -1.0), (1.0, 1.0))
    slit = DomainSpec("slitbox", box=box, axis=0, pos=0.1234, start=0.0)
    refuted = all(
        epsilon_falsifier(slit, e, 200, seed=13).verdict == "refuted"
        for e in (0.1, 0.5, 1.0))
    ball = DomainSpec("ball", center=(0.0, 0.0), radius=1.0)
    half = DomainSpec("halfspace", box=box, axis=0, offset=0.0)
    clean = all(
        epsilon_falsifier(dom, 0.5, 10_000, seed=13).verdict == "not-refuted"
        for dom in (ball, half))
    return AcceptanceResult(
        "epsilon-falsifier", "slit box refuted at eps in {0.1,0.5,1}; ball and half-space clean",
        refuted and clean, f"slit refuted: {refuted}, convex clean: {clean}",
        "refuted / not-refuted at 1e4 samples", time.time() - t0)


CRITERIA = {
    "1": criterion_1,
    "2": criterion_2,
    "3": criterion_3,
    "4": criterion_4,
    "5": criterion_5,
    "6": criterion_6,
    "7": criterion_7,
    "8": criterion_8,
    "9": criterion_9,
    "10": criterion_10,
    "11": criterion_11,
    "12": criterion_12,
    "13": criterion_13,
}


def run_acceptance(keys=None, verbose: bool = True) -> list[AcceptanceResult]:
    results = []
    for key in (keys or CRITERIA.keys()):
        res = CRITERIA[str(key)]()
        results.append(res)
        if verbose:
            print(res.line(), flush=True)
    return results
