"""Config-driven experiment runners.

Configs are flat key-value text with section headers (INI); canonical spec
strings from the other modules are embedded verbatim.  Every runner returns a
:class:`~normlab.reports.RatioTable` whose rows reproduce from their recorded
provenance alone.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .domains import DomainSpec, mask, parse_domain
from .functionals import (
    DEFAULT_POLICY,
    BsvyParams,
    KernelPolicy,
    bbm_constant,
    bbm_limit_extrapolate,
    bbm_scaled_value,
    bsvy_sup,
    gagliardo_seminorm_sweep,
    sobolev_norm,
    weak_holder_check,
)
from .grid import Grid, SampledField, TestFunctionSpec, make_grid, parse_function, sample
from .reports import RatioTable
from .spaces import Lebesgue, Morrey, SpaceSpec, morrey_norm, norm, parse_space, weighted_lebesgue_norm
from .weights import Weight, hl_maximal, muckenhoupt_constant, parse_weight, power_weight

__all__ = [
    "ExperimentConfig",
    "load_config",
    "DEFAULT_S_GRID",
    "run_bbm_experiment",
    "run_bsvy_experiment",
    "run_morrey_duality_check",
    "run_weak_holder_suite",
    "run_norm_table",
    "run_apconst_table",
]

DEFAULT_S_GRID = (0.60, 0.70, 0.80, 0.875, 0.925, 0.95)


@dataclass
class ExperimentConfig:
    kind: str
    grid: Grid
    functions: list[TestFunctionSpec] = field(default_factory=list)
    spaces: list[SpaceSpec] = field(default_factory=list)
    domain: DomainSpec | None = None
    gammas: tuple[float, ...] = (1.0,)
    p: float = 1.0
    s_grid: tuple[float, ...] = DEFAULT_S_GRID
    policy: KernelPolicy = DEFAULT_POLICY
    seed: int = 0
    outdir: str = "out"
    formats: tuple[str, ...] = ("csv", "json")
    refine: bool = True
    extras: dict = field(default_factory=dict)

    def provenance(self) -> dict:
        return {
            "kind": self.kind,
            "grid": self.grid.describe(),
            "functions": [f.canonical() for f in self.functions],
            "spaces": [s.canonical() for s in self.spaces],
            "domain": self.domain.canonical() if self.domain else "full-grid",
            "gammas": list(self.gammas),
            "p": self.p,
            "s_grid": list(self.s_grid),
            "policy": self.policy.canonical(),
            "seed": self.seed,
        }


def load_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    exp = cp["experiment"]
    g = cp["grid"]
    dim = g.getint("n")

    def vec(section, key, cast=float):
        raw = section.get(key)
        parts = raw.split()
        vals = [cast(v) for v in parts]
        return vals[0] if len(vals) == 1 else vals

    grid = make_grid(dim, vec(g, "lo"), vec(g, "hi"), vec(g, "points", cast=int))
    cfg = ExperimentConfig(kind=exp.get("kind"), grid=grid)
    cfg.seed = exp.getint("seed", fallback=0)
    if "functions" in cp:
        cfg.functions = [parse_function(line) for line in cp["functions"]["specs"].split("\n") if line.strip()]
    if "spaces" in cp:
        cfg.spaces = [parse_space(line) for line in cp["spaces"]["specs"].split("\n") if line.strip()]
    if "domain" in cp and cp["domain"].get("spec", "").strip():
        cfg.domain = parse_domain(cp["domain"]["spec"], box=(grid.lo, grid.hi))
    if "sweeps" in cp:
        sw = cp["sweeps"]
        if "gammas" in sw:
            cfg.gammas = tuple(float(v) for v in sw["gammas"].split())
        cfg.p = sw.getfloat("p", fallback=cfg.p)
        if "s_grid" in sw:
            cfg.s_grid = tuple(float(v) for v in sw["s_grid"].split())
    if "policy" in cp:
        po = cp["policy"]
        cfg.policy = KernelPolicy(
            diagonal=po.get("diagonal", DEFAULT_POLICY.diagonal),
            near_window=po.getfloat("near_window", fallback=DEFAULT_POLICY.near_window),
            subsample=po.getint("subsample", fallback=DEFAULT_POLICY.subsample),
            subsample_window=po.getfloat("subsample_window",
                                         fallback=DEFAULT_POLICY.subsample_window),
        )
    if "output" in cp:
        ou = cp["output"]
        cfg.outdir = ou.get("dir", cfg.outdir)
        if "formats" in ou:
            cfg.formats = tuple(ou["formats"].split())
        cfg.refine = ou.getboolean("refine", fallback=cfg.refine)
    if "extras" in cp:
        cfg.extras = dict(cp["extras"])
    return cfg


def _domain_mask(cfg: ExperimentConfig, grid: Grid):
    if cfg.domain is None:
        return None
    dom = DomainSpec(cfg.domain.kind, box=(grid.lo, grid.hi), **cfg.domain.params)
    return mask(dom, grid)


def _flags(tokens) -> str:
    return ";".join(t for t in tokens if t)


# ---------------------------------------------------------------------------
# gradient-limit experiment
# ---------------------------------------------------------------------------


def _bbm_extrapolated(f: SampledField, cfg: ExperimentConfig, space: SpaceSpec, omega) -> float:
    """Extrapolated s -> 1 limit of the scaled fractional quantity in X-norm form."""
    if isinstance(space, Lebesgue) and space.p == cfg.p:
        semis = gagliardo_seminorm_sweep(f, cfg.s_grid, cfg.p, omega, cfg.policy)
        pairs = [(s, (1.0 - s) ** (1.0 / cfg.p) * g) for s, g in zip(cfg.s_grid, semis)]
    else:
        pairs = [(s, bbm_scaled_value(f, s, cfg.p, space, omega, cfg.policy)) for s in cfg.s_grid]
    return bbm_limit_extrapolate(pairs)[0]


def run_bbm_experiment(cfg: ExperimentConfig) -> RatioTable:
    """Per (function, space): sweep s, extrapolate, compare with the closed-form
    limit constant times the gradient norm."""
    table = RatioTable(provenance=cfg.provenance())
    omega = _domain_mask(cfg, cfg.grid)
    const = bbm_constant(cfg.p, cfg.grid.dim) ** (1.0 / cfg.p)
    for fn in cfg.functions:
        f = sample(fn, cfg.grid)
        for space in cfg.spaces:
            ref = const * sobolev_norm(f, space, omega)
            value = _bbm_extrapolated(f, cfg, space, omega)
            tokens = []
            if cfg.refine:
                fine_grid = cfg.grid.refine(2)
                f2 = sample(fn, fine_grid)
                omega2 = _domain_mask(cfg, fine_grid)
                v2 = _bbm_extrapolated(f2, cfg, space, omega2)
                delta = abs(v2 - value) / abs(v2) if v2 != 0 else 0.0
                tokens.append(f"refine_delta={delta:.3e}")
                value = v2
                ref = const * sobolev_norm(f2, space, omega2)
            table.add_row(
                experiment="bbm",
                function=fn.canonical(),
                space=space.canonical(),
                domain=cfg.domain.canonical() if cfg.domain else "full-grid",
                n=cfg.grid.dim,
                p=cfg.p,
                gamma_or_s=1.0,
                value=value,
                reference=ref,
                flags=_flags(tokens),
                grid=cfg.grid.describe(),
                seed=cfg.seed,
            )
    return table


# ---------------------------------------------------------------------------
# level-set-functional experiment
# ---------------------------------------------------------------------------


def run_bsvy_experiment(cfg: ExperimentConfig) -> tuple[RatioTable, dict]:
    """Per (function, space, gamma): sup of the level-set functional against
    the gradient norm; per-configuration ratio brackets aggregated."""
    table = RatioTable(provenance=cfg.provenance())
    brackets: dict[tuple[str, float], list[float]] = {}
    grids = [cfg.grid] + ([cfg.grid.refine(2)] if cfg.refine else [])
    base_rows: dict[tuple, float] = {}
    for gi, grid in enumerate(grids):
        omega = _domain_mask(cfg, grid)
        for fn in cfg.functions:
            f = sample(fn, grid)
            for space in cfg.spaces:
                ref = sobolev_norm(f, space, omega)
                for gamma in cfg.gammas:
                    params = BsvyParams(gamma, cfg.p)
                    rep = bsvy_sup(f, params, space, omega, cfg.policy)
                    tokens = list(rep.flags)
                    key = (fn.canonical(), space.canonical(), gamma)
                    if gi == 0:
                        base_rows[key] = rep.sup / ref if ref > 0 else math.nan
                        if len(grids) > 1:
                            continue  # emit rows from the fine grid only
                    if gi == len(grids) - 1:
                        ratio = rep.sup / ref if ref > 0 else math.nan
                        if len(grids) > 1 and key in base_rows and math.isfinite(base_rows[key]):
                            delta = abs(ratio - base_rows[key]) / abs(ratio) if ratio else 0.0
                            tokens.append(f"refine_delta={delta:.3e}")
                        table.add_row(
                            experiment="bsvy",
                            function=fn.canonical(),
                            space=space.canonical(),
                            domain=cfg.domain.canonical() if cfg.domain else "full-grid",
                            n=grid.dim,
                            p=cfg.p,
                            gamma_or_s=gamma,
                            value=rep.sup,
                            reference=ref,
                            flags=_flags(tokens),
                            grid=grid.describe(),
                            seed=cfg.seed,
                        )
                        if ref > 0:
                            brackets.setdefault((space.canonical(), gamma), []).append(rep.sup / ref)
    summary = {}
    for (space_txt, gamma), ratios in brackets.items():
        c1, c2 = min(ratios), max(ratios)
        summary[f"{space_txt}|gamma={gamma}"] = {
            "c1": c1,
            "c2": c2,
            "width": c2 / c1 if c1 > 0 else math.inf,
        }
    return table, summary


# ---------------------------------------------------------------------------
# Morrey duality check
# ---------------------------------------------------------------------------


def run_morrey_duality_check(cfg: ExperimentConfig, theta: float | None = None,
                             cube_count: int = 20) -> RatioTable:
    """Compare the ball-supremum Morrey norm with the cube supremum of
    weighted norms under maximal-function weights (M 1_Q)^theta."""
    table = RatioTable(provenance=cfg.provenance())
    grid = cfg.grid
    omega = _domain_mask(cfg, grid)
    rng = np.random.default_rng(cfg.seed)
    for space in cfg.spaces:
        if not isinstance(space, Morrey):
            raise ValueError("morrey-duality needs Morrey space specs")
        r, alpha = space.r, space.alpha
        th = theta if theta is not None else 0.5 * ((1 - r / alpha) + 1.0)
        if not (1 - r / alpha < th < 1):
            raise ValueError("theta must lie in (1 - r/alpha, 1)")
        for fn in cfg.functions:
            f = sample(fn, grid)
            lhs = morrey_norm(f, r, alpha, omega)
            best = 0.0
            a1_consts = []
            span = min(b - a for a, b in zip(grid.lo, grid.hi))
            for _ in range(cube_count):
                c = rng.uniform(grid.lo, grid.hi)
                half = rng.uniform(0.05, 0.45) * span
                ind = np.all(np.abs(grid.coords() - c) <= half, axis=1).reshape(grid.shape)
                if not ind.any():
                    continue
                mq = hl_maximal(ind.astype(float), grid)
                w = mq ** th
                qvol = np.count_nonzero(ind) * grid.cell_volume
                rhs = qvol ** (1.0 / alpha - 1.0 / r) * weighted_lebesgue_norm(f, r, w, omega)
                best = max(best, rhs)
                a1_consts.append(muckenhoupt_constant(Weight(grid, w, "maximal-power"), 1.0))
            tokens = []
            if a1_consts:
                spread = max(a1_consts) / min(a1_consts)
                tokens.append(f"a1_spread={spread:.3f}")
                tokens.append(f"a1_max={max(a1_consts):.3f}")
            table.add_row(
                experiment="morrey-duality",
                function=fn.canonical(),
                space=space.canonical(),
                domain=cfg.domain.canonical() if cfg.domain else "full-grid",
                n=grid.dim,
                p=r,
                gamma_or_s=th,
                value=best,
                reference=lhs,
                flags=_flags(tokens),
                grid=grid.describe(),
                seed=cfg.seed,
            )
    return table


# ---------------------------------------------------------------------------
# weak-Hoelder property suite
# ---------------------------------------------------------------------------


def run_weak_holder_suite(cfg: ExperimentConfig, instances: int = 100,
                          gamma: float = 1.0) -> tuple[dict, RatioTable]:
    """Random pair fields through the weak-type Hoelder inequality check."""
    grid = cfg.grid
    omega = _domain_mask(cfg, grid)
    rng = np.random.default_rng(cfg.seed)
    total = grid.total_cells
    table = RatioTable(provenance=cfg.provenance())
    passes = 0
    trivial = 0
    min_margin = math.inf
    for i in range(instances):
        F = rng.lognormal(sigma=1.0, size=(total, total))
        if i % 10 == 9:
            G = np.zeros((total, total))
        else:
            G = rng.lognormal(sigma=1.0, size=(total, total))
        p = float(rng.uniform(1.5, 3.0))
        a = float(rng.uniform(-0.4, 0.4))
        w = power_weight(grid, a, center=tuple(rng.uniform(grid.lo, grid.hi))).samples
        res = weak_holder_check(F, G, gamma, w, p, omega, grid)
        if res.rhs == 0.0 and res.lhs == 0.0:
            trivial += 1
            passed = True
        else:
            passed = res.passed
            min_margin = min(min_margin, res.margin)
        passes += passed
        table.add_row(
            experiment="weak-holder",
            function=f"instance-{i}",
            space=f"pairs:p={p!r}",
            domain=cfg.domain.canonical() if cfg.domain else "full-grid",
            n=grid.dim,
            p=p,
            gamma_or_s=gamma,
            value=res.lhs,
            reference=res.rhs,
            flags=_flags(["pass" if passed else "fail"]),
            grid=grid.describe(),
            seed=cfg.seed,
        )
    summary = {
        "instances": instances,
        "passes": passes,
        "trivial": trivial,
        "min_margin": min_margin if math.isfinite(min_margin) else None,
    }
    return summary, table


# ---------------------------------------------------------------------------
# plain norm and A_p tables
# ---------------------------------------------------------------------------


def run_norm_table(cfg: ExperimentConfig) -> RatioTable:
    table = RatioTable(provenance=cfg.provenance())
    omega = _domain_mask(cfg, cfg.grid)
    for fn in cfg.functions:
        f = sample(fn, cfg.grid)
        for space in cfg.spaces:
            table.add_row(
                experiment="norm",
                function=fn.canonical(),
                space=space.canonical(),
                domain=cfg.domain.canonical() if cfg.domain else "full-grid",
                n=cfg.grid.dim,
                p="",
                gamma_or_s="",
                value=norm(f, space, omega),
                reference="",
                ratio="",
                grid=cfg.grid.describe(),
                seed=cfg.seed,
            )
    return table


def run_apconst_table(cfg: ExperimentConfig, weight_specs: list[str], ps=(1.0, 2.0)) -> RatioTable:
    table = RatioTable(provenance=cfg.provenance())
    for wtxt in weight_specs:
        w = parse_weight(wtxt, cfg.grid)
        for p in ps:
            est = muckenhoupt_constant(w, p, return_witness=True)
            table.add_row(
                experiment="apconst",
                function=w.source,
                space=f"Ap:p={p!r}",
                domain="full-grid",
                n=cfg.grid.dim,
                p=p,
                gamma_or_s="",
                value=est.value,
                reference="",
                ratio="",
                flags=_flags([f"cube={est.cube_lo}..{est.cube_hi}"]),
                grid=cfg.grid.describe(),
                seed=cfg.seed,
            )
    return table
