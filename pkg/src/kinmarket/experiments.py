"""Run configuration, ensemble execution and result persistence.

A run alternates a collision step and a transport step per dt on the
unit market domain [-1, 1] x [0, 1], records moments at a fixed
cadence and classifies every record against the band W(t) +- R. The
Fokker-Planck mode drives the limit-equation solver through the same
recording path so both backends emit identical CSV schemas:

    run_<seed>.csv   t,m_w,m_x,V_w,mass,state
    ensemble.csv     t,m_w,m_x,V_w,mass          (ensemble average)
    bands.csv        t,M_n,sigma,r_plus,r_minus,bandwidth
    summary.json     percentages, seeds, config echo
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .analytics import bandwidth, bollinger, bubble_crash_percentages, classify
from .collision import CollisionConfig, collision_step
from .core import (
    ConstantBackground,
    DistributionGrid,
    ModelParams,
    NoiseModel,
    PiecewiseBackground,
    Record,
    Scenario,
    SinExpBackground,
    TimeSeries,
    background_W,
    moments,
    total_mass,
)
from .fokker_planck import FPConfig, FPState, default_dt, fp_moments, fp_step
from .transport import TransportWorkspace, transport_step

MODES = ("boltzmann", "fokker-planck")


@dataclass(frozen=True)
class InitSpec:
    """Initial density: uniform in x times a w-profile, total mass one.

    center = None places the gaussian bump at W(0).
    """

    kind: str = "gaussian"      # "gaussian" | "uniform"
    center: float | None = None
    sd: float = 0.1

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise ValueError(f"init.kind: unknown kind {self.kind!r}")
        if self.kind == "gaussian" and not self.sd > 0:
            raise ValueError("init.sd: must be > 0")


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    scenario: Scenario = field(default_factory=Scenario)
    collision: CollisionConfig = field(default_factory=CollisionConfig)
    init: InitSpec = field(default_factory=InitSpec)
    fp: FPConfig = field(default_factory=FPConfig)
    n_x: int = 70
    n_w: int = 70
    mode: str = "boltzmann"
    out_dir: str | None = None
    cadence: int = 1
    emit_bands: bool = False
    band_window: int = 30
    band_k: float = 2.0
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode: must be one of {MODES}")
        if self.cadence < 1:
            raise ValueError("cadence: must be >= 1")
        if self.n_x < 1 or self.n_w < 1:
            raise ValueError("grid: n_x and n_w must be >= 1")
        if self.workers < 1:
            raise ValueError("workers: must be >= 1")

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)


@dataclass
class EnsembleResult:
    seeds: list[int]
    runs: list[TimeSeries]
    mean_trajectory: np.ndarray        # columns t, m_w, m_x, V_w, mass
    pct_bubble: float                  # per-run percentages, averaged
    pct_crash: float
    per_run_pct: list[tuple[float, float]]


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _background_from_dict(d):
    kind = d.get("kind")
    if kind == "constant":
        return ConstantBackground(float(d["value"]))
    if kind == "sin-exp":
        return SinExpBackground(float(d["c0"]), float(d["c1"]),
                                float(d["omega"]), float(d["rate"]))
    if kind == "piecewise":
        return PiecewiseBackground(tuple((float(t), float(w))
                                         for t, w in d["points"]))
    raise ValueError(f"scenario.background.kind: unknown kind {kind!r}")


def _background_to_dict(bg):
    if isinstance(bg, ConstantBackground):
        return {"kind": "constant", "value": bg.value}
    if isinstance(bg, SinExpBackground):
        return {"kind": "sin-exp", "c0": bg.c0, "c1": bg.c1,
                "omega": bg.omega, "rate": bg.rate}
    if isinstance(bg, PiecewiseBackground):
        return {"kind": "piecewise", "points": [list(p) for p in bg.points]}
    raise ValueError(f"unknown background type {type(bg).__name__}")


def config_from_dict(doc: dict) -> RunConfig:
    """Build a validated RunConfig from a plain JSON document."""
    try:
        model_doc = dict(doc.get("model", {}))
        noise_doc = model_doc.pop("noise", None)
        noise = NoiseModel(**noise_doc) if noise_doc else NoiseModel()
        if "rule_thresholds" in model_doc:
            model_doc["rule_thresholds"] = tuple(model_doc["rule_thresholds"])
        model = ModelParams(noise=noise, **model_doc)

        scen_doc = dict(doc.get("scenario", {}))
        bg_doc = scen_doc.pop("background", None)
        background = _background_from_dict(bg_doc) if bg_doc \
            else ConstantBackground(0.5)
        scenario = Scenario(background=background, **scen_doc)

        collision = CollisionConfig(**doc.get("collision", {}))
        init = InitSpec(**doc.get("init", {}))
        fp = FPConfig(**doc.get("fp", {})) if "fp" in doc else FPConfig()
        grid = doc.get("grid", {})
        out = doc.get("output", {})
        return RunConfig(
            model=model, scenario=scenario, collision=collision, init=init,
            fp=fp,
            n_x=int(grid.get("n_x", 70)), n_w=int(grid.get("n_w", 70)),
            mode=doc.get("mode", "boltzmann"),
            out_dir=out.get("dir"),
            cadence=int(out.get("cadence", 1)),
            emit_bands=bool(out.get("emit_bands", False)),
            band_window=int(out.get("band_window", 30)),
            band_k=float(out.get("band_k", 2.0)),
            workers=int(doc.get("workers", 1)),
        )
    except (TypeError, KeyError) as exc:
        raise ValueError(f"config: {exc}") from exc


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run configuration file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return config_from_dict(doc)


def config_to_dict(cfg: RunConfig) -> dict:
    model = asdict(cfg.model)
    model["noise"] = asdict(cfg.model.noise)
    model["rule_thresholds"] = list(cfg.model.rule_thresholds)
    return {
        "model": model,
        "scenario": {
            "background": _background_to_dict(cfg.scenario.background),
            "horizon": cfg.scenario.horizon,
            "dt": cfg.scenario.dt,
            "seed": cfg.scenario.seed,
            "ensemble": cfg.scenario.ensemble,
        },
        "collision": asdict(cfg.collision),
        "init": asdict(cfg.init),
        "fp": asdict(cfg.fp),
        "grid": {"n_x": cfg.n_x, "n_w": cfg.n_w},
        "mode": cfg.mode,
        "output": {
            "dir": cfg.out_dir,
            "cadence": cfg.cadence,
            "emit_bands": cfg.emit_bands,
            "band_window": cfg.band_window,
            "band_k": cfg.band_k,
        },
        "workers": cfg.workers,
    }


# ---------------------------------------------------------------------------
# single run
# ---------------------------------------------------------------------------

def initial_grid(cfg: RunConfig) -> DistributionGrid:
    grid = DistributionGrid(cfg.n_x, cfg.n_w)
    if cfg.init.kind == "uniform":
        grid.values[:] = 1.0
    else:
        center = cfg.init.center
        if center is None:
            center = background_W(0.0, cfg.scenario)
        prof = np.exp(-0.5 * ((grid.w_centers - center) / cfg.init.sd) ** 2)
        grid.values[:] = prof[None, :]
    grid.values /= grid.values.sum() * grid.cell_area   # total mass one
    return grid


def _record(series, t, m_w, m_x, V_w, mass, W, R):
    series.append(Record(t=t, m_w=m_w, m_x=m_x, V_w=V_w, mass=mass,
                         state=classify(m_w, W, R)))


def run_single(cfg: RunConfig, seed: int) -> TimeSeries:
    """Execute one simulation; deterministic for a given (config, seed)."""
    if cfg.mode == "fokker-planck":
        return _run_single_fp(cfg)
    grid = initial_grid(cfg)
    rng = np.random.default_rng(seed)
    scen = cfg.scenario
    dt = scen.dt
    steps = int(round(scen.horizon / dt)) if scen.horizon else 0
    series = TimeSeries()
    ws = TransportWorkspace(grid)
    R = cfg.model.band_R
    for k in range(steps + 1):
        t = k * dt
        if k % cfg.cadence == 0:
            W = background_W(t, scen)
            m_w, m_x, V_w = moments(grid, W)
            _record(series, t, m_w, m_x, V_w, total_mass(grid), W, R)
        if k < steps:
            try:
                collision_step(grid, t, dt, scen, cfg.model, cfg.collision, rng)
                transport_step(grid, t, dt, scen, cfg.model, ws)
            except ValueError as exc:
                raise RuntimeError(f"run failed at step {k}: {exc}") from exc
    return series


def _run_single_fp(cfg: RunConfig) -> TimeSeries:
    fp_cfg = cfg.fp
    state = FPState(fp_cfg)
    center = cfg.init.center
    if center is None:
        center = background_W(0.0, cfg.scenario, 0.0, fp_cfg.w_max)
    if cfg.init.kind == "uniform":
        state.values[:, 1:-1] = 1.0
    else:
        prof = np.exp(-0.5 * ((state.w - center) / cfg.init.sd) ** 2)
        prof[0] = prof[-1] = 0.0
        state.values[:] = prof[None, :]
    mass0 = fp_moments(state, 0.5)[3]
    state.values /= mass0
    state.rho_frozen = 1.0

    scen = cfg.scenario
    p = cfg.model
    dt = fp_cfg.dt if fp_cfg.dt is not None \
        else default_dt(state, fp_cfg, p, scen, 1.0)
    steps = max(1, int(np.ceil(scen.horizon / dt))) if scen.horizon else 0
    if steps:
        dt = scen.horizon / steps
    series = TimeSeries()
    R = p.band_R
    for k in range(steps + 1):
        t = k * dt
        if k % cfg.cadence == 0:
            W = float(scen.background(t))
            m_w, m_x, V_w, mass = fp_moments(state, W)
            _record(series, t, m_w, m_x, V_w, max(mass, 1e-300), W, R)
        if k < steps:
            try:
                fp_step(state, t, fp_cfg, p, scen, dt)
            except ValueError as exc:
                raise RuntimeError(f"fp run failed at step {k}: {exc}") from exc
    return series


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

def _run_one(args):
    cfg, seed = args
    return seed, run_single(cfg, seed)


def run_ensemble(cfg: RunConfig) -> EnsembleResult:
    """Run scenario.ensemble independent simulations with seeds
    base, base+1, ...; the aggregate is independent of execution order."""
    base = cfg.scenario.seed
    seeds = [base + i for i in range(cfg.scenario.ensemble)]
    jobs = [(cfg, s) for s in seeds]
    if cfg.workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = dict(pool.map(_run_one, jobs))
    else:
        results = dict(map(_run_one, jobs))
    runs = [results[s] for s in seeds]          # seed order, not finish order

    lengths = {len(r) for r in runs}
    if len(lengths) != 1:
        raise RuntimeError(f"ensemble runs disagree on length: {lengths}")
    cols = []
    for r in runs:
        cols.append([(rec.t, rec.m_w, rec.m_x, rec.V_w, rec.mass)
                     for rec in r])
    arr = np.asarray(cols)                      # (E, T, 5)
    mean = arr.mean(axis=0)
    mean[:, 0] = arr[0, :, 0]                   # identical time grids

    per_run = [bubble_crash_percentages(r, cfg.scenario, cfg.model.band_R)
               for r in runs]
    pct_b = float(np.mean([p[0] for p in per_run]))
    pct_c = float(np.mean([p[1] for p in per_run]))
    return EnsembleResult(seeds=seeds, runs=runs, mean_trajectory=mean,
                          pct_bubble=pct_b, pct_crash=pct_c,
                          per_run_pct=[(float(a), float(b))
                                       for a, b in per_run])


def mean_series(res: EnsembleResult, cfg: RunConfig) -> TimeSeries:
    """Ensemble-averaged trajectory as a TimeSeries (reclassified)."""
    series = TimeSeries()
    R = cfg.model.band_R
    for t, m_w, m_x, V_w, mass in res.mean_trajectory:
        W = background_W(float(t), cfg.scenario)
        _record(series, float(t), float(m_w), float(m_x), float(V_w),
                float(mass), W, R)
    return series


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

RUN_HEADER = "t,m_w,m_x,V_w,mass,state"
ENSEMBLE_HEADER = "t,m_w,m_x,V_w,mass"
BANDS_HEADER = "t,M_n,sigma,r_plus,r_minus,bandwidth"


def _fmt(x: float) -> str:
    return repr(float(x))


def write_series_csv(path, series: TimeSeries):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(RUN_HEADER + "\n")
        for r in series:
            fh.write(f"{_fmt(r.t)},{_fmt(r.m_w)},{_fmt(r.m_x)},"
                     f"{_fmt(r.V_w)},{_fmt(r.mass)},{r.state}\n")


def emit_results(res: EnsembleResult, cfg: RunConfig) -> list[str]:
    """Write per-run CSVs, the averaged trajectory, optional Bollinger
    bands and a JSON summary; returns the created paths."""
    if not cfg.out_dir:
        raise ValueError("emit_results: no output directory configured")
    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = []

    for seed, series in zip(res.seeds, res.runs):
        path = os.path.join(cfg.out_dir, f"run_{seed}.csv")
        write_series_csv(path, series)
        paths.append(path)

    epath = os.path.join(cfg.out_dir, "ensemble.csv")
    with open(epath, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ENSEMBLE_HEADER + "\n")
        for t, m_w, m_x, V_w, mass in res.mean_trajectory:
            fh.write(f"{_fmt(t)},{_fmt(m_w)},{_fmt(m_x)},"
                     f"{_fmt(V_w)},{_fmt(mass)}\n")
    paths.append(epath)

    if cfg.emit_bands:
        series = mean_series(res, cfg)
        bands = bollinger(series, n=cfg.band_window, k=cfg.band_k)
        bw = bandwidth(bands, cfg.scenario)
        bpath = os.path.join(cfg.out_dir, "bands.csv")
        with open(bpath, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(BANDS_HEADER + "\n")
            for i in range(len(bands)):
                fh.write(f"{_fmt(bands.t[i])},{_fmt(bands.moving_avg[i])},"
                         f"{_fmt(bands.sigma[i])},{_fmt(bands.r_plus[i])},"
                         f"{_fmt(bands.r_minus[i])},{_fmt(bw[i])}\n")
        paths.append(bpath)

    pooled_b = float(np.mean([p[0] for p in res.per_run_pct]))
    pooled_c = float(np.mean([p[1] for p in res.per_run_pct]))
    summary = {
        "pct_bubble": res.pct_bubble,
        "pct_crash": res.pct_crash,
        "pct_bubble_pooled": pooled_b,
        "pct_crash_pooled": pooled_c,
        "per_run_pct": [list(p) for p in res.per_run_pct],
        "seeds": res.seeds,
        "config": config_to_dict(cfg),
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    spath = os.path.join(cfg.out_dir, "summary.json")
    with open(spath, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(spath)
    return paths


def run_and_emit(cfg: RunConfig) -> EnsembleResult:
    res = run_ensemble(cfg)
    if cfg.out_dir:
        emit_results(res, cfg)
    return res


def sweep(cfg: RunConfig, alphas, betas) -> list[dict]:
    """Run an ensemble per (alpha, beta) grid point; per-point outputs
    land in subdirectories, the table is returned for sweep.csv."""
    rows = []
    for beta in betas:
        for alpha in alphas:
            sub = cfg.with_(model=cfg.model.with_(alpha=alpha, beta=beta))
            if cfg.out_dir:
                tag = f"alpha_{alpha:g}_beta_{beta:g}"
                sub = sub.with_(out_dir=os.path.join(cfg.out_dir, tag))
            res = run_and_emit(sub)
            rows.append({"alpha": alpha, "beta": beta,
                         "pct_bubble": res.pct_bubble,
                         "pct_crash": res.pct_crash})
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        with open(os.path.join(cfg.out_dir, "sweep.csv"), "w",
                  encoding="utf-8", newline="\n") as fh:
            fh.write("alpha,beta,pct_bubble,pct_crash\n")
            for row in rows:
                fh.write(f"{row['alpha']:g},{row['beta']:g},"
                         f"{_fmt(row['pct_bubble'])},{_fmt(row['pct_crash'])}\n")
    return rows
