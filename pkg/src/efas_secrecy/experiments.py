"""Named parameter sweeps that write plot-ready CSV files and a JSON run summary."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .beamforming import eve_conditional_distribution
from .channel_model import SystemConfig, linear_to_db, validate_config
from .config_io import config_to_dict, serialize_config
from .errors import ConfigValidationError
from .montecarlo import (
    CDF_DRAWS_DEFAULT,
    SWEEP_DRAWS_DEFAULT,
    binomial_stderr,
    conditional_eve_samples,
    empirical_conditional_cdf,
    empirical_esr,
    empirical_sop,
    fixed_estimate,
    simulate_channel_statistics,
)
from .secrecy_analytic import esr, eve_cdf, eve_pdf, eve_sinr_law, high_snr_limits, optimize_alpha, sop

__all__ = [
    "CSV_COLUMNS",
    "EXPERIMENTS",
    "METHODS",
    "ExperimentDef",
    "ExperimentSpec",
    "Row",
    "RunResult",
    "default_spec",
    "run",
]

METHODS = ("analytic", "monte-carlo")
CSV_COLUMNS = ("axis", "value", "stderr", "method", "seed", "series", "error")
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3
PDF_WINDOW = 0.05


@dataclass(frozen=True)
class ExperimentDef:
    """Axis, default grid and series overrides of a named experiment."""

    axis: str
    grid: tuple
    series: tuple  # (label, overrides) pairs
    kind: str


def _theta(*vals):
    return tuple((f"theta_a={v:g}", {"alpha": 1.0 - v}) for v in vals)


def _rho(*vals):
    return tuple((f"rho={v:g}", {"rho": v}) for v in vals)


def _alpha(*vals):
    return tuple((f"alpha={v:g}", {"alpha": v}) for v in vals)


_BASE = (("base", {}),)
_T_GRID = tuple(float(x) for x in np.round(np.geomspace(0.01, 30.0, 20), 6))

EXPERIMENTS: dict[str, ExperimentDef] = {
    "eve-cdf": ExperimentDef("t", _T_GRID, _rho(0.0, 0.3, 0.6), "cdf"),
    "eve-pdf": ExperimentDef("t", _T_GRID, _rho(0.0, 0.3, 0.6), "pdf"),
    "sop-vs-power": ExperimentDef("P_dB", tuple(range(0, 45, 5)), _theta(0.0, 0.1, 0.3), "sop"),
    "esr-vs-power": ExperimentDef("P_dB", tuple(range(0, 55, 5)), _alpha(0.7, 0.9, 1.0), "esr"),
    "esr-vs-beta": ExperimentDef("beta_b", tuple(float(b) for b in range(1, 11)), _theta(0.0, 0.1, 0.3), "esr"),
    "esr-vs-alpha": ExperimentDef("alpha", tuple(float(a) for a in np.round(np.arange(0.02, 0.99, 0.02), 2)),
                                  _rho(0.0, 0.6), "esr"),
    "esr-vs-rho": ExperimentDef("rho", (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8), _BASE, "esr"),
    "esr-vs-antennas": ExperimentDef("M", (4, 8, 16, 32, 64), _BASE, "esr"),
    "asymptote": ExperimentDef("P_dB", tuple(range(10, 65, 10)), _alpha(0.7, 0.9, 1.0), "asymptote"),
    "optimize-alpha": ExperimentDef("rho", (0.0, 0.3, 0.6), _BASE, "optimize"),
}

_SPECIAL_AXES = {"t", "P_dB", "beta_b"}
_INT_AXES = {"M", "Tc", "tau_p", "seed"}
_FLOAT_AXES = {"rho_p", "sigma2", "P", "alpha", "R_th", "rho", "beta_e"}


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully resolved experiment request.

    Parameters
    ----------
    name : str
        One of :data:`EXPERIMENTS`.
    axis : str
        Swept variable; a numeric ``SystemConfig`` field, ``P_dB``,
        ``beta_b`` (point mass) or ``t`` for the eavesdropper-law experiments.
    grid : tuple of float
        Nonempty, strictly increasing.
    base : SystemConfig
    methods : tuple of str
        Nonempty subset of ``('analytic', 'monte-carlo')``.
    output_dir : Path
    samples : int, optional
        Monte-Carlo draws per point (defaults depend on the experiment).
    series : tuple
        ``(label, overrides)`` pairs; each series is swept separately.
    """

    name: str
    axis: str
    grid: tuple
    base: SystemConfig
    methods: tuple
    output_dir: Path
    samples: int | None = None
    workers: int = 1
    series: tuple = _BASE

    def validate(self) -> "ExperimentSpec":
        errs = []
        if self.name not in EXPERIMENTS:
            errs.append(("experiment", f"unknown experiment {self.name!r}; choose from {sorted(EXPERIMENTS)}"))
        if not self.grid:
            errs.append(("grid", "must be nonempty"))
        elif any(not math.isfinite(float(g)) for g in self.grid):
            errs.append(("grid", "entries must be finite"))
        elif any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            errs.append(("grid", "must be strictly increasing"))
        if self.axis not in _SPECIAL_AXES | _INT_AXES | _FLOAT_AXES:
            errs.append(("axis", f"{self.axis!r} is not a numeric configuration field"))
        elif self.name in EXPERIMENTS and (self.axis == "t") != (EXPERIMENTS[self.name].kind in ("cdf", "pdf")):
            errs.append(("axis", f"axis {self.axis!r} does not fit experiment {self.name!r}"))
        if self.axis == "t" and self.grid and min(self.grid) < 0:
            errs.append(("grid", "thresholds must be >= 0"))
        if self.axis in _INT_AXES and any(float(g) != int(g) for g in self.grid):
            errs.append(("grid", f"{self.axis} takes integer values"))
        if not self.methods:
            errs.append(("methods", "need at least one method"))
        for m in self.methods:
            if m not in METHODS:
                errs.append(("methods", f"unknown method {m!r}; choose from {METHODS}"))
        if len(set(self.methods)) != len(self.methods):
            errs.append(("methods", "duplicate method"))
        if self.samples is not None and self.samples < 10_000:
            errs.append(("samples", "need at least 10000 Monte-Carlo draws"))
        if self.workers < 1:
            errs.append(("workers", "must be >= 1"))
        if errs:
            raise ConfigValidationError(errs)
        validate_config(self.base)
        for _, cfg in self.point_configs():
            validate_config(cfg)
        return self

    def series_config(self, overrides: dict) -> SystemConfig:
        return self.base.with_(**overrides)

    def point_config(self, cfg: SystemConfig, x) -> SystemConfig:
        if self.axis == "t":
            return cfg
        if self.axis in _INT_AXES:
            return cfg.with_(**{self.axis: int(x)})
        return cfg.with_(**{self.axis: float(x)})

    def point_configs(self):
        for label, ov in self.series:
            s = self.series_config(ov)
            for x in self.grid:
                yield label, self.point_config(s, x)


def default_spec(name: str, base: SystemConfig | None = None, output_dir=".", methods=METHODS, **kw) -> ExperimentSpec:
    """Spec for a named experiment with its default axis, grid and series."""
    if name not in EXPERIMENTS:
        raise ConfigValidationError([("experiment", f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")])
    d = EXPERIMENTS[name]
    kw.setdefault("grid", d.grid)
    kw.setdefault("series", d.series)
    return ExperimentSpec(name, d.axis, tuple(kw.pop("grid")), base or SystemConfig(), tuple(methods),
                          Path(output_dir), **kw)


@dataclass
class Row:
    axis: float
    value: float | None
    stderr: float | None
    method: str
    seed: int
    series: str
    error: str = ""


@dataclass
class RunResult:
    status: int
    files: list
    rows: dict
    summary: dict
    checks: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Point evaluators


class _StatsCache:
    """Common random numbers: one batch of draws per power-independent configuration."""

    def __init__(self, n: int, workers: int):
        self.n, self.workers, self.store = n, workers, {}

    def get(self, cfg: SystemConfig):
        key = serialize_config(cfg.with_(P=1.0, alpha=0.5, R_th=0.0))
        if key not in self.store:
            self.store[key] = simulate_channel_statistics(cfg, self.n, workers=self.workers)
        return self.store[key]


def _law(cfg: SystemConfig):
    h = fixed_estimate(cfg)
    beta_b = cfg.beta_b_dist.mean
    stats = eve_conditional_distribution(h, beta_b, cfg.effective_beta_e, cfg)
    return h, eve_sinr_law(stats, cfg.P_s, cfg.P_a, cfg.sigma2)


def _law_rows(spec: ExperimentSpec, label: str, cfg: SystemConfig, method: str, kind: str) -> list[Row]:
    grid = np.asarray(spec.grid, dtype=float)
    h, law = _law(cfg)
    rows = []
    if method == "analytic":
        if kind == "cdf":
            vals = np.atleast_1d(eve_cdf(grid, law))
            rows += [Row(x, float(v), 0.0, method, cfg.seed, label) for x, v in zip(grid, vals)]
        else:
            for variant, tag in (("exact-derivative", label), ("paper-eq63", f"{label},paper-eq63")):
                vals = np.atleast_1d(eve_pdf(grid, law, variant))
                rows += [Row(x, float(v), 0.0, method, cfg.seed, tag) for x, v in zip(grid, vals)]
        return rows
    n = spec.samples or CDF_DRAWS_DEFAULT
    samples = conditional_eve_samples(cfg, h, n, workers=spec.workers)
    if kind == "cdf":
        for x, e in zip(grid, empirical_conditional_cdf(cfg, h, grid, samples=samples)):
            rows.append(Row(x, e.value, e.stderr, method, cfg.seed, label))
        return rows
    srt = np.sort(samples)
    for x in grid:
        half = PDF_WINDOW * x if x > 0 else PDF_WINDOW
        lo, hi = max(x - half, 0.0), x + half
        k = np.searchsorted(srt, hi, side="right") - np.searchsorted(srt, lo, side="right")
        width = hi - lo
        rows.append(Row(x, float(k / n / width), float(binomial_stderr(k, n) / width), method, cfg.seed, label))
    return rows


def _metric_row(spec, kind, label, x, cfg, method, cache) -> list[Row]:
    if kind == "sop":
        if method == "analytic":
            r = sop(cfg, workers=spec.workers)
            return [Row(x, r.value, r.stderr, method, cfg.seed, label)]
        e = empirical_sop(cfg, stats=cache.get(cfg))
        return [Row(x, e.value, e.stderr, method, cfg.seed, label)]
    if kind in ("esr", "asymptote"):
        if method == "analytic":
            r = esr(cfg, workers=spec.workers)
            rows = [Row(x, r.value, r.stderr, method, cfg.seed, label)]
        else:
            e = empirical_esr(cfg, stats=cache.get(cfg))
            rows = [Row(x, e.value, e.stderr, method, cfg.seed, label)]
        if kind == "asymptote" and method == "analytic":
            lim = high_snr_limits(cfg, workers=spec.workers)
            rows.append(Row(x, lim.value, lim.esr_inf.stderr, method, cfg.seed, f"{label},limit"))
        return rows
    # optimize
    if method == "analytic":
        opt = optimize_alpha(cfg)
        if opt.degenerate:
            raise ArithmeticError("ESR is zero over the whole alpha grid")
        return [Row(x, opt.alpha_star, 0.0, method, cfg.seed, "alpha_star"),
                Row(x, opt.esr_star, 0.0, method, cfg.seed, "esr_star")]
    st = cache.get(cfg)
    alphas = np.round(np.arange(0.01, 1.0, 0.01), 2)
    ests = [empirical_esr(cfg.with_(alpha=float(a)), stats=st) for a in alphas]
    i = int(np.argmax([e.value for e in ests]))
    return [Row(x, float(alphas[i]), 0.005, method, cfg.seed, "alpha_star"),
            Row(x, ests[i].value, ests[i].stderr, method, cfg.seed, "esr_star")]


def _evaluate(spec: ExperimentSpec, method: str) -> list[Row]:
    kind = EXPERIMENTS[spec.name].kind
    cache = _StatsCache(spec.samples or SWEEP_DRAWS_DEFAULT, spec.workers)
    rows: list[Row] = []
    for label, ov in spec.series:
        scfg = spec.series_config(ov)
        if kind in ("cdf", "pdf"):
            try:
                rows += _law_rows(spec, label, scfg, method, kind)
            except Exception as exc:  # noqa: BLE001 - reported as error rows
                rows += [Row(float(x), None, None, method, scfg.seed, label, _describe(exc)) for x in spec.grid]
            continue
        for x in spec.grid:
            cfg = spec.point_config(scfg, x)
            try:
                rows += _metric_row(spec, kind, label, float(x), cfg, method, cache)
            except Exception as exc:  # noqa: BLE001 - reported as error rows
                rows.append(Row(float(x), None, None, method, cfg.seed, label, _describe(exc)))
    for r in rows:
        if not r.error and not (_finite(r.value) and _finite(r.stderr)):
            r.value, r.stderr, r.error = None, None, "non-finite result"
    return rows


def _finite(v) -> bool:
    return v is not None and math.isfinite(v)


def _describe(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}".replace("\n", " ")


# ---------------------------------------------------------------------------
# Trend and agreement checks on emitted data


def _curves(rows: list[Row]) -> dict:
    out: dict = {}
    for r in rows:
        if not r.error:
            out.setdefault(r.series, []).append(r)
    return out


def _check(spec: ExperimentSpec, rows: dict) -> list[tuple[str, bool, str]]:
    """``(name, passed, detail)`` for every assertion that applies to this run."""
    res = []
    main = rows.get("analytic") or rows.get("monte-carlo") or []
    slack = 0.0 if "analytic" in rows else 3.0
    curves = _curves(main)

    def vals(label):
        c = curves.get(label, [])
        return np.array([r.axis for r in c]), np.array([r.value for r in c]), np.array([r.stderr for r in c])

    def monotone(label, sign, strict=False):
        x, v, s = vals(label)
        if v.size < 2:
            return True
        d = sign * np.diff(v) + slack * np.hypot(s[1:], s[:-1])
        return bool(np.all(d > 0) if strict else np.all(d >= -1e-12))

    if "analytic" in rows and "monte-carlo" in rows and spec.name != "optimize-alpha":
        an = {(r.series, r.axis): r for r in rows["analytic"] if not r.error}
        worst = 0.0
        for r in rows["monte-carlo"]:
            a = an.get((r.series, r.axis))
            if r.error or a is None:
                continue
            sig = math.hypot(a.stderr, r.stderr)
            z = abs(a.value - r.value) / sig if sig > 0 else (0.0 if a.value == r.value else math.inf)
            worst = max(worst, z)
        if spec.name != "eve-pdf":
            res.append(("cross-method agreement within 3 sigma", worst <= 3.0, f"max |z| = {worst:.2f}"))

    name = spec.name
    if name in ("eve-cdf",):
        ok = all(monotone(lbl, +1) for lbl in curves)
        res.append(("cdf curves nondecreasing", ok, ""))
        tails = [(float(ov.get("rho", spec.base.rho)), float(1.0 - vals(lbl)[1][-1])) for lbl, ov in spec.series if lbl in curves]
        tails.sort()
        ordered = all(b[1] >= a[1] for a, b in zip(tails, tails[1:]))
        detail = ", ".join(f"rho={r:g}: {v:.3g}" for r, v in tails)
        res.append(("upper tail heavier for larger rho", ordered, detail))
    elif name == "sop-vs-power":
        for lbl, ov in spec.series:
            alpha = ov.get("alpha", spec.base.alpha)
            if lbl not in curves:
                continue
            if alpha < 1.0:
                res.append((f"{lbl}: nonincreasing in P", monotone(lbl, -1), ""))
            else:
                v = vals(lbl)[1]
                res.append((f"{lbl}: rises again at high P", bool(v[-1] > v.min()), f"last {v[-1]:.4g}, min {v.min():.4g}"))
    elif name in ("esr-vs-power", "asymptote"):
        for lbl, ov in spec.series:
            if lbl in curves and ov.get("alpha", spec.base.alpha) == 1.0:
                v = vals(lbl)[1]
                res.append((f"{lbl}: collapses at high P", bool(v[-1] < 0.2 * v.max()), f"last {v[-1]:.4g}, max {v.max():.4g}"))
    elif name == "esr-vs-beta":
        for lbl in curves:
            res.append((f"{lbl}: increasing in beta_b", monotone(lbl, +1, strict=True), ""))
    elif name == "esr-vs-rho":
        for lbl in curves:
            res.append((f"{lbl}: nonincreasing in rho", monotone(lbl, -1), ""))
    elif name == "esr-vs-antennas":
        for lbl in curves:
            res.append((f"{lbl}: nondecreasing in M", monotone(lbl, +1), ""))
    elif name == "esr-vs-alpha" and abs(spec.base.P - 100.0) < 1e-9:
        bands = {0.0: (0.87, 0.97), 0.6: (0.71, 0.81)}
        for lbl, ov in spec.series:
            rho = float(ov.get("rho", spec.base.rho))
            if lbl in curves and rho in bands:
                x, v, _ = vals(lbl)
                best = float(x[int(np.argmax(v))])
                lo, hi = bands[rho]
                res.append((f"{lbl}: argmax in [{lo}, {hi}]", lo <= best <= hi, f"argmax {best:g}"))
    return res


# ---------------------------------------------------------------------------
# Output


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def rows_to_csv(rows: list[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.axis), _fmt(r.value), _fmt(r.stderr), r.method, r.seed, r.series, r.error])
    return buf.getvalue()


def input_hash(spec: ExperimentSpec) -> str:
    """Git blob hash of the canonical experiment inputs."""
    payload = json.dumps(
        {
            "experiment": spec.name,
            "axis": spec.axis,
            "grid": [float(g) for g in spec.grid],
            "series": [[lbl, ov] for lbl, ov in spec.series],
            "methods": list(spec.methods),
            "samples": spec.samples,
            "workers": spec.workers,
            "config": serialize_config(spec.base),
        },
        sort_keys=True,
    ).encode()
    return hashlib.sha1(b"blob %d\0" % len(payload) + payload).hexdigest()


def run(spec: ExperimentSpec, check: bool = False) -> RunResult:
    """Evaluate every requested method and write CSV files plus ``<name>__summary.json``.

    Returns
    -------
    RunResult
        ``status`` is 0 on success, 2 if any point failed numerically and 3
        if ``check`` is set and an assertion on the emitted data failed.
        Validation problems raise :class:`ConfigValidationError` before any
        work is done.
    """
    spec = spec.validate()
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rows, files = {}, []
    for method in spec.methods:
        rows[method] = _evaluate(spec, method)
        path = out / f"{spec.name}__{method}.csv"
        path.write_bytes(rows_to_csv(rows[method]).encode("utf-8"))
        files.append(str(path))
    wall = time.perf_counter() - t0
    n_err = sum(1 for rs in rows.values() for r in rs if r.error)
    status = EXIT_NUMERICAL if n_err else EXIT_OK
    checks = _check(spec, rows) if check else []
    if check and status == EXIT_OK and not all(ok for _, ok, _ in checks):
        status = EXIT_CHECK
    summary = {
        "experiment": spec.name,
        "axis": spec.axis,
        "grid": [float(g) for g in spec.grid],
        "series": [{"label": lbl, "overrides": ov} for lbl, ov in spec.series],
        "methods": list(spec.methods),
        "resolved_config": config_to_dict(spec.base),
        "P_dB": float(linear_to_db(spec.base.P)),
        "input_hash": input_hash(spec),
        "seeds": sorted({r.seed for rs in rows.values() for r in rs}),
        "samples": spec.samples,
        "workers": spec.workers,
        "wall_time_s": wall,
        "files": files,
        "error_rows": n_err,
        "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in checks],
        "status": status,
        "version": __version__,
    }
    spath = out / f"{spec.name}__summary.json"
    spath.write_text(json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8")
    files.append(str(spath))
    return RunResult(status, files, rows, summary, checks)
