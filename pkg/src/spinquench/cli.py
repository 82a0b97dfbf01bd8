"""Batch command-line driver.

One executable, five subcommands (quench, spectroscopy, collapse, cloud,
selftest), each reading a single JSON config document and writing CSV/JSON
artifacts plus a checksummed manifest into the output directory.

Precedence: command-line flags override config keys, which override built-in
defaults.  The default worker count comes from the SPINQUENCH_JOBS environment
variable; the --jobs flag wins over it.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 partial results.
Failures print a machine-readable error JSON to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .eigensolve import NonConvergenceError, full_spectrum, ground_state
from .evolve import (PropagatorConfig, TimeGrid, TimeSeries,
                     magnetization_series, spectral_evolve)
from .hamiltonians import (KONDO_CRITICAL_J2, KondoChain, Term, TermList,
                           build_hamiltonian, build_kondo_chain,
                           operator_from_terms, parity_operator, spec_from_dict)
from .kondocloud import (DEFAULT_DT, DEFAULT_MARGIN, cloud_profile,
                         fit_kondo_law, fit_screening_length, reference_series)
from .quench import (MeasurementSpec, collapse, embed, post_measurement_sector)
from .scaling import (CollapseFamily, CollapseMember, collapse_distance,
                      kondo_scaling_window, low_pass, tune_control_for_ratio)
from .serialize import (write_collapse_csv, write_json, write_manifest,
                        write_profile_csv, write_spectrum_csv,
                        write_timeseries_csv)
from .spectro import WindowSpec, extract_peaks, fourier_transform, match_gaps
from .statespace import StateVector, build_sector_basis, expectation

__all__ = ["main", "load_config", "cmd_quench", "cmd_spectroscopy",
           "cmd_collapse", "cmd_cloud", "cmd_selftest", "ConfigError",
           "PartialResultsError"]

MATCH_ORACLE_CAP = 1 << 14


class ConfigError(ValueError):
    pass


class PartialResultsError(RuntimeError):
    def __init__(self, msg, failures, artifacts=()):
        super().__init__(msg)
        self.failures = list(failures)
        self.artifacts = list(artifacts)


# ---------------------------------------------------------------------------
# config loading and validation


def _require(cfg: dict, key: str, where: str):
    if key not in cfg:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return cfg[key]


def _check_keys(cfg: dict, allowed, where: str):
    unknown = set(cfg) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _parse_grid(cfg: dict) -> TimeGrid:
    _check_keys(cfg, ("t_max", "dt"), "grid")
    try:
        return TimeGrid(float(_require(cfg, "t_max", "grid")),
                        float(_require(cfg, "dt", "grid")))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def _parse_propagator(cfg: dict) -> PropagatorConfig:
    _check_keys(cfg, ("method", "krylov_dim", "step_tol", "max_krylov_dim"),
                "propagator")
    try:
        return PropagatorConfig(**cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"propagator: {exc}") from exc


def _parse_measurement(cfg: dict, seed_override=None) -> MeasurementSpec:
    _check_keys(cfg, ("site", "axis", "outcome_policy", "seed"), "measurement")
    cfg = dict(cfg)
    if seed_override is not None:
        cfg["seed"] = int(seed_override)
    try:
        return MeasurementSpec(**cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"measurement: {exc}") from exc


def _parse_model(cfg: dict):
    """Model spec from config; 'terms' builds a custom Pauli-string model."""
    kind = _require(cfg, "model", "model")
    if kind == "terms":
        _check_keys(cfg, ("model", "n_sites", "terms"), "model")
        try:
            terms = [Term(float(t["coefficient"]),
                          tuple((str(a), int(s)) for a, s in t["factors"]))
                     for t in _require(cfg, "terms", "model")]
            return TermList(int(_require(cfg, "n_sites", "model")), terms)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"model terms: {exc}") from exc
    try:
        return spec_from_dict(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model: {exc}") from exc


def _parity_safe(termlist: TermList) -> bool:
    """Whether every term commutes with P = prod sigma^z (even x/y count)."""
    return all(sum(1 for a, _ in t.factors if a in ("x", "y")) % 2 == 0
               for t in termlist.terms)


# ---------------------------------------------------------------------------
# shared pipeline pieces


def _prepare(model_cfg: dict, measurement: MeasurementSpec):
    """(evolution operator, collapsed state, model dict) for one quench."""
    spec = _parse_model(model_cfg)
    if isinstance(spec, KondoChain):
        n = spec.n_sites
        sector = build_sector_basis(n, {n // 2})
        gs = ground_state(build_kondo_chain(spec, sector)).vector
        union = post_measurement_sector(measurement, sector)
        op = build_kondo_chain(spec, union)
        collapsed = collapse(embed(gs, union), measurement)
        return op, collapsed, spec.to_dict()
    if isinstance(spec, TermList):
        op = operator_from_terms(spec)
        parity = parity_operator(spec.n_sites) if _parity_safe(spec) else None
        meta = {"model": "terms", "n_sites": spec.n_sites}
    else:
        op = build_hamiltonian(spec)
        parity = parity_operator(spec.n_sites)
        meta = spec.to_dict()
    gs = ground_state(op, parity=parity).vector
    return op, collapse(gs, measurement), meta


def _series(op, collapsed, site: int, grid: TimeGrid,
            prop: PropagatorConfig, meta: dict) -> TimeSeries:
    if prop.method == "spectral":
        spectrum = full_spectrum(op)
        psi0 = collapsed.state.normalized()
        values = np.array([expectation("x", site, spectral_evolve(spectrum, psi0, t))
                           for t in grid.times])
        full_meta = dict(meta, site=site, axis="x", n_sites=op.n_sites,
                         method="spectral")
        return TimeSeries(grid, values, full_meta)
    return magnetization_series(op, collapsed, site, grid, prop, meta=meta)


def _quench_series(config: dict, seed_override=None) -> TimeSeries:
    _check_keys(config, ("model", "measurement", "grid", "propagator"), "config")
    measurement = _parse_measurement(_require(config, "measurement", "config"),
                                     seed_override)
    grid = _parse_grid(_require(config, "grid", "config"))
    prop = _parse_propagator(config.get("propagator", {}))
    op, collapsed, model_meta = _prepare(_require(config, "model", "config"),
                                         measurement)
    meta = {"model": model_meta, "measurement": measurement.to_dict(),
            "collapse_probability": collapsed.probability,
            "outcome": collapsed.outcome}
    return _series(op, collapsed, measurement.site, grid, prop, meta), op, collapsed


# ---------------------------------------------------------------------------
# subcommands


def cmd_quench(config: dict, out_dir: str, jobs: int = 1, seed=None):
    series, _, _ = _quench_series(config, seed)
    path = os.path.join(out_dir, "series.csv")
    write_timeseries_csv(path, series)
    return [path]


def cmd_spectroscopy(config: dict, out_dir: str, jobs: int = 1, seed=None):
    _check_keys(config, ("model", "measurement", "grid", "propagator", "spectro"),
                "config")
    spectro = dict(config.get("spectro", {}))
    _check_keys(spectro, ("e_max", "e_count", "window", "prominence_floor",
                          "weight_floor"), "spectro")
    e_max = float(_require(spectro, "e_max", "spectro"))
    e_count = int(spectro.get("e_count", 2048))
    window_cfg = dict(spectro.get("window", {}))
    _check_keys(window_cfg, ("kind", "sigma_t"), "spectro.window")
    try:
        window = WindowSpec(**window_cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"spectro.window: {exc}") from exc

    base = {k: config[k] for k in ("model", "measurement", "grid", "propagator")
            if k in config}
    series, op, _ = _quench_series(base, seed)
    series_path = os.path.join(out_dir, "series.csv")
    write_timeseries_csv(series_path, series)

    e_grid = np.linspace(0.0, e_max, e_count)[1:]   # skip the DC bin
    report = fourier_transform(series, e_grid, window)
    spectrum_path = os.path.join(out_dir, "spectrum.csv")
    write_spectrum_csv(spectrum_path, report)
    artifacts = [series_path, spectrum_path]

    peaks = extract_peaks(report, float(spectro.get("prominence_floor", 0.02)))
    if op.dim <= MATCH_ORACLE_CAP:
        match = match_gaps(peaks, full_spectrum(op),
                           int(base["measurement"]["site"]),
                           weight_floor=float(spectro.get("weight_floor", 1e-3)),
                           resolution=report.resolution)
        match_path = os.path.join(out_dir, "match.json")
        write_json(match_path, match.to_dict())
        artifacts.append(match_path)
    else:
        print(f"note: dimension {op.dim} exceeds the exact-diagonalization cap "
              f"{MATCH_ORACLE_CAP}; spectrum written, gap matching skipped")
    return artifacts


def _collapse_member_job(args):
    """Worker for one family member; top-level so it pickles for the pool."""
    model_cfg, site, x_max, dt, prop_cfg, n = args
    t_max = x_max * n
    cfg = {"model": model_cfg,
           "measurement": {"site": site, "axis": "x", "outcome_policy": "forced-up"},
           "grid": {"t_max": t_max, "dt": dt},
           "propagator": prop_cfg}
    series, _, _ = _quench_series(cfg)
    return n, series


def _resolve_site(site_cfg, n: int) -> int:
    if site_cfg == "center":
        return (n + 1) // 2
    return int(site_cfg)


def _pool_map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def cmd_collapse(config: dict, out_dir: str, jobs: int = 1, seed=None):
    allowed = ("model_kind", "sizes", "target_ratio", "site", "nu", "xi_table",
               "grid", "propagator", "window", "filter_window", "nu_scan",
               "x_break", "j2_over_j1")
    _check_keys(config, allowed, "config")
    kind = _require(config, "model_kind", "config")
    if kind not in ("tfic", "kondo"):
        raise ConfigError(f"model_kind must be 'tfic' or 'kondo', got {kind!r}")
    sizes = sorted(int(n) for n in _require(config, "sizes", "config"))
    if not sizes:
        raise ConfigError("sizes must be non-empty")
    ratio = float(_require(config, "target_ratio", "config"))
    grid_cfg = dict(_require(config, "grid", "config"))
    _check_keys(grid_cfg, ("x_max", "dt"), "grid")
    x_max = float(_require(grid_cfg, "x_max", "grid"))
    dt = float(grid_cfg.get("dt", 0.05))
    prop_cfg = config.get("propagator", {})
    _parse_propagator(prop_cfg)     # validate once up front
    window = tuple(config.get("window", (0.0, x_max)))
    filter_window = config.get("filter_window")
    site_cfg = config.get("site", "center")

    def member_args(n, control):
        if kind == "tfic":
            model_cfg = {"model": "tfic", "n_sites": n, "lam": control}
        else:
            model_cfg = {"model": "kondo", "n_sites": n, "j_prime": control,
                         "j2_over_j1": config.get("j2_over_j1", KONDO_CRITICAL_J2)}
        return (model_cfg, _resolve_site(site_cfg, n), x_max, dt, prop_cfg, n)

    def tuned_control(n, tuning):
        try:
            return tune_control_for_ratio(kind, n, ratio, tuning)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    tuning = float(config.get("nu", 1.0)) if kind == "tfic" \
        else _require(config, "xi_table", "config")
    controls = {n: tuned_control(n, tuning) for n in sizes}

    members = []
    try:
        results = _pool_map(_collapse_member_job,
                            [member_args(n, controls[n]) for n in sizes], jobs)
    except (NonConvergenceError, RuntimeError) as exc:
        raise PartialResultsError(f"family member failed: {exc}", [str(exc)]) from exc
    for n, series in sorted(results, key=lambda r: r[0]):
        members.append(CollapseMember(series, n, controls[n]))

    csv_path = os.path.join(out_dir, "collapse.csv")
    write_collapse_csv(csv_path, members)
    artifacts = [csv_path]

    family = CollapseFamily(members, ratio)
    metric = collapse_distance(family, window, filter_window)
    payload = {
        "model_kind": kind,
        "target_ratio": ratio,
        "controls": {str(n): controls[n] for n in sizes},
        "window": list(metric.window),
        "filter_window": filter_window,
        "metric": metric.value,
    }
    if kind == "kondo":
        x_break = float(config.get("x_break", 0.5))
        xb, pre, post = kondo_scaling_window(family, x_break, x_max, filter_window)
        payload["scaling_window"] = {"x_break": xb, "pre_metric": pre,
                                     "post_metric": post}
    if "nu_scan" in config:
        if kind != "tfic":
            raise ConfigError("nu_scan applies to the tfic model only")
        scan = []
        for nu in config["nu_scan"]:
            nu = float(nu)
            ctl = {n: tuned_control(n, nu) for n in sizes}
            res = _pool_map(_collapse_member_job,
                            [member_args(n, ctl[n]) for n in sizes], jobs)
            fam = CollapseFamily(
                [CollapseMember(s, n, ctl[n])
                 for n, s in sorted(res, key=lambda r: r[0])], ratio)
            scan.append({"nu": nu,
                         "metric": collapse_distance(fam, window, filter_window).value})
        payload["nu_scan"] = scan
        payload["nu_best"] = min(scan, key=lambda d: d["metric"])["nu"]
    metric_path = os.path.join(out_dir, "metric.json")
    write_json(metric_path, payload)
    artifacts.append(metric_path)
    return artifacts


def _cloud_job(args):
    n_sites, jp, margin, dt, prop_cfg, j2, reference = args
    prof = cloud_profile(n_sites, jp, margin, _parse_propagator(prop_cfg), dt,
                         j2, reference)
    return jp, prof


def cmd_cloud(config: dict, out_dir: str, jobs: int = 1, seed=None):
    allowed = ("n_sites", "j_prime_sweep", "grid_margin", "dt", "propagator",
               "tail", "j2_over_j1")
    _check_keys(config, allowed, "config")
    n = int(_require(config, "n_sites", "config"))
    sweep = sorted(float(jp) for jp in _require(config, "j_prime_sweep", "config"))
    if not sweep:
        raise ConfigError("j_prime_sweep must be non-empty")
    for jp in sweep:
        if not 0 < jp <= 1:
            raise ConfigError(f"J' = {jp} outside (0, 1]")
    margin = int(config.get("grid_margin", DEFAULT_MARGIN))
    dt = float(config.get("dt", DEFAULT_DT))
    prop_cfg = config.get("propagator", {})
    prop = _parse_propagator(prop_cfg)
    j2 = float(config.get("j2_over_j1", KONDO_CRITICAL_J2))
    tail = config.get("tail", "auto")
    if tail != "auto":
        tail = int(tail)

    # the impurity-free branch is shared across the sweep; compute it once on
    # the longest window (smallest J')
    t_longest = 1.0 / min(sweep)
    j_list = range(2, n - margin + 1)
    reference = reference_series(n, j_list, t_longest, dt, prop, j2)

    results = _pool_map(_cloud_job,
                        [(n, jp, margin, dt, prop_cfg, j2, reference)
                         for jp in sweep], jobs)
    artifacts = []
    fits = {}
    failures = []
    law_pairs = []
    for jp, prof in sorted(results, key=lambda r: r[0]):
        tag = repr(jp).replace(".", "p")
        path = os.path.join(out_dir, f"profile_J{tag}.csv")
        write_profile_csv(path, prof)
        artifacts.append(path)
        if jp == 1.0:
            fits[repr(jp)] = {"excluded": "impurity-free reference (dm = 0)"}
            continue
        try:
            fit = fit_screening_length(prof, tail)
        except ValueError as exc:
            fits[repr(jp)] = {"error": str(exc)}
            failures.append(f"J'={jp}: {exc}")
            continue
        fits[repr(jp)] = {"xi": fit.xi, "fit_window": list(fit.fit_window),
                          "r_squared": fit.r_squared}
        law_pairs.append((jp, fit.xi))

    payload = {"n_sites": n, "dt": dt, "grid_margin": margin,
               "screening_fits": fits}
    if len({jp for jp, _ in law_pairs}) >= 3:
        law = fit_kondo_law(law_pairs)
        payload["kondo_law"] = {"a_coefficient": law.a_coefficient,
                                "intercept": law.intercept,
                                "r_squared": law.r_squared}
    else:
        payload["kondo_law"] = {"error": "fewer than 3 surviving screening fits"}
    fit_path = os.path.join(out_dir, "fits.json")
    write_json(fit_path, payload)
    artifacts.append(fit_path)
    if failures:
        raise PartialResultsError("; ".join(failures), failures, artifacts)
    return artifacts


def cmd_selftest(config: dict, out_dir: str, jobs: int = 1, seed=None):
    """Fast internal consistency checks; writes a small report JSON."""
    checks = {}

    # single spin under H = sigma^z: m^x(t) = cos 2t
    cfg = {"model": {"model": "terms", "n_sites": 1,
                     "terms": [{"coefficient": 1.0, "factors": [["z", 1]]}]},
           "measurement": {"site": 1, "outcome_policy": "forced-up"},
           "grid": {"t_max": 3.0, "dt": 0.05}}
    series, _, _ = _quench_series(cfg)
    err = float(np.max(np.abs(series.values - np.cos(2.0 * series.grid.times))))
    checks["single_spin_cosine"] = {"max_error": err, "ok": err < 1e-10}

    # parity-even TFIC ground state collapses with probability 1/2
    cfg = {"model": {"model": "tfic", "n_sites": 6, "lam": 0.5},
           "measurement": {"site": 1, "outcome_policy": "forced-up"},
           "grid": {"t_max": 1.0, "dt": 0.5}}
    _, _, collapsed = _quench_series(cfg)
    perr = abs(collapsed.probability - 0.5)
    checks["parity_half_probability"] = {"error": perr, "ok": perr < 1e-8}

    # Krylov propagation against the dense spectral oracle
    base = {"model": {"model": "long_range_ising", "n_sites": 6, "alpha": 3.0,
                      "b_over_j": 1.0},
            "measurement": {"site": 3, "outcome_policy": "forced-up"},
            "grid": {"t_max": 5.0, "dt": 0.25}}
    krylov, _, _ = _quench_series(base)
    spectral, _, _ = _quench_series({**base, "propagator": {"method": "spectral"}})
    dist = float(np.max(np.abs(krylov.values - spectral.values)))
    checks["krylov_vs_spectral"] = {"max_error": dist, "ok": dist < 1e-8}

    ok = all(c["ok"] for c in checks.values())
    path = os.path.join(out_dir, "selftest.json")
    write_json(path, {"ok": ok, "checks": checks})
    for name, c in checks.items():
        print(f"{name}: {'ok' if c['ok'] else 'FAILED'}")
    if not ok:
        raise NonConvergenceError("selftest failed")
    return [path]


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "quench": cmd_quench,
    "spectroscopy": cmd_spectroscopy,
    "collapse": cmd_collapse,
    "cloud": cmd_cloud,
    "selftest": cmd_selftest,
}


def _default_jobs() -> int:
    env = os.environ.get("SPINQUENCH_JOBS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _error_json(code: int, stage: str, message: str):
    print(json.dumps({"error": {"code": code, "stage": stage,
                                "message": message}}, sort_keys=True))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spinquench",
        description="Measurement-quench simulations on spin chains")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="JSON config document (optional for selftest)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker count (default: SPINQUENCH_JOBS or 1)")
        p.add_argument("--seed", type=int, default=None,
                       help="overrides the measurement seed in the config")
    args = parser.parse_args(argv)

    jobs = args.jobs if args.jobs is not None else _default_jobs()
    t0 = time.perf_counter()
    try:
        if args.config is None:
            if args.command != "selftest":
                raise ConfigError("--config is required")
            config = {}
        else:
            config = load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        artifacts = _COMMANDS[args.command](config, args.out, jobs, args.seed)
    except ConfigError as exc:
        _error_json(2, "config", str(exc))
        return 2
    except PartialResultsError as exc:
        write_manifest(args.out, config, exc.artifacts,
                       {"total": time.perf_counter() - t0}, __version__)
        _error_json(4, "compute", str(exc))
        return 4
    except (NonConvergenceError, RuntimeError, FloatingPointError,
            ValueError, np.linalg.LinAlgError) as exc:
        _error_json(3, "numerics", str(exc))
        return 3
    write_manifest(args.out, config, artifacts,
                   {"total": time.perf_counter() - t0}, __version__)
    return 0


if __name__ == "__main__":
    sys.exit(main())
