"""Command line front-end: ``specdetect {detect,validate,roc,histogram,calibrate}``.

Each command builds one or more tables which are written as CSV files with a
'#'-prefixed metadata header into ``--out``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import signal

from .config import SCHEMA_VERSION, ExperimentConfig, load_config
from .detectors import Kind, TestKind, decide, evaluate
from .errors import ConfigError, DegenerateInputError, IngestionError, InvalidInputError, NumericError
from .kernels import noncentrality_lambda
from .model import SinusoidSet, TimeSeries, TrainingSet, fourier_grid
from .performance import (pdet_t_tilde, pdet_t_tilde_nc, pfa_t_tilde, pfa_t_tilde_nc,
                          roc_curve_analytic, threshold_from_pfa, threshold_from_pfa_nc)
from .periodogram import averaged_periodogram, classical_periodogram, standardized_periodogram
from .seriesio import SPACING_RTOL, load_series, write_table
from .simulation import (ar_psd, calibrate_from_statistics, calibrate_threshold, draw_trial,
                         run_mc, summary_roc)

log = logging.getLogger("specdetect")

EXIT_OK, EXIT_CONFIG, EXIT_INGEST, EXIT_NUMERIC = 0, 2, 3, 4

DETECT_COLUMNS = ("test", "L", "statistic", "threshold", "decision", "pfa", "pfa_source",
                  "argmax_k", "argmax_hz")
VALIDATE_COLUMNS = ("test", "L", "gamma", "pfa_analytic", "pfa_empirical", "pfa_stderr",
                    "pdet_analytic", "pdet_empirical", "pdet_stderr")
ROC_COLUMNS = ("test", "L", "pfa", "pdet", "source", "stderr")
AUC_COLUMNS = ("test", "L", "source", "auc", "auc_stderr")
HISTOGRAM_COLUMNS = ("test", "L", "bin_low_hz", "bin_high_hz", "count")
GOF_COLUMNS = ("test", "L", "bins", "trials", "uniformity_pvalue")
CALIBRATE_COLUMNS = ("test", "L", "target_pfa", "threshold", "ci_low", "ci_high", "achieved_pfa",
                     "trials", "analytic_threshold")

# false-alarm grid for the analytic areas in roc_auc.csv
AUC_PFA_GRID = np.unique(np.r_[np.geomspace(1e-6, 1e-2, 41), np.linspace(0.01, 0.999, 200)])


@dataclass
class Table:
    name: str
    columns: tuple
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def _meta(cfg: ExperimentConfig, command: str, **extra) -> dict:
    meta = {"command": command, "schema_version": SCHEMA_VERSION, "seed": cfg.seed,
            "n": cfg.grid.n, "dt": repr(cfg.grid.dt)}
    if cfg.mc is not None:
        meta["trials"] = cfg.mc.trials
    meta.update(extra)
    return meta


def _need(value, what: str):
    if value is None:
        raise ConfigError(f"this command needs '{what}' in the config")
    return value


def _synthetic_only(cfg: ExperimentConfig, command: str) -> None:
    if cfg.input.mode != "synthetic":
        raise ConfigError(f"{command} runs on synthetic noise only")


def _analytic_threshold(test: TestKind, pfa: float, l: int, eta: int) -> float:
    if test.kind is Kind.T_TILDE:
        return float(threshold_from_pfa(pfa, l, eta))
    return threshold_from_pfa_nc(pfa, l, eta, test.n_c)


def _analytic_pfa(test: TestKind, gamma: float, l: int, eta: int) -> float:
    if test.kind is Kind.T_TILDE:
        return float(pfa_t_tilde(gamma, l, eta))
    return float(pfa_t_tilde_nc(gamma, l, eta, test.n_c))


def _analytic_pdet(test: TestKind, gamma: float, lam, l: int) -> float:
    if test.kind is Kind.T_TILDE:
        return float(pdet_t_tilde(gamma, lam, l))
    return float(pdet_t_tilde_nc(gamma, lam, l, test.n_c))


def _lambdas(cfg: ExperimentConfig):
    grid = fourier_grid(cfg.grid.n, cfg.grid.dt)
    return np.asarray(noncentrality_lambda(cfg.sine_set(), ar_psd(cfg.noise_model(), grid), grid))


# -- data for detect ---------------------------------------------------------

def _prepare(series: TimeSeries, cfg: ExperimentConfig, what: str) -> TimeSeries:
    if series.n != cfg.grid.n or abs(series.dt - cfg.grid.dt) > SPACING_RTOL * cfg.grid.dt:
        raise ConfigError(f"{what}: grid (n={series.n}, dt={series.dt}) does not match the "
                          f"configured grid (n={cfg.grid.n}, dt={cfg.grid.dt})")
    x = series.samples
    if cfg.input.detrend != "none":
        x = signal.detrend(x, type="constant" if cfg.input.detrend == "mean" else "linear")
    return TimeSeries(x, cfg.grid.dt)


def _file_data(cfg: ExperimentConfig):
    obs = _prepare(load_series(cfg.input.observation), cfg, str(cfg.input.observation))
    members = [_prepare(load_series(p), cfg, str(p)) for p in cfg.input.training]
    return obs, (TrainingSet(tuple(members)) if members else None)


def _synthetic_data(cfg: ExperimentConfig, l: int):
    obs, train = draw_trial(cfg.noise_model(), cfg.grid.n, l, cfg.seed, 0)
    obs = obs + cfg.sine_set().signal(cfg.grid.n, cfg.grid.dt)
    return TimeSeries(obs, cfg.grid.dt), TrainingSet.from_array(train, cfg.grid.dt)


# -- commands --------------------------------------------------------------

def cmd_detect(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """Run every configured test on one observation."""
    pfa = _need(cfg.pfa, "pfa")
    tests = cfg.test_kinds()
    if cfg.input.mode == "files":
        datasets = [_file_data(cfg)]
    else:
        datasets = [_synthetic_data(cfg, l) for l in cfg.training_sizes]
    calibrated = {}
    table = Table("detect.csv", DETECT_COLUMNS, meta=_meta(cfg, "detect", pfa=repr(pfa),
                                                         calibration_seed=cfg.seed + 1))
    for obs, training in datasets:
        l = len(training) if training is not None else 0
        p = classical_periodogram(obs)
        eta = len(p)
        pt = None
        if training is not None:
            pt = standardized_periodogram(p, averaged_periodogram(training))
        for test in tests:
            if test.kind.standardized and pt is None:
                raise ConfigError(f"{test.label} needs a training set")
            stat, k = evaluate(test, pt if test.kind.standardized else p)
            if test.kind.analytic:
                thr = _analytic_threshold(test, pfa, l, eta)
                report = decide(test, stat, thr, k, l, eta)
                rate, source = report.analytic_pfa, "analytic"
            else:
                key = (test.label, l if test.kind.standardized else None)
                if key not in calibrated:
                    mc = cfg.mc_config(l if test.kind.standardized else 1, seed=cfg.seed + 1,
                                       sines=SinusoidSet())
                    calibrated[key] = calibrate_threshold(mc, test, pfa, threads)
                cal = calibrated[key]
                report = decide(test, stat, cal.threshold, k)
                rate, source = cal.achieved_pfa, "calibrated"
            table.rows.append((test.label, l, report.statistic, report.threshold, report.decision,
                               rate, source, k, p.grid.frequency(k)))
    return [table]


def cmd_validate(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """Analytic against empirical exceedance rates on a threshold grid."""
    _synthetic_only(cfg, "validate")
    pfa_grid = _need(cfg.pfa_grid, "pfa_grid")
    tests = tuple(t for t in cfg.test_kinds() if t.kind.analytic)
    if not tests:
        raise ConfigError("validate needs at least one of t_tilde / t_tilde_nc")
    lam = _lambdas(cfg)
    eta = lam.size
    table = Table("validate.csv", VALIDATE_COLUMNS, meta=_meta(cfg, "validate"))
    for l in cfg.training_sizes:
        summary = run_mc(cfg.mc_config(l, tests=tests), threads)
        for test in tests:
            gammas = np.sort([_analytic_threshold(test, p, l, eta) for p in pfa_grid])
            e0 = summary.exceedance(test, gammas, "h0")
            e1 = summary.exceedance(test, gammas, "h1")
            n = summary.trials
            for i, g in enumerate(gammas):
                pa = _analytic_pfa(test, g, l, eta)
                pd = _analytic_pdet(test, g, lam, l)
                table.rows.append((test.label, l, float(g), pa, float(e0.rates[i]),
                                   float(np.sqrt(pa * (1 - pa) / n)), pd, float(e1.rates[i]),
                                   float(np.sqrt(pd * (1 - pd) / n))))
    return [table]


def cmd_roc(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """Analytic and empirical ROC points plus their areas."""
    _synthetic_only(cfg, "roc")
    pfa_grid = np.unique(_need(cfg.pfa_grid, "pfa_grid"))
    tests = cfg.test_kinds()
    lam = _lambdas(cfg)
    roc = Table("roc.csv", ROC_COLUMNS, meta=_meta(cfg, "roc"))
    auc = Table("roc_auc.csv", AUC_COLUMNS, meta=_meta(cfg, "roc"))
    for l in cfg.training_sizes:
        summary = run_mc(cfg.mc_config(l), threads)
        for test in tests:
            if test.kind.analytic:
                curve = roc_curve_analytic(test, lam, l, pfa_grid)
                roc.rows += [(test.label, l, float(a), float(b), "analytic", None)
                             for a, b in zip(curve.pfa, curve.pdet)]
                dense = roc_curve_analytic(test, lam, l, AUC_PFA_GRID)
                auc.rows.append((test.label, l, "analytic", dense.auc(), None))
            curve = summary_roc(summary, test)
            roc.rows += [(test.label, l, float(a), float(b), "empirical", float(s))
                         for a, b, s in zip(curve.pfa, curve.pdet, curve.pdet_stderr)]
            auc.rows.append((test.label, l, "empirical", curve.meta["auc"], curve.meta["auc_stderr"]))
    return [roc, auc]


def cmd_histogram(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """Frequencies picked by each test under pure noise."""
    _synthetic_only(cfg, "histogram")
    table = Table("histogram.csv", HISTOGRAM_COLUMNS, meta=_meta(cfg, "histogram"))
    gof = Table("histogram_gof.csv", GOF_COLUMNS, meta=_meta(cfg, "histogram"))
    for l in cfg.training_sizes:
        summary = run_mc(cfg.mc_config(l, hypotheses=("h0",)), threads)
        for test in cfg.test_kinds():
            h = summary.histogram(test)
            table.rows += [(test.label, l, float(a), float(b), int(c))
                           for a, b, c in zip(h.edges_hz[:-1], h.edges_hz[1:], h.counts)]
            gof.rows.append((test.label, l, h.counts.size, h.total, h.uniformity_pvalue()))
    return [table, gof]


def cmd_calibrate(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """Monte Carlo thresholds at the configured false-alarm rate."""
    _synthetic_only(cfg, "calibrate")
    pfa = _need(cfg.pfa, "pfa")
    table = Table("calibrate.csv", CALIBRATE_COLUMNS, meta=_meta(cfg, "calibrate"))
    for l in cfg.training_sizes:
        mc = cfg.mc_config(l, hypotheses=("h0",))
        eta = mc.grid.size
        summary = run_mc(mc, threads)
        for test in mc.tests:
            cal = calibrate_from_statistics(summary.statistics["h0"][test.label], pfa)
            analytic = _analytic_threshold(test, pfa, l, eta) if test.kind.analytic else None
            table.rows.append((test.label, l, pfa, cal.threshold, cal.ci_low, cal.ci_high,
                               cal.achieved_pfa, cal.trials, analytic))
    return [table]


COMMANDS = {
    "detect": cmd_detect,
    "validate": cmd_validate,
    "roc": cmd_roc,
    "histogram": cmd_histogram,
    "calibrate": cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specdetect",
                                     description="Sinusoid detection with standardized periodograms.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        p.add_argument("--config", required=True, type=Path, help="YAML experiment file")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--threads", type=int, default=1, help="Monte Carlo worker threads")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(command: str, config: Path, out: Path, seed: Optional[int] = None, threads: int = 1) -> list[Path]:
    cfg = load_config(config)
    if seed is not None:
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = cfg.model_copy(update={"seed": seed})
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    tables = COMMANDS[command](cfg, threads)
    out.mkdir(parents=True, exist_ok=True)
    return [write_table(out / t.name, t.columns, t.rows, t.meta) for t in tables]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        paths = run(args.command, args.config, args.out, args.seed, args.threads)
    except (ConfigError, InvalidInputError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except IngestionError as exc:
        log.error("ingestion error: %s", exc)
        return EXIT_INGEST
    except (NumericError, DegenerateInputError) as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
