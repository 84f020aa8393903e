"""Acceptance criteria A1-A8.

The Monte Carlo criteria share two runs through session fixtures: the
three-sine configuration (configs/three_sines.yaml) at L = 5 and L = 100, and the
five-sine configuration (configs/valley.yaml) at L = 100.  Both use the master
seed stored in those files.
"""

from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from specdetect import (Kind, TestKind, f_cdf, f_pdf, fourier_grid, noncentral_f_sf,
                        noncentrality_lambda, pdet_t_tilde, pdet_t_tilde_nc, pfa_t_tilde,
                        pfa_t_tilde_nc, threshold_from_pfa, threshold_from_pfa_nc)
from specdetect.cli import main
from specdetect.config import load_config
from specdetect.simulation import ar_psd, run_mc, summary_roc

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
T = TestKind(Kind.T_TILDE)
TNC = TestKind(Kind.T_TILDE_NC, 3)
PDET_GRID = np.geomspace(1e-3, 0.5, 10)


def _threshold(test, pfa, l, eta):
    if test.kind is Kind.T_TILDE:
        return threshold_from_pfa(pfa, l, eta)
    return threshold_from_pfa_nc(pfa, l, eta, test.n_c)


def _pfa(test, gamma, l, eta):
    if test.kind is Kind.T_TILDE:
        return pfa_t_tilde(gamma, l, eta)
    return pfa_t_tilde_nc(gamma, l, eta, test.n_c)


def _pdet(test, gamma, lam, l):
    if test.kind is Kind.T_TILDE:
        return pdet_t_tilde(gamma, lam, l)
    return pdet_t_tilde_nc(gamma, lam, l, test.n_c)


@pytest.fixture(scope="session")
def three_sines():
    cfg = load_config(CONFIGS / "three_sines.yaml")
    assert cfg.test_kinds() == (T, TNC)
    runs = {l: run_mc(cfg.mc_config(l)) for l in (5, 100)}
    grid = fourier_grid(cfg.grid.n, cfg.grid.dt)
    lam = np.asarray(noncentrality_lambda(cfg.sine_set(), ar_psd(cfg.noise_model(), grid), grid))
    return cfg, runs, lam


@pytest.fixture(scope="session")
def valley():
    cfg = load_config(CONFIGS / "valley.yaml")
    return cfg, run_mc(cfg.mc_config(100))


# -- A1 --------------------------------------------------------------------------------

@pytest.mark.parametrize("l", [1, 2, 5, 20, 100])
def test_A1_distribution_identities(l, record_property):
    norm, _ = integrate.quad(lambda g: f_pdf(g, l), 0, np.inf, epsabs=1e-13, epsrel=1e-13, limit=500)
    worst = 0.0
    for g in np.linspace(0, 100, 101):
        val, _ = integrate.quad(lambda x: f_pdf(x, l), 0, g, epsabs=1e-13, epsrel=1e-13, limit=200)
        worst = max(worst, abs(f_cdf(g, l) - val))
    record_property("summary", f"L={l}: |norm-1|={abs(norm - 1):.1e} max|cdf-int|={worst:.1e}")
    assert abs(norm - 1) < 1e-10
    assert worst < 1e-10


# -- A2 --------------------------------------------------------------------------------

@pytest.mark.parametrize("l", [5, 100])
@pytest.mark.parametrize("test", [T, TNC], ids=lambda t: t.label)
def test_A2_false_alarm_control(three_sines, l, test, record_property):
    cfg, runs, lam = three_sines
    s = runs[l]
    eta = lam.size
    assert s.trials == 10_000 and (cfg.grid.n, cfg.grid.dt) == (1024, 60.0)
    zs = []
    for p in (0.01, 0.05, 0.1):
        g = _threshold(test, p, l, eta)
        rate = s.exceedance(test, [g], "h0").rates[0]
        zs.append((rate - p) / np.sqrt(p * (1 - p) / s.trials))
    record_property("summary", f"{test.label} L={l} z=" + ",".join(f"{z:+.2f}" for z in zs))
    assert np.all(np.abs(zs) < 3)


# -- A3 --------------------------------------------------------------------------------

@pytest.mark.parametrize("l", [5, 100])
@pytest.mark.parametrize("test", [T, TNC], ids=lambda t: t.label)
def test_A3_detection_rate(three_sines, l, test, record_property):
    cfg, runs, lam = three_sines
    s = runs[l]
    eta = lam.size
    assert len(cfg.sines) == 3 and all(x.amplitude == 0.1 for x in cfg.sines)
    gammas = np.array([_threshold(test, p, l, eta) for p in PDET_GRID])
    emp = s.exceedance(test, gammas, "h1").rates
    ana = np.array([_pdet(test, g, lam, l) for g in gammas])
    z = (emp - ana) / np.sqrt(ana * (1 - ana) / s.trials)
    record_property("summary", f"{test.label} L={l} max|z|={np.abs(z).max():.2f}")
    assert np.all(np.abs(z) < 3)


# -- A4 --------------------------------------------------------------------------------

def _enumerate_subsets(p, n_c):
    """Sum over every subset of at least n_c exceeding ordinates."""
    eta = p.size
    masks = (np.arange(2 ** eta)[:, None] >> np.arange(eta)) & 1
    probs = np.where(masks == 1, p, 1 - p).prod(axis=1)
    return probs[masks.sum(axis=1) >= n_c].sum()


def test_A4_combinatorial_equivalence(record_property):
    rng = np.random.default_rng(4)
    worst = 0.0
    count = 0
    for eta in range(1, 13):
        for _ in range(100):
            lam = rng.uniform(0, 20, eta) * (rng.random(eta) < 0.8)
            l = int(rng.integers(1, 101))
            gamma = rng.uniform(0.2, 20)
            p = noncentral_f_sf(gamma, lam, l)
            for n_c in range(1, min(4, eta) + 1):
                ref = _enumerate_subsets(p, n_c)
                got = pdet_t_tilde_nc(gamma, lam, l, n_c)
                if ref > 0:
                    worst = max(worst, abs(got - ref) / ref)
                else:
                    assert got == 0
                count += 1
    record_property("summary", f"{count} cases, max rel err {worst:.1e}")
    assert worst < 1e-12


# -- A5 --------------------------------------------------------------------------------

def test_A5_roc_dominance(valley, record_property):
    cfg, s = valley
    assert [x.amplitude for x in cfg.sines] == [0.08] * 5
    assert [x.frequency for x in cfg.sines] == [0.005, 0.0055, 0.00575, 0.006, 0.0065]
    assert s.trials == 10_000 and s.config.n_training == 100
    tests = {t.kind: t for t in cfg.test_kinds()}
    assert tests[Kind.T_TILDE_NC].n_c == 5 and tests[Kind.CHIU].n_c == 5
    auc = {k: summary_roc(s, t).meta for k, t in tests.items()}
    margins = []
    for good in (Kind.T_TILDE, Kind.T_TILDE_NC):
        for bad in (Kind.FISHER, Kind.CHIU):
            diff = auc[good]["auc"] - auc[bad]["auc"]
            pooled = np.hypot(auc[good]["auc_stderr"], auc[bad]["auc_stderr"])
            margins.append(diff / pooled)
    record_property("summary", "AUC " + " ".join(f"{k.value}={v['auc']:.4f}" for k, v in auc.items())
                    + " margins/SE=" + ",".join(f"{m:.1f}" for m in margins))
    assert min(margins) > 3


# -- A6 --------------------------------------------------------------------------------

def test_A6_false_alarm_uniformity(valley, record_property):
    cfg, s = valley
    grid = s.config.grid
    assert cfg.mc.histogram_bins == 50
    h_t = s.histogram(T, 50)
    h_f = s.histogram(TestKind(Kind.FISHER), 50)
    psd = ar_psd(cfg.noise_model(), grid).values
    top = psd >= np.quantile(psd, 0.9)
    mode = int(np.argmax(h_f.counts))
    k_edges = h_f.edges_hz * grid.n * grid.dt
    in_bin = (grid.indices >= k_edges[mode]) & (grid.indices < k_edges[mode + 1])
    share = top[in_bin].mean()
    record_property("summary", f"p(T~)={h_t.uniformity_pvalue():.3f} p(Fisher)={h_f.uniformity_pvalue():.1e} "
                    f"Fisher modal bin {mode} ({share:.0%} top-decile)")
    assert h_t.uniformity_pvalue() > 0.01
    assert h_f.uniformity_pvalue() < 0.01
    assert share > 0.5


# -- A7 --------------------------------------------------------------------------------

@pytest.mark.parametrize("command", ["detect", "validate", "roc", "histogram", "calibrate"])
def test_A7_reproducible_csv(tmp_path, command, record_property):
    cfg = CONFIGS / "smoke.yaml"
    outputs = []
    for run, threads in enumerate(("1", "8", "1")):
        out = tmp_path / str(run)
        assert main([command, "--config", str(cfg), "--threads", threads, "--out", str(out)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
    assert outputs[0] and outputs[0] == outputs[1] == outputs[2]
    record_property("summary", f"{command}: {len(outputs[0])} file(s) identical")


# -- A8 --------------------------------------------------------------------------------

def test_A8_threshold_roundtrip_and_limit(record_property):
    ps = np.geomspace(1e-4, 0.5, 30)
    worst = 0.0
    for l in (1, 5, 100):
        for eta in (7, 511):
            back = pfa_t_tilde(threshold_from_pfa(ps, l, eta), l, eta)
            worst = max(worst, np.max(np.abs(back - ps) / ps))
    eta = 511
    expo = -np.log(1 - (1 - ps) ** (1 / eta))
    limit = np.max(np.abs(threshold_from_pfa(ps, 10 ** 6, eta) / expo - 1))
    record_property("summary", f"roundtrip rel err {worst:.1e}, L=1e6 limit rel err {limit:.1e}")
    assert worst < 1e-12
    assert limit < 1e-3
