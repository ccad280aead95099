"""Desk-scale acceptance suite: one test and one PASS/FAIL line per criterion.

Runtimes are measured and count towards the verdict.  Run with ``-s`` to see
the lines as they happen; they are repeated in the terminal summary.
"""

import time

import numpy as np
import pytest

from causalfermion.action import causal_action, classify, lagrangian, lagrangian_f2_angles, lagrangian_n1_closed
from causalfermion.cli import cmd_sweep
from causalfermion.geometry import cone_classify, spin_projection
from causalfermion.gradient import SMOOTH_MARGIN, boundary_margin, fd_check
from causalfermion.operators import BlochCoords, f2_from_bloch
from causalfermion.optimize import OptimizerSettings, minimize_two_stage, multi_restart
from causalfermion.oracles import (
    dirac2d_config,
    dirac4d_config,
    dirac4d_leading_boundedness,
    is_causally_trivial,
    iso_lagrangian,
    orthogonal_min_config,
    tammes_points,
)
from causalfermion.parametrize import decode, init_random

from .conftest import random_point, random_unit, record_criterion

ISO_FLOOR = 1 / 6


def test_criterion_01_orthogonal_floor():
    start = time.perf_counter()
    worst = 0.0
    for n in (1, 2):
        for m in (1, 2, 4, 8):
            cfg = orthogonal_min_config(n, m * n, m)
            worst = max(worst, abs(causal_action(cfg).action - 1 / (2 * m * n**3)))
    elapsed = time.perf_counter() - start
    ok = record_criterion("1", worst <= 1e-12, f"max |S - 1/(2mn^3)| = {worst:.2e}", elapsed, 1.0)
    assert ok


def test_criterion_02_closed_forms():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        tau, tau2 = 1 + rng.exponential(1.5, 2)
        a, b = random_unit(rng), random_unit(rng)
        x, y = f2_from_bloch(BlochCoords(tau, a)), f2_from_bloch(BlochCoords(tau2, b))
        theta = np.arccos(np.clip(a @ b, -1, 1))
        ref = lagrangian(x, y)
        worst = max(worst, abs(ref - lagrangian_f2_angles(tau, tau2, theta)), abs(ref - lagrangian_n1_closed(x, y)))
    elapsed = time.perf_counter() - start
    ok = record_criterion("2", worst <= 1e-10, f"max deviation over 1000 pairs = {worst:.2e}", elapsed, 5.0)
    assert ok


def test_criterion_03_isotropic_floor():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    exact = iso_lagrangian(1.0, 1.0)
    samples = rng.uniform(1.0, 20.0, size=(10_000, 2))
    values = np.array([iso_lagrangian(a, b) for a, b in samples])
    elapsed = time.perf_counter() - start
    ok = exact == pytest.approx(ISO_FLOOR, abs=1e-15) and bool(np.all(values > ISO_FLOOR))
    detail = f"L_iso(1,1) - 1/6 = {exact - ISO_FLOOR:.1e}, min over 1e4 samples - 1/6 = {values.min() - ISO_FLOOR:.2e}"
    assert record_criterion("3", ok, detail, elapsed, 1.0)


def test_criterion_04_dirac_sphere_2d():
    start = time.perf_counter()
    worst, trivial = 0.0, True
    for m in (6, 12, 32, 64):
        cfg, pred = dirac2d_config(m)
        trivial &= is_causally_trivial(cfg)[0]
        s = causal_action(cfg).action
        worst = max(worst, abs(s - pred.tau**2 / (2 * m)))
    elapsed = time.perf_counter() - start
    lo, hi = np.sqrt(3) / (4 * np.pi), ISO_FLOOR
    ok = trivial and worst <= 1e-10 and lo <= s <= hi
    detail = f"trivial={trivial}, max |S - tau^2/2m| = {worst:.1e}, S(64) = {s:.5f} in [{lo:.4f}, {hi:.4f}]"
    assert record_criterion("4", ok, detail, elapsed, 30.0)


def _pairing_gap(eigs):
    """Largest distance between eigenvalues matched in pairs by proximity."""
    e = sorted(eigs, key=lambda z: (round(z.real, 6), z.imag))
    best = np.inf
    for perm in ((0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)):
        gap = max(abs(e[perm[0]] - e[perm[1]]), abs(e[perm[2]] - e[perm[3]]))
        best = min(best, gap)
    return best


def test_criterion_05_dirac_sphere_4d():
    start = time.perf_counter()
    worst_s, trivial, paired, identity, spectra = 0.0, True, 0.0, 0.0, True
    for m in (8, 32):
        cfg, pred = dirac4d_config(m)
        tau = pred.tau
        trivial &= is_causally_trivial(cfg)[0]
        worst_s = max(worst_s, abs(causal_action(cfg).action - tau**2 / (16 * m)))
        want = np.repeat([(1 - tau) / 4, (1 + tau) / 4], 2)
        spectra &= all(np.allclose(np.sort(p.eigenvalues), want, atol=1e-12) for p in cfg.points)
        pts = tammes_points(m, 4).points
        for i in range(m):
            for j in range(m):
                c = float(pts[i] @ pts[j])
                prod = 16 * cfg.points[i].matrix @ cfg.points[j].matrix
                # (16 F F - (1 + tau^2 c))^2 is a multiple of the identity
                k = prod - (1 + tau * tau * c) * np.eye(4)
                rhs = tau * tau * (1 + c) * (2 - tau * tau * (1 - c))
                identity = max(identity, np.abs(k @ k - rhs * np.eye(4)).max())
                # away from the light cone the eigenvalues are numerically paired
                if abs(rhs) > 1e-6:
                    paired = max(paired, _pairing_gap(np.linalg.eigvals(prod / 16)))
    elapsed = time.perf_counter() - start
    ok = trivial and spectra and worst_s <= 1e-10 and paired <= 1e-9 and identity <= 1e-10
    detail = (
        f"trivial={trivial}, point spectra doubled={spectra}, max |S - tau^2/16m| = {worst_s:.1e}, "
        f"pairing gap = {paired:.1e}, quadratic identity residual = {identity:.1e}"
    )
    assert record_criterion("5", ok, detail, elapsed, 60.0)


def _best(shape, seeds):
    runs = [minimize_two_stage(shape, s) for s in seeds]
    return min(runs, key=lambda r: r.final_action), runs


def test_criterion_06_optimizer_floor():
    details, ok = [], True
    longest = 0.0
    for shape, target in (((1, 2, 2), 0.25), ((1, 4, 4), 0.125)):
        best, runs = _best(shape, range(5))
        longest = max(longest, max(r.elapsed for r in runs))
        good = abs(best.final_action - target) <= 1e-3
        ok &= good
        details.append(f"{shape}: S = {best.final_action:.6f} (target {target})")
    assert record_criterion("6", ok, ", ".join(details) + ", slowest run", longest, 60.0)


@pytest.mark.slow
def test_criterion_07_welch_regime():
    start = time.perf_counter()
    best, _ = _best((1, 2, 4), range(10))
    elapsed = time.perf_counter() - start
    cfg = decode(best.final_params)
    # rank one: the negative eigenvalue (1 - tau)/2 vanishes
    neg = max(abs(p.eigenvalues[0]) for p in cfg.points)
    ok = abs(best.final_action - 1 / 6) <= 5e-3 and neg <= 1e-4
    detail = f"S = {best.final_action:.6f}, max |negative eigenvalue| = {neg:.1e}"
    assert record_criterion("7", ok, detail, elapsed, 300.0)


@pytest.mark.slow
def test_criterion_08_beating_isotropy():
    start = time.perf_counter()
    best = multi_restart((1, 2, 32), range(10)).best
    elapsed = time.perf_counter() - start
    ok = best.final_action < ISO_FLOOR
    detail = f"best S = {best.final_action:.6f} vs 1/6 = {ISO_FLOOR:.6f} (seed {best.seed})"
    assert record_criterion("8", ok, detail, elapsed, 1800.0)


def test_criterion_09_gradient_check():
    rng = np.random.default_rng(9)
    start = time.perf_counter()
    worst = {}
    for shape in ((1, 2, 3), (1, 3, 3), (2, 4, 2)):
        errs = []
        while len(errs) < 20:
            p = init_random(shape, rng, sigma_c=0.3, sigma_mu=0.3, mu0=0.5)
            if boundary_margin(p) <= SMOOTH_MARGIN:
                continue
            errs.append(fd_check(p, step=1e-5).max_rel_error)
        worst[shape] = max(errs)
    elapsed = time.perf_counter() - start
    ok = all(v < 1e-5 for v in worst.values())
    detail = ", ".join(f"{k}: {v:.1e}" for k, v in worst.items())
    assert record_criterion("9", ok, "max rel error " + detail, elapsed, 120.0)


@pytest.mark.slow
def test_criterion_10_scaling(tmp_path):
    start = time.perf_counter()
    result = cmd_sweep([1], [], [2, 4, 8, 16], range(5), OptimizerSettings(), tmp_path, diagonal=True)
    elapsed = time.perf_counter() - start
    slope = result["fit"]["slope"]
    values = ", ".join(f"m={r['m']}: {r['best_S']:.5f}" for r in result["rows"])
    ok = slope is not None and -1.05 <= slope <= -0.95
    assert record_criterion("10", ok, f"slope = {slope:.4f} ({values})", elapsed, 1800.0)


def test_criterion_11_cone_equivalence():
    rng = np.random.default_rng(11)
    start = time.perf_counter()
    mismatches = {}
    for f in (2, 3, 4):
        bad = 0
        for _ in range(1000):
            x, y = random_point(rng, f), random_point(rng, f)
            bad += cone_classify(spin_projection(x, y)) != classify(x, y)
        mismatches[f] = bad
    elapsed = time.perf_counter() - start
    ok = not any(mismatches.values())
    assert record_criterion("11", ok, f"mismatches per f = {mismatches}", elapsed, 10.0)


def test_criterion_12a_boundedness_2d():
    start = time.perf_counter()
    worst = 0.0
    for m in (6, 12, 32, 64):
        cfg, pred = dirac2d_config(m)
        tau = pred.tau
        worst = max(worst, abs(causal_action(cfg).boundedness - ((tau**2 - 1) ** 2 / 4 + tau**2 / m)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10
    assert record_criterion("12a", ok, f"max |T - ((tau^2-1)^2/4 + tau^2/m)| = {worst:.1e}", elapsed, 30.0)


def test_criterion_12b_boundedness_4d_leading_order():
    # Expected to fail: the 1/m correction is too large at m = 32 (see ledger).
    start = time.perf_counter()
    cfg, pred = dirac4d_config(32)
    t = causal_action(cfg).boundedness
    lead = dirac4d_leading_boundedness(pred.tau)
    rel = abs(t - lead) / lead
    exact = abs(t - pred.boundedness)
    elapsed = time.perf_counter() - start
    ok = rel <= 0.05
    detail = (
        f"m=32: T = {t:.5f}, leading term = {lead:.5f}, relative deviation = {rel:.3f} (limit 0.05); "
        f"exact finite-m formula residual = {exact:.1e}"
    )
    assert record_criterion("12b", ok, detail, elapsed, 30.0)
