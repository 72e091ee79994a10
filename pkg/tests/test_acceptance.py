"""Acceptance criteria, one test per criterion.

Each test prints one pass/fail line (run with ``pytest -s`` to see them all)
and asserts every quantity at its pinned tolerance, including the runtime
budget. Grid sizes are chosen so each criterion clears its budget on a
laptop-class machine.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from horopoisson import bergman as bg
from horopoisson import crownprobe as cp
from horopoisson import extension as ex
from horopoisson import field as fd
from horopoisson import poisson as po
from horopoisson import specfun as sf
from horopoisson.builtins import (
    bump,
    central_mask,
    gaussian,
    plateau,
    random_bandlimited,
)


def report(num, name, ok, detail, elapsed):
    tag = "PASS" if ok else "FAIL"
    print(f"\n[{tag}] criterion {num}: {name} ({detail}) [{elapsed:.1f}s]")


def rel_l2(a, b):
    return fd.norm(a.with_values(a.values - b.values)) / fd.norm(a)


def test_criterion_1_level_isometry():
    t0 = time.perf_counter()
    a_set = (0.25, 0.5, 1.0, 2.0, 4.0)
    spreads = {}
    for n, lam, alpha, m, tol in ((1, 0.75, 1.0, 1024, 1e-5), (2, 1.0, 1.5, 128, 1e-4)):
        grid = fd.SpectralGrid(n, 16.0, m)
        f = gaussian(grid)
        w = bg.WeightSpec(alpha, "spatial", po.Params(n, lam))
        ratios = []
        for a in a_set:
            tube = bg.bergman_norm(f, a, w, method="tube-quadrature").value
            ratios.append(tube / bg.fourier_side_raw(f, a, w))
        ratios = np.asarray(ratios)
        spreads[(n, tol)] = float((ratios.max() - ratios.min()) / np.median(ratios))
    elapsed = time.perf_counter() - t0
    ok = all(spread <= tol for (n, tol), spread in spreads.items()) and elapsed <= 120.0
    detail = "; ".join(f"n={n} spread {s:.2e} (tol {tol})" for (n, tol), s in spreads.items())
    report(1, "level isometry, one frozen constant", ok, detail, elapsed)
    for (n, tol), spread in spreads.items():
        assert spread <= tol
    assert elapsed <= 120.0  # budget: 60 s per case


def test_criterion_2_delta_asymptotics():
    t0 = time.perf_counter()
    rep1 = po.delta_asymptotics(po.Params(1, 1.0), np.geomspace(1e-3, 0.3, 10))
    slope = rep1.values["fitted_slope"]
    rep2 = po.delta_asymptotics(po.Params(1, 0.25), np.geomspace(1e-3, 0.5, 10))
    ratio = rep2.values["max_over_min"]
    rep3 = po.delta_asymptotics(po.Params(1, 0.5), np.geomspace(1e-4, 0.3, 12))
    stab = max(rep3.values["log_ratios"][-5:]) / min(rep3.values["log_ratios"][-5:])
    ident = rep3.values["profile_identity_worst_rel"]
    elapsed = time.perf_counter() - t0
    ok = (
        abs(slope + 0.5) <= 0.05
        and ratio < 3.0
        and stab < 1.1
        and ident <= 1e-8
        and elapsed <= 120.0
    )
    report(
        2,
        "delta-kernel L1 asymptotics",
        ok,
        f"s=1 slope {slope:.3f}; s=0.25 max/min {ratio:.2f}; "
        f"s=0.5 stab {stab:.3f}, identity {ident:.1e}",
        elapsed,
    )
    assert abs(slope + 0.5) <= 0.05
    assert ratio < 3.0
    assert stab < 1.1
    assert ident <= 1e-8
    assert elapsed <= 120.0


def test_criterion_3_weight_law():
    t0 = time.perf_counter()
    worst_zero = 0.0
    for (s, alpha, n) in ((0.5, 1.0, 1), (1.0, 1.5, 1), (1.0, 2.0, 2)):
        w = bg.WeightSpec(alpha, "spatial", po.Params(n, s))
        ref = (
            2.0 ** (2 * s - alpha - n / 2.0 - 1.0)
            * math.gamma(s) ** 2
            / math.gamma(alpha + n / 2.0)
        )
        worst_zero = max(worst_zero, abs(bg.fourier_weight(0.0, w) - ref) / ref)
    worst_slope = 0.0
    monotone = True
    for (s, alpha, n) in ((0.5, 1.0, 1), (1.0, 1.5, 1), (1.0, 2.0, 2)):
        w = bg.WeightSpec(alpha, "spatial", po.Params(n, s))
        r = np.geomspace(50.0, 200.0, 20)
        slope = np.polyfit(np.log(r), np.log(bg.fourier_weight(r, w)), 1)[0]
        worst_slope = max(worst_slope, abs(slope + (alpha + (n + 1) / 2.0 - 2 * s)))
        grid = np.geomspace(1e-3, 200.0, 200)
        monotone &= bool(np.all(np.diff(bg.fourier_weight(grid, w)) < 0))
    nus = np.concatenate([[0.0], np.geomspace(1e-2, 10.0, 19)])
    rs = np.geomspace(1e-2, 1e2, 20)
    segura_ok = all(sf.segura_check(float(nu), float(r)).holds for nu in nus for r in rs)
    elapsed = time.perf_counter() - t0
    ok = worst_zero <= 1e-10 and worst_slope <= 0.05 and monotone and segura_ok and elapsed <= 30.0
    report(
        3,
        "fourier weight law",
        ok,
        f"zero-value err {worst_zero:.1e}; slope err {worst_slope:.3f}; "
        f"monotone {monotone}; segura {segura_ok}",
        elapsed,
    )
    assert worst_zero <= 1e-10
    assert worst_slope <= 0.05
    assert monotone
    assert segura_ok
    assert elapsed <= 30.0


def test_criterion_4_norm_limit():
    t0 = time.perf_counter()
    grid = fd.SpectralGrid(1, 16.0, 4096)
    w = bg.WeightSpec(1.0, "spatial", po.Params(1, 0.75))
    ray = [1.0, 0.7, 0.5, 0.35, 0.25, 0.18, 0.12, 0.09, 0.07, 0.05]
    finals = {}
    decreasing = {}
    for name, f in (("gaussian", gaussian(grid)), ("bump", bump(grid, radius=3.0))):
        rep = bg.norm_limit(f, w, ray)
        dev = rep.values["deviation"]
        finals[name] = dev[-1]
        decreasing[name] = bool(np.all(np.diff(dev[-5:]) < 0))
    elapsed = time.perf_counter() - t0
    ok = (
        all(v < 2e-2 for v in finals.values())
        and all(decreasing.values())
        and elapsed <= 120.0
    )
    report(
        4,
        "norm limit",
        ok,
        "; ".join(f"{k}: final dev {v:.4f}, decreasing {decreasing[k]}" for k, v in finals.items()),
        elapsed,
    )
    for name in finals:
        assert finals[name] < 2e-2
        assert decreasing[name]
    assert elapsed <= 120.0


def test_criterion_5_isometry_up_to_scalar():
    t0 = time.perf_counter()
    grid = fd.SpectralGrid(1, 16.0, 4096)
    inputs = [gaussian(grid, width=wd) for wd in (0.5, 0.75, 1.0, 1.5, 2.0)]
    inputs += [
        random_bandlimited(grid, cutoff=c, seed=s)
        for (c, s) in ((2.0, 1), (2.0, 2), (3.0, 3), (3.0, 4), (2.5, 5))
    ]
    a_grid = list(np.geomspace(0.004, 4.0, 20))
    cvs = {}
    for s in (0.75, 1.25):
        alpha = max(2 * s - 1.0, 0.5) + 0.25
        w = bg.WeightSpec(alpha, "spatial", po.Params(1, s))
        ratios = np.array(
            [bg.banach_norm(f, w, a_grid).values["isometry_ratio"] for f in inputs]
        )
        cvs[s] = float(ratios.std() / ratios.mean())
    elapsed = time.perf_counter() - t0
    ok = all(cv < 1e-3 for cv in cvs.values()) and elapsed <= 300.0
    report(
        5,
        "isometry up to scalar",
        ok,
        "; ".join(f"s={s}: CV {cv:.2e}" for s, cv in cvs.items()),
        elapsed,
    )
    for s, cv in cvs.items():
        assert cv < 1e-3
    assert elapsed <= 300.0


def test_criterion_6_admissibility_threshold():
    t0 = time.perf_counter()
    found = {}
    for s in (0.75, 1.0):
        found[s] = bg.admissibility_threshold(po.Params(1, s), iterations=8)
    elapsed = time.perf_counter() - t0
    ok = all(abs(found[s] - max(2 * s - 1.0, 0.0)) <= 0.1 for s in found) and elapsed <= 300.0
    report(
        6,
        "admissibility threshold",
        ok,
        "; ".join(
            f"s={s}: found {found[s]:.3f} vs {max(2 * s - 1.0, 0.0):.2f}" for s in found
        ),
        elapsed,
    )
    for s in found:
        assert abs(found[s] - max(2 * s - 1.0, 0.0)) <= 0.1
    assert elapsed <= 300.0


def test_criterion_7_boundary_inversion_and_extension():
    t0 = time.perf_counter()
    grid = fd.SpectralGrid(1, 16.0, 4096)

    # boundary inversion for the rescaled transform
    f = gaussian(grid)
    ray = [0.8, 0.55, 0.4, 0.28, 0.2, 0.14, 0.1, 0.07, 0.05]
    rep = po.boundary_value(f, po.Params(1, 0.75), ray)
    errs = rep.values["relative_l2_error"]
    final_ok = errs[-1] < 5e-2
    tail_decreasing = all(b < a for a, b in zip(errs[-4:], errs[-3:]))

    # constant data recovered to discretization error on every level
    lam = 1.5
    pc = po.Params(1, lam)
    fp = plateau(grid)
    mask = central_mask(grid)
    repc = po.boundary_value(fp, pc, [0.4, 0.2, 0.1], mask=mask)
    cs = po.c_function(pc).real
    const_ok = True
    for a, err in zip(repc.values["a"], repc.values["relative_l2_error"]):
        tail, _ = integrate.quad(lambda u: (1 + u * u) ** (-(lam + 0.5)), 4.0 / a, np.inf)
        const_ok &= err <= 2.0 * (2.0 * tail / cs) + 1e-6

    # extension trace to the boundary at the 4h floor
    p25 = po.Params(1, 2.5)
    fb = random_bandlimited(grid, cutoff=1.5, seed=2)
    psi = ex.extend(fb, [0.4, 0.2, 0.1, 0.05, 0.03125], p25)
    eerrs = [fd.norm(s.with_values(s.values - fb.values)) / fd.norm(fb) for s in psi.slices]
    ext_ok = all(b < a for a, b in zip(eerrs, eerrs[1:])) and eerrs[-1] < 5e-2

    # residual study: second order for the vanishing coefficient, and the
    # printed-vs-bessel comparison recorded
    p = po.Params(1, 0.75)
    g1 = fd.SpectralGrid(1, 16.0, 1024)
    fg = gaussian(g1)
    res_b, res_p = [], []
    for dt in (0.04, 0.02, 0.01):
        levels = [0.3 + 2 * dt, 0.3 + dt, 0.3, 0.3 - dt, 0.3 - 2 * dt]
        r = ex.ode_residual(ex.extend(fg, levels, p), p)
        res_b.append(r.values["residual_bessel_max"])
        res_p.append(r.values["residual_printed_max"])
    orders = np.log2(np.array(res_b[:-1]) / np.array(res_b[1:]))
    order_ok = bool(np.all(orders > 1.7))
    finding = f"printed residual plateaus at {res_p[-1]:.2f}, bessel at {res_b[-1]:.1e}"

    elapsed = time.perf_counter() - t0
    ok = final_ok and tail_decreasing and const_ok and ext_ok and order_ok and elapsed <= 120.0
    report(
        7,
        "boundary inversion and extension",
        ok,
        f"final err {errs[-1]:.4f}; constant-data ok {const_ok}; extension floor "
        f"{eerrs[-1]:.1e}; residual orders {np.round(orders, 2).tolist()}; {finding}",
        elapsed,
    )
    assert final_ok and tail_decreasing
    assert const_ok
    assert ext_ok
    assert order_ok
    assert elapsed <= 120.0


def test_criterion_8_crown_probe():
    t0 = time.perf_counter()
    y = cp.UpperNilpotent(2, np.array([[0.0, 1.0], [0.0, 0.0]]))
    rep = cp.tube_probe(y, sample_count=512, seed=7, tau_steps=256)
    tau = rep.values["crossing_tau"]
    inv = cp.invariance_report(3, seed=11)
    inv_ok = inv.passed
    elapsed = time.perf_counter() - t0
    crossing_ok = tau is not None and abs(tau - 1.0) <= 1e-6
    ok = crossing_ok and inv_ok and elapsed <= 60.0
    report(
        8,
        "crown probe",
        ok,
        f"GL(2) crossing {tau}; invariances pass {inv_ok}",
        elapsed,
    )
    assert crossing_ok
    assert inv_ok
    assert elapsed <= 60.0


def test_criterion_9_infrastructure():
    t0 = time.perf_counter()
    # dual-path transform agreement
    g1 = fd.SpectralGrid(1, 16.0, 1024)
    f1 = gaussian(g1)
    p = po.Params(1, 3.0)
    dual1 = rel_l2(
        po.poisson_transform(f1, 1.0, p, method="fft"),
        po.poisson_transform(f1, 1.0, p, method="quadrature"),
    )
    g2 = fd.SpectralGrid(2, 16.0, 128)
    f2 = gaussian(g2)
    p2 = po.Params(2, 3.0)
    dual2 = rel_l2(
        po.poisson_transform(f2, 1.0, p2, method="fft"),
        po.poisson_transform(f2, 1.0, p2, method="quadrature"),
    )
    # FFT round-trip
    fr = random_bandlimited(g1, cutoff=5.0, seed=3)
    back = fd.inverse_fourier(fd.fourier(fr))
    rt = np.max(np.abs(back.values - fr.values)) / np.max(np.abs(fr.values))
    # eigen-equation residual: second order in h
    pe = po.Params(1, 0.75)
    res = []
    for m, da in ((256, 0.08), (512, 0.04), (1024, 0.02)):
        gg = fd.SpectralGrid(1, 16.0, m)
        res.append(po.eigen_residual(gaussian(gg), 1.0, pe, da=da, laplacian="fd"))
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    order_ok = bool(np.all(np.abs(orders - 2.0) < 0.3))
    elapsed = time.perf_counter() - t0
    ok = dual1 <= 1e-6 and dual2 <= 1e-6 and rt <= 1e-12 and order_ok and elapsed <= 60.0
    report(
        9,
        "infrastructure",
        ok,
        f"dual-path n=1 {dual1:.1e}, n=2 {dual2:.1e}; round-trip {rt:.1e}; "
        f"eigen orders {np.round(orders, 2).tolist()}",
        elapsed,
    )
    assert dual1 <= 1e-6
    assert dual2 <= 1e-6
    assert rt <= 1e-12
    assert order_ok
    assert elapsed <= 60.0
