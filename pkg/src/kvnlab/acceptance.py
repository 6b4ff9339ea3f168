"""Acceptance suite: each criterion returns deterministic metrics and a pass flag.

Wall-clock timings are collected separately by :func:`run_suite` so that the
metrics report is byte-identical between runs with the same seed.
"""

import time

import numpy as np

from . import potentials as P
from .action import (ActionScenario, euler_lagrange_residual, first_variation, stationarity_certificate,
                     straight_line, variation_family)
from .characteristics import (classical_trajectory, extended_trajectory, free_heisenberg_closed_form,
                              heisenberg_dense_check, interior_test_states, pairing, strip_private,
                              tangent_trajectory)
from .config import shipped_config
from .observables import newton_residual
from .operators import LambdaV, LambdaX, Liouvillian, V, X, commutator, to_dense
from .phase_space import Rep, gaussian_packet, make_grid, plane_wave, transform
from .propagator import build_plan, delta_limit_study, evolve, run

TINY = make_grid(16, 16, -4.0, 4.0, -4.0, 4.0)
# narrow velocity range keeps streamed test states interior for t <= 1
TINY_FREE = make_grid(16, 16, -4.0, 4.0, -0.5, 0.5)


def criterion_1(seed=0) -> dict:
    ops = {"x": to_dense(X, TINY), "v": to_dense(V, TINY),
           "lambda_x": to_dense(LambdaX, TINY), "lambda_v": to_dense(LambdaV, TINY)}
    zero_pairs = [("x", "x"), ("v", "v"), ("x", "v"), ("x", "lambda_v"), ("v", "lambda_x"),
                  ("lambda_x", "lambda_v")]
    zero = {f"[{a},{b}]": float(np.max(np.abs(commutator(ops[a], ops[b]).matrix))) for a, b in zero_pairs}
    states = interior_test_states(TINY, 10)
    cx = commutator(ops["x"], ops["lambda_x"])
    cv = commutator(ops["v"], ops["lambda_v"])
    err_x = max(abs(cx.expectation(p) - 1j) for p in states)
    err_v = max(abs(cv.expectation(p) - 1j) for p in states)
    return {
        "zero_commutators_max": zero,
        "canonical_x_error": float(err_x),
        "canonical_v_error": float(err_v),
        "n_states": len(states),
        "passed": max(zero.values()) < 1e-12 and err_x < 1e-6 and err_v < 1e-6 and len(states) >= 10,
    }


def criterion_2(seed=0) -> dict:
    herm = {}
    for name, pot in (("harmonic", P.harmonic()), ("quartic", P.quartic()), ("free", P.free())):
        herm[name] = to_dense(Liouvillian(pot, 1.0), TINY).hermiticity_error()
    herm["harmonic_8x8_m2"] = to_dense(Liouvillian(P.harmonic(), 2.0),
                                       make_grid(8, 8, -3.0, 3.0, -2.0, 2.0)).hermiticity_error()
    cfg = shipped_config("harmonic")
    psi0 = gaussian_packet(cfg.grid, cfg.x0, cfg.v0, cfg.sigma_x, cfg.sigma_v)
    plan = build_plan(cfg.grid, cfg.potential, cfg.mass, cfg.dt)
    n = 10_000
    drift = abs(run(psi0, plan, n).norm() - psi0.norm())
    return {
        "hermiticity_error": herm,
        "norm_drift_10k_steps": float(drift),
        "passed": max(herm.values()) < 1e-12 and drift < 1e-10,
    }


def criterion_3(seed=0) -> dict:
    cfg = shipped_config("harmonic")
    psi0 = gaussian_packet(cfg.grid, cfg.x0, cfg.v0, cfg.sigma_x, cfg.sigma_v)
    plan = build_plan(cfg.grid, cfg.potential, cfg.mass, cfg.dt)
    _, series = evolve(psi0, plan, cfg.steps, cfg.record_every)
    res_default = newton_residual(series)
    # per-step sampling makes the Strang residual vanish identically for a linear
    # force, so the order is measured at a fixed 4 steps per sample
    k = 4
    res = []
    for dt in (cfg.dt, cfg.dt / 2):
        n = k * int(round(np.pi / (k * dt)))
        _, s = evolve(psi0, build_plan(cfg.grid, cfg.potential, cfg.mass, dt), n, k)
        res.append(newton_residual(s))
    ratio = res[0] / res[1]
    return {
        "newton_residual_default": res_default,
        "record_every_for_order": k,
        "newton_residual_dt": res[0],
        "newton_residual_dt_half": res[1],
        "ratio": float(ratio),
        "passed": res_default < 1e-5 and 3.5 <= ratio <= 4.5,
    }


def criterion_4(seed=0) -> dict:
    study = delta_limit_study(P.quartic(1.0), 1.0, 1.0, 0.0, sigmas=(0.1, 0.05, 0.025, 0.0125),
                              dt=0.005, T=2.0)
    study["passed"] = study["monotone"] and study["final_dev"] < 1e-3
    return study


def criterion_5(seed=0) -> dict:
    rows = []
    for t in (0.25, 0.5, 1.0):
        r = strip_private(heisenberg_dense_check(TINY, P.harmonic(), 1.0, t))
        rows.append(r)
    free = [free_heisenberg_closed_form(TINY_FREE, t) for t in (0.25, 0.5, 1.0)]
    ok = all(r["unitarity_error"] < 1e-10 and r["commutator_x_lambda_x_error"] < 1e-5
             and r["commutator_v_lambda_v_error"] < 1e-5 for r in rows)
    ok = ok and all(f["max_interior_element"] < 1e-8 for f in free)
    return {"harmonic": rows, "free_closed_form": free, "passed": ok}


def criterion_6(seed=0) -> dict:
    T, h = 2.0, 1e-3
    n = int(round(T / h))
    out = {}
    ok = True
    for name, pot in (("harmonic", P.harmonic()), ("quartic", P.quartic())):
        path = classical_trajectory(1.0, 0.0, pot, 1.0, h, n)
        spec = variation_family(path.t, 20, seed)
        rep = first_variation("hamilton", path, spec, pot, 1.0)
        el = euler_lagrange_residual(path, pot, 1.0)
        out[name] = {"max_abs_dW": rep.max_abs_dW, "classification": rep.classification,
                     "tol_stationary": rep.tol_stationary, "euler_lagrange_residual": el}
        ok = ok and rep.max_abs_dW < 1e-5 and rep.stationary and el < 1e-5
    line = straight_line(1.0, 0.0, T, h)
    spec = variation_family(line.t, 20, seed)
    rep = first_variation("hamilton", line, spec, P.harmonic(), 1.0)
    out["straight_line"] = {"max_abs_dW": rep.max_abs_dW, "classification": rep.classification,
                            "euler_lagrange_residual": euler_lagrange_residual(line, P.harmonic(), 1.0)}
    ok = ok and rep.max_abs_dW > 1e-2 and not rep.stationary
    out["passed"] = ok
    return out


def criterion_7(seed=0) -> dict:
    out = {}
    ok = True
    for name, pot in (("harmonic", P.harmonic()), ("quartic", P.quartic())):
        cert = stationarity_certificate(ActionScenario(pot, seed=seed))
        on = cert["on_shell"]
        tol = on["schwinger_path"]["tolerances"]["tol_stationary"]
        pert = on["schwinger_path_perturbed_lambda"]["max_abs_dW_deps"]
        offp = [o["schwinger_path"]["max_abs_dW_deps"] for o in cert["off_shell"]]
        offm = [o["schwinger_multiplier"]["max_abs_dW_deps"] for o in cert["off_shell"]]
        row = {
            "W_S_on_shell": cert["schwinger_on_shell_W"],
            "on_shell_max_dW_path": on["schwinger_path"]["max_abs_dW_deps"],
            "on_shell_max_dW_multiplier": on["schwinger_multiplier"]["max_abs_dW_deps"],
            "tol_stationary": tol,
            "perturbed_lambda_max_dW": pert,
            "bias_betas": [o["beta"] for o in cert["off_shell"]],
            "bias_max_dW_path": offp,
            "bias_max_dW_multiplier": offm,
            "certificate_passed": cert["passed"],
        }
        ok = ok and abs(row["W_S_on_shell"]) < 1e-8 and row["on_shell_max_dW_path"] < 1e-5
        ok = ok and row["on_shell_max_dW_multiplier"] < 1e-5 and pert > 10 * tol
        # bias must be visible to at least one deformation mode, growing with beta
        best = [max(a, b) for a, b in zip(offp, offm)]
        ok = ok and best[0] > 10 * tol and best[1] > best[0] and cert["passed"]
        if name == "quartic":
            # nonlinear force: the (x, v) deformation alone sees the bias
            ok = ok and offp[0] > 10 * tol and offp[1] > offp[0]
        out[name] = row
    out["passed"] = ok
    return out


def criterion_8(seed=0) -> dict:
    g = make_grid(64, 64, -8.0, 8.0, -8.0, 8.0)
    psi = gaussian_packet(g, 1.0, -0.5, 1.1, 1.2)
    x, v = g.mesh()
    psi = psi.with_data(psi.data * np.exp(1j * (0.8 * x - 0.3 * v * v)))
    round_trip = 0.0
    norm_err = 0.0
    for rep in Rep:
        for target in Rep:
            a = transform(transform(psi, rep), target)
            b = transform(psi, target)
            round_trip = max(round_trip, float(np.max(np.abs(transform(a, Rep.XV).data - psi.data))))
            round_trip = max(round_trip, float(np.max(np.abs(a.data - b.data))))
            norm_err = max(norm_err, abs(a.norm() - 1.0))
    spikes = []
    for jx, jv in ((0, 5), (3, 0), (7, 60), (31, 33)):
        pw = plane_wave(g, g.kx[jx], g.kv[jv])
        for rep, idx in ((Rep.XLv, (None, jv)), (Rep.LxV, (jx, None)), (Rep.LxLv, (jx, jv))):
            d = np.abs(transform(pw, rep).data) ** 2
            if idx[0] is None:
                frac = d[:, idx[1]].sum() / d.sum()
            elif idx[1] is None:
                frac = d[idx[0], :].sum() / d.sum()
            else:
                frac = d[idx] / d.sum()
            spikes.append(float(1.0 - frac))
    return {
        "round_trip_error": round_trip,
        "norm_error": float(norm_err),
        "spike_leakage_max": max(spikes),
        "passed": round_trip < 1e-12 and norm_err < 1e-12 and max(spikes) < 1e-12,
    }


def _harmonic_closed(t, x0, v0, lx0, lv0):
    c, s = np.cos(t), np.sin(t)
    return (x0 * c + v0 * s, -x0 * s + v0 * c, lv0 * s + lx0 * c, lv0 * c - lx0 * s)


def criterion_9(seed=0) -> dict:
    pot = P.harmonic()
    T = 2.0
    verlet_err, rk_err = [], []
    for h in (0.02, 0.01):
        n = int(round(T / h))
        p = classical_trajectory(1.0, 0.3, pot, 1.0, h, n)
        ex = _harmonic_closed(p.t[-1], 1.0, 0.3, 0.0, 0.0)
        verlet_err.append(max(abs(p.x[-1] - ex[0]), abs(p.v[-1] - ex[1])))
    for h in (0.1, 0.05):
        n = int(round(T / h))
        e = extended_trajectory(1.0, 0.3, 0.4, 1.0, pot, 1.0, h, n)
        ex = _harmonic_closed(e.t[-1], 1.0, 0.3, 0.4, 1.0)
        rk_err.append(max(abs(a - b) for a, b in zip((e.x[-1], e.v[-1], e.lambda_x[-1], e.lambda_v[-1]), ex)))
    q = P.quartic()
    h, n = 1e-3, 2000
    e = extended_trajectory(1.0, 0.0, 0.3, 1.0, q, 1.0, h, n)
    _, _, _, dx, dv = tangent_trajectory(1.0, 0.0, 0.7, -0.2, q, 1.0, h, n)
    pair = pairing(e, dx, dv)
    drift_tangent = float(np.max(np.abs(pair - pair[0])))
    eps = 1e-5
    up = extended_trajectory(1.0 + 0.7 * eps, -0.2 * eps, 0.0, 0.0, q, 1.0, h, n)
    dn = extended_trajectory(1.0 - 0.7 * eps, 0.2 * eps, 0.0, 0.0, q, 1.0, h, n)
    pair_fd = pairing(e, (up.x - dn.x) / (2 * eps), (up.v - dn.v) / (2 * eps))
    drift_fd = float(np.max(np.abs(pair_fd - pair_fd[0])))
    r_verlet = verlet_err[0] / verlet_err[1]
    r_rk = rk_err[0] / rk_err[1]
    return {
        "verlet_errors": verlet_err,
        "verlet_ratio": float(r_verlet),
        "rk4_errors": rk_err,
        "rk4_ratio": float(r_rk),
        "pairing_drift_tangent": drift_tangent,
        "pairing_drift_finite_difference": drift_fd,
        "passed": (abs(r_verlet - 4) <= 0.15 * 4 and abs(r_rk - 16) <= 0.15 * 16
                   and drift_tangent < 1e-8 and drift_fd < 1e-8),
    }


CRITERIA = [
    ("1", "commutation relations", 5.0, criterion_1),
    ("2", "Liouvillian Hermiticity and unitarity", 30.0, criterion_2),
    ("3", "Newton equation in expectation", 30.0, criterion_3),
    ("4", "delta-limit particle recovery", 60.0, criterion_4),
    ("5", "Heisenberg evolution", 10.0, criterion_5),
    ("6", "Hamilton principle", 10.0, criterion_6),
    ("7", "Schwinger principle", 20.0, criterion_7),
    ("8", "representation transforms", 2.0, criterion_8),
    ("9", "extended-dynamics convergence", 10.0, criterion_9),
]

SUITE_LIMIT = 120.0


def run_suite(seed=0, only=None, echo=print):
    """Run the criteria; returns (report, timings).

    ``report`` holds only deterministic content.  ``timings`` holds wall-clock
    seconds and the runtime-limit verdicts.
    """
    report = {"seed": seed, "criteria": {}}
    timings = {"criteria": {}}
    start = time.perf_counter()
    for cid, title, limit, fn in CRITERIA:
        if only and cid not in only:
            continue
        t0 = time.perf_counter()
        res = fn(seed)
        dt = time.perf_counter() - t0
        report["criteria"][cid] = {"title": title, **res}
        timings["criteria"][cid] = {"seconds": dt, "limit": limit, "within_limit": dt < limit}
        if echo:
            status = "PASS" if res["passed"] and dt < limit else "FAIL"
            echo(f"[{status}] criterion {cid}: {title} ({dt:.1f}s, limit {limit:.0f}s)")
    total = time.perf_counter() - start
    timings["total_seconds"] = total
    timings["within_limit"] = total < SUITE_LIMIT
    report["all_passed"] = all(c["passed"] for c in report["criteria"].values())
    return report, timings
