"""Experiment runners: pure functions from validated parameters to rows.

Both the HTTP service and the CLI client go through these, so one seed
always produces one byte stream.  Each runner returns (header, rows, meta);
rows are plain Python scalars.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import cqec, holonomy, monotones, spinbath, subsys, weakmeas
from .qcore import Decomposition


class NumericFailure(RuntimeError):
    """Computation failed after parameters validated (exit code 3 surface)."""


def _workers() -> int:
    raw = os.environ.get("OQS_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def weakmeas_walk(p1: float, eps: float, xcut: float, trials: int, seed: int,
                  x0: float | None = None):
    """Ensemble of weak-measurement walks for the diagonal qubit measurement."""
    cfg = weakmeas.WalkConfig(epsilon=eps, x_cut=xcut, seed=seed)
    if x0 is None:
        meas, rho0 = weakmeas.diagonal_projective(p1)
        start = 0.0
    else:
        meas, _ = weakmeas.diagonal_projective(p1)
        rho0 = weakmeas.curve_point_state(x0)
        start = float(x0)
    try:
        outcomes, steps, final_x = weakmeas.run_walk_ensemble(rho0, meas, cfg, trials, start)
    except weakmeas.WalkNotAbsorbedError as exc:
        raise NumericFailure(str(exc)) from exc
    header = ["trial", "outcome", "steps", "final_x"]
    rows = [
        [i, int(outcomes[i]), int(steps[i]), float(final_x[i])]
        for i in range(trials)
    ]
    meta = {
        "outcome1_frequency": float(np.mean(outcomes == 1)),
        "mean_steps": float(np.mean(steps)),
        "analytic_plus_absorption": weakmeas.absorb_probability(start, xcut),
    }
    return header, rows, meta


def monotone_check(name: str, trials: int, seed: int, h: float = 1e-3):
    samples = monotones.sweep_conditions(name, trials, seed, h)
    header = ["trial", "condition", "value", "pass"]
    rows = [[s.trial, s.condition, s.value, s.passed] for s in samples]
    n_pass = sum(s.passed for s in samples)
    meta = {"passed": n_pass, "total": len(samples)}
    return header, rows, meta


def _spinbath_specs(n: int, beta: float, random: bool, ensemble: int, seed: int,
                    g: float, omega: float, alpha: float):
    if not random:
        return [spinbath.BathSpec.uniform(n, beta, g, omega, alpha)]
    return [
        spinbath.BathSpec.random(n, beta, np.random.default_rng([seed, k]), alpha)
        for k in range(ensemble)
    ]


def spinbath_compare(model: str, n: int, beta: float, tmax: float, steps: int,
                     seed: int = 0, random: bool = False, ensemble: int = 50,
                     g: float = 1.0, omega: float = 1.0, alpha: float = 1.0,
                     tau: float | None = None, vx0: float | None = None,
                     vy0: float | None = None):
    """Model-vs-exact comparison on a uniform grid of alpha t."""
    if vx0 is None and vy0 is None:
        vx0 = vy0 = 1 / np.sqrt(2)
    v0 = spinbath.BlochXY(float(vx0) if vx0 is not None else 0.0,
                          float(vy0) if vy0 is not None else 0.0)
    specs = _spinbath_specs(n, beta, random, ensemble, seed, g, omega, alpha)
    at_grid = np.linspace(0.0, tmax, steps)

    def solve(spec):
        t_grid = at_grid / spec.alpha
        ve = spinbath.exact_bloch(spec, v0, t_grid)
        try:
            vm = spinbath.solve_model(spec, model, v0, t_grid, tau=tau)
        except Exception as exc:  # refinement failures surface as numeric errors
            raise NumericFailure(f"spinbath model '{model}' failed: {exc}") from exc
        return np.asarray(ve), np.asarray(vm)

    if len(specs) == 1:
        results = [solve(specs[0])]
    else:
        with ThreadPoolExecutor(max_workers=_workers()) as pool:
            results = list(pool.map(solve, specs))
    ve = np.mean([r[0] for r in results], axis=0)
    vm = np.mean([r[1] for r in results], axis=0)
    dist = spinbath.xy_trace_distance(ve[0], ve[1], vm[0], vm[1])
    header = ["alpha_t", "vx_exact", "vx_model", "trace_distance"]
    rows = [
        [float(at_grid[i]), float(ve[0][i]), float(vm[0][i]), float(dist[i])]
        for i in range(at_grid.size)
    ]
    meta = {"model": model, "ensemble": len(specs), "mean_trace_distance": float(np.mean(dist))}
    return header, rows, meta


def cqec_markov(r: float, tmax: float, steps: int, lam: float = 1.0):
    """Markovian bit-flip code trajectory; tmax in units of lambda t."""
    params = cqec.CqecParams.markov(r, lam)
    t_grid = np.linspace(0.0, tmax / lam, steps)
    traj = cqec.markov_bitflip(params, np.array([1.0, 0, 0, 0]), t_grid)
    closed = cqec.markov_bitflip_outside_weight(params, t_grid)
    header = ["lambda_t", "a", "b", "c", "d", "outside_weight", "outside_closed_form"]
    rows = [
        [float(lam * t_grid[i]), *(float(x) for x in traj[i]),
         float(traj[i, 1] + traj[i, 2]), float(closed[i])]
        for i in range(t_grid.size)
    ]
    meta = {"r": r, "asymptote": 3.0 / (4.0 + r)}
    return header, rows, meta


def cqec_nonmarkov(big_r: float, tmax: float, steps: int, gamma: float = 1.0,
                   log_grid: bool = False):
    """Non-Markovian bit-flip code codeword fidelity; tmax in gamma t."""
    params = cqec.CqecParams.nonmarkov(big_r, gamma)
    if log_grid:
        gt = np.geomspace(max(tmax * 1e-4, 1e-3), tmax, steps)
    else:
        gt = np.linspace(0.0, tmax, steps)
    traj = cqec.nm_bitflip_propagate(params, cqec.NmCoeffs.code_space(), gt / gamma)
    approx = cqec.nm_fidelity_approx(params, gt / gamma)
    header = ["gamma_t", "fidelity", "approx_fidelity"]
    rows = [[float(gt[i]), float(traj[i, 0]), float(approx[i])] for i in range(gt.size)]
    meta = {"R": big_r}
    return header, rows, meta


def cqec_single(kind: str, ratio: float, tmax: float, steps: int):
    """Single-qubit code fidelity trajectories (markov: lambda t; nonmarkov: gamma t)."""
    t = np.linspace(0.0, tmax, steps)
    if kind == "markov":
        params = cqec.CqecParams.markov(ratio)
        alpha = cqec.markov_single(1.0, params, t)
        header = ["lambda_t", "alpha"]
        rows = [[float(t[i]), float(alpha[i])] for i in range(t.size)]
        meta = {"r": ratio, "fixed_point": cqec.markov_fixed_point(params)}
    elif kind == "nonmarkov":
        params = cqec.CqecParams.nonmarkov(ratio)
        alpha, beta = cqec.nonmarkov_single(params, t)
        header = ["gamma_t", "alpha", "beta"]
        rows = [[float(t[i]), float(alpha[i]), float(beta[i])] for i in range(t.size)]
        meta = {"R": ratio, "fixed_point": cqec.nonmarkov_fixed_point(params)}
    else:
        raise ValueError("kind must be 'markov' or 'nonmarkov'")
    return header, rows, meta


def cqec_eigen(big_r: float, gamma: float = 1.0):
    """The 13 generator eigenvalues sorted by magnitude."""
    w = cqec.nm_eigenvalues(cqec.CqecParams.nonmarkov(big_r, gamma))
    header = ["re", "im"]
    rows = [[float(v.real), float(v.imag)] for v in w]
    meta = {"R": big_r}
    return header, rows, meta


def subsys_fa(d_a: int, d_b: int, d_k: int, trials: int, seed: int):
    dec = Decomposition(d_a, d_b, d_k)
    report = subsys.check_fa_monotone_under_blocked_noise(dec, trials, seed)
    header = ["trial", "fa_before", "fa_after", "pass"]
    rows = [[t, float(b), float(a), bool(ok)] for t, b, a, ok in report.rows]
    meta = {"violations": report.violations, "min_gain": report.min_gain}
    return header, rows, meta


def holonomy_run(gate: str, t_factor: float, schedule: str, steps: int):
    sched = {"smooth": "smooth_bump", "linear": "linear", "trig": "trig"}.get(schedule)
    if sched is None:
        raise ValueError("schedule must be linear, trig or smooth")
    try:
        res = holonomy.run_gate(gate, t_factor, steps, sched)
    except holonomy.DegeneratePathError as exc:
        raise NumericFailure(str(exc)) from exc
    header = ["T", "leakage", "gate_fidelity", "phase0", "phase1"]
    rows = [[float(t_factor), float(res.leakage), float(res.fidelity),
             float(res.phases[0]), float(res.phases[1])]]
    meta = {"gate": gate, "schedule": sched,
            "global_phase": float(np.angle(res.global_phase))}
    return header, rows, meta


# ---------------------------------------------------------------------------
# figure reproduction bundles
# ---------------------------------------------------------------------------


def _fig_cqec1():
    series = []
    for big_r in (1.0, 2.0, 5.0):
        t = np.linspace(0.0, 12.0, 600)
        alpha, _ = cqec.nonmarkov_single(cqec.CqecParams.nonmarkov(big_r), t)
        rows = [[float(t[i]), float(alpha[i])] for i in range(t.size)]
        series.append((f"R{big_r:g}", ["gamma_t", "alpha"], rows))
    return series


def _fig_cqec3():
    header, rows, _ = cqec_nonmarkov(100.0, 5000.0, 1200)
    return [("R100-long", header, rows)]


def _fig_cqec4():
    header, rows, _ = cqec_nonmarkov(100.0, 1.0, 600)
    return [("R100-short", header, rows)]


def _fig_spinbath_tcl(n: int):
    series = []
    for beta in (1.0, 10.0):
        for model in ("exact", "tcl2", "tcl3", "tcl4"):
            header, rows, _ = spinbath_compare(model, n, beta, tmax=3.0, steps=400)
            series.append((f"beta{beta:g}-{model}", header, rows))
    return series


def _fig_spinbath_nz(n: int):
    series = []
    for beta in (1.0, 10.0):
        for model in ("exact", "nz2", "nz3", "nz4"):
            header, rows, _ = spinbath_compare(model, n, beta, tmax=3.0, steps=400)
            series.append((f"beta{beta:g}-{model}", header, rows))
    return series


def _fig_spinbath_cg():
    header, rows, _ = spinbath_compare("cg", 50, 1.0, tmax=4.0, steps=400)
    return [("n50-beta1-cg", header, rows)]


FIGURES = {
    "cqec-fig1": _fig_cqec1,
    "cqec-fig3": _fig_cqec3,
    "cqec-fig4": _fig_cqec4,
    "spinbath-n100-tcl": lambda: _fig_spinbath_tcl(100),
    "spinbath-n4-tcl": lambda: _fig_spinbath_tcl(4),
    "spinbath-n100-nz": lambda: _fig_spinbath_nz(100),
    "spinbath-n4-nz": lambda: _fig_spinbath_nz(4),
    "spinbath-n50-cg": _fig_spinbath_cg,
}


def reproduce(figure_id: str):
    """CSV bundle (list of named series) for a paper figure."""
    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure '{figure_id}'; known: {sorted(FIGURES)}")
    return FIGURES[figure_id]()
