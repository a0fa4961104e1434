"""Weak-measurement decomposition of two-outcome generalized measurements.

A strong measurement {M1, M2} with positive commuting operators is realized
as a random walk on the operator curve

    M(x) = sqrt((I + tanh(x) (M2^2 - M1^2)) / 2),

driven by the step operators M(x, +/-eps).  Walking to -infinity collapses
onto outcome 1, to +infinity onto outcome 2.  Only the positive commuting
case is supported; the polar-decomposition extension (interleaved unitaries)
is out of scope and raises :class:`UnsupportedMeasurementError`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qcore
from .qcore import DensityMatrix, dagger


class UnsupportedMeasurementError(ValueError):
    """Measurement outside the positive commuting two-outcome class."""


class WalkNotAbsorbedError(RuntimeError):
    """Random walk hit max_steps before reaching the absorbing boundary."""

    def __init__(self, steps, x_trace):
        self.x_trace = x_trace
        super().__init__(
            f"walk not absorbed after {steps} steps; last positions {x_trace[-5:]}"
        )


@dataclass(frozen=True, eq=False)
class TwoOutcomeMeasurement:
    """Pair M1, M2 with M1^dag M1 + M2^dag M2 = I."""

    m1: np.ndarray
    m2: np.ndarray

    def __post_init__(self):
        m1 = np.asarray(self.m1, dtype=complex)
        m2 = np.asarray(self.m2, dtype=complex)
        if m1.shape != m2.shape or m1.ndim != 2 or m1.shape[0] != m1.shape[1]:
            raise qcore.ShapeError("M1, M2 must be square matrices of equal dim")
        comp = dagger(m1) @ m1 + dagger(m2) @ m2
        dev = np.max(np.abs(comp - np.eye(m1.shape[0])))
        if dev > 1e-10:
            raise ValueError(f"completeness violated by {dev:.3e}")
        object.__setattr__(self, "m1", m1)
        object.__setattr__(self, "m2", m2)

    @property
    def dim(self) -> int:
        return self.m1.shape[0]

    def require_positive_commuting(self) -> None:
        for m in (self.m1, self.m2):
            try:
                herm = qcore.require_hermitian(m, tol=1e-10)
            except qcore.NotHermitianError as exc:
                raise UnsupportedMeasurementError(
                    "non-positive operators (polar-decomposition case) are out of scope"
                ) from exc
            if np.linalg.eigvalsh(herm)[0] < -1e-10:
                raise UnsupportedMeasurementError("operators must be PSD")
        comm = self.m1 @ self.m2 - self.m2 @ self.m1
        if np.linalg.norm(comm) > 1e-10:
            raise UnsupportedMeasurementError(
                f"[M1, M2] = {np.linalg.norm(comm):.3e}; only commuting pairs supported"
            )

    def difference_operator(self) -> np.ndarray:
        """D = M2^2 - M1^2, the walk's generator direction."""
        return self.m2 @ self.m2 - self.m1 @ self.m1


@dataclass(frozen=True)
class WalkConfig:
    epsilon: float
    x_cut: float
    max_steps: int = 10_000_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 0.5)")
        if self.x_cut <= 0:
            raise ValueError("x_cut must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    def is_strong_limit(self) -> bool:
        return np.tanh(self.x_cut) >= 1.0 - 1e-6


@dataclass(frozen=True, eq=False)
class WalkOutcome:
    outcome_index: int
    final_x: float
    steps: int
    final_state: DensityMatrix


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """Barycentric coordinates: entries in [0, 1] summing to 1."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.ndim != 1 or np.any(s < -1e-12) or np.any(s > 1 + 1e-12):
            raise ValueError("simplex entries must lie in [0, 1]")
        if abs(s.sum() - 1.0) > 1e-12:
            raise ValueError(f"simplex sum {s.sum()} != 1")
        object.__setattr__(self, "s", s)


def diagonal_projective(p1: float) -> tuple[TwoOutcomeMeasurement, DensityMatrix]:
    """Qubit projective measurement P1 = |0><0| with a state diag(p1, 1-p1)."""
    if not 0.0 < p1 < 1.0:
        raise ValueError("p1 must be in (0, 1)")
    proj1 = np.diag([1.0 + 0j, 0.0])
    meas = TwoOutcomeMeasurement(proj1, np.eye(2) - proj1)
    rho0 = DensityMatrix(np.diag([p1, 1.0 - p1]).astype(complex))
    return meas, rho0


def curve_point_state(x0: float) -> DensityMatrix:
    """The balanced-curve state at coordinate x0 for P1 = |0><0|:
    weights ((1 - tanh x0)/2, (1 + tanh x0)/2)."""
    th = np.tanh(x0)
    return DensityMatrix(np.diag([(1 - th) / 2, (1 + th) / 2]).astype(complex))


def projective_curve(p1: np.ndarray, p2: np.ndarray, x: float) -> np.ndarray:
    """P(x) = sqrt((1 - tanh x)/2) P1 + sqrt((1 + tanh x)/2) P2."""
    _check_projectors(p1, p2)
    th = np.tanh(x)
    return np.sqrt((1 - th) / 2) * p1 + np.sqrt((1 + th) / 2) * p2


def projective_step(p1: np.ndarray, p2: np.ndarray, x: float, eps: float):
    """Step pair (P(+eps), P(-eps)).

    For complementary projectors the step operators do not depend on the
    current coordinate x; the argument is kept for symmetry with
    :func:`weak_step_operators`.
    """
    del x
    return projective_curve(p1, p2, eps), projective_curve(p1, p2, -eps)


def _check_projectors(p1, p2):
    p1 = np.asarray(p1, dtype=complex)
    p2 = np.asarray(p2, dtype=complex)
    ident = np.eye(p1.shape[0])
    for name, p in (("P1", p1), ("P2", p2)):
        if np.max(np.abs(p @ p - p)) > 1e-10 or np.max(np.abs(p - dagger(p))) > 1e-10:
            raise UnsupportedMeasurementError(f"{name} is not an orthogonal projector")
    if np.max(np.abs(p1 + p2 - ident)) > 1e-10:
        raise UnsupportedMeasurementError("projectors are not complementary")


def effective_operator(meas: TwoOutcomeMeasurement, x: float) -> np.ndarray:
    """M(x): the accumulated operator after walking from 0 to x."""
    meas.require_positive_commuting()
    d = meas.difference_operator()
    return qcore.sqrtm_psd((np.eye(meas.dim) + np.tanh(x) * d) / 2)


def weak_step_operators(meas: TwoOutcomeMeasurement, x: float, eps: float):
    """(M(x, +eps), M(x, -eps)) with C+- = (1 +- tanh(eps) tanh(x)) / 2."""
    meas.require_positive_commuting()
    w, v = qcore.eigh(meas.difference_operator())
    thx, thp, thm = np.tanh(x), np.tanh(x + eps), np.tanh(x - eps)
    cp = (1 + np.tanh(eps) * thx) / 2
    cm = (1 - np.tanh(eps) * thx) / 2
    den = 1 + thx * w
    plus = (v * np.sqrt(cp * (1 + thp * w) / den)) @ v.conj().T
    minus = (v * np.sqrt(cm * (1 + thm * w) / den)) @ v.conj().T
    return plus, minus


def absorb_probability(x0: float, x_cut: float) -> float:
    """Probability that the walk started at x0 is absorbed at +x_cut.

    Closed form p(x) = (1 + tanh(x)/tanh(X)) / 2, exact for any step size.
    """
    return 0.5 * (1.0 + np.tanh(x0) / np.tanh(x_cut))


def curve_state(meas: TwoOutcomeMeasurement, rho0: DensityMatrix, x: float) -> DensityMatrix:
    """Normalized state M(x) rho0 M(x) / tr at walk coordinate x."""
    m = effective_operator(meas, x)
    raw = m @ rho0.mat @ m
    return DensityMatrix(raw / np.trace(raw).real)


def run_walk(
    rho0: DensityMatrix,
    meas: TwoOutcomeMeasurement,
    cfg: WalkConfig,
    x0: float = 0.0,
) -> WalkOutcome:
    """Single weak-measurement random walk until |x| >= x_cut.

    Outcome 1 corresponds to absorption at -x_cut (M(x) -> M1),
    outcome 2 to absorption at +x_cut (M(x) -> M2).
    """
    meas.require_positive_commuting()
    rng = np.random.default_rng(cfg.seed)
    rho = np.asarray(rho0.mat, dtype=complex)
    x = float(x0)
    trace_tail = []
    for step in range(1, cfg.max_steps + 1):
        m_plus, m_minus = weak_step_operators(meas, x, cfg.epsilon)
        p_plus = float(np.trace(m_plus @ rho @ m_plus).real)
        if rng.random() < p_plus:
            rho = m_plus @ rho @ m_plus / p_plus
            x += cfg.epsilon
        else:
            m2rho = m_minus @ rho @ m_minus
            rho = m2rho / np.trace(m2rho).real
            x -= cfg.epsilon
        if abs(x) >= cfg.x_cut:
            outcome = 2 if x > 0 else 1
            return WalkOutcome(outcome, x, step, DensityMatrix(rho))
        if cfg.max_steps - step < 5:
            trace_tail.append(x)
    raise WalkNotAbsorbedError(cfg.max_steps, trace_tail or [x])


def run_walk_ensemble(
    rho0: DensityMatrix,
    meas: TwoOutcomeMeasurement,
    cfg: WalkConfig,
    trials: int,
    x0: float = 0.0,
):
    """Vectorized ensemble of walks; returns (outcomes, steps, final_x) arrays.

    All trials advance in lock step on the shared coordinate grid.  For a
    commuting measurement the transition probability depends only on the
    trial's coordinate and the initial spectral weights, so the whole
    ensemble is one array computation per step.  Deterministic for a fixed
    config seed.
    """
    meas.require_positive_commuting()
    w, v = qcore.eigh(meas.difference_operator())
    w0 = np.clip(np.diag(v.conj().T @ rho0.mat @ v).real, 0.0, None)
    w0 = w0 / w0.sum()
    # rho0 is the physical state at coordinate x0; transition probabilities
    # reference the virtual coordinate-0 state with weights w0 / (1 + tanh(x0) d)
    w0 = w0 / (1.0 + np.tanh(x0) * w)
    w0 = w0 / w0.sum()

    rng = np.random.default_rng(cfg.seed)
    x = np.full(trials, float(x0))
    outcomes = np.zeros(trials, dtype=np.int64)
    steps = np.zeros(trials, dtype=np.int64)
    final_x = np.zeros(trials, dtype=float)
    active = np.arange(trials)
    th_eps = np.tanh(cfg.epsilon)

    for step in range(1, cfg.max_steps + 1):
        xa = x[active]
        num = (1.0 + np.tanh(xa + cfg.epsilon)[:, None] * w[None, :]) @ w0
        den = (1.0 + np.tanh(xa)[:, None] * w[None, :]) @ w0
        cp = (1 + th_eps * np.tanh(xa)) / 2
        p_plus = cp * num / den
        up = rng.random(active.size) < p_plus
        xa = xa + np.where(up, cfg.epsilon, -cfg.epsilon)
        x[active] = xa
        done = np.abs(xa) >= cfg.x_cut
        if np.any(done):
            idx = active[done]
            outcomes[idx] = np.where(xa[done] > 0, 2, 1)
            steps[idx] = step
            final_x[idx] = xa[done]
            active = active[~done]
            if active.size == 0:
                return outcomes, steps, final_x
    raise WalkNotAbsorbedError(cfg.max_steps, list(x[active][:5]))


def multi_outcome_effective(l_ops, s: SimplexPoint) -> np.ndarray:
    """M(s) = sqrt(f(s)) sqrt(sum_j s_j L_j^2), f(s) = 1 + n sum_j s_j (1 - s_j)."""
    ops = [np.asarray(o, dtype=complex) for o in l_ops]
    n = len(ops)
    if n != s.s.size:
        raise qcore.ShapeError("simplex dimension must match number of operators")
    dim = ops[0].shape[0]
    total = sum(o @ o for o in ops)
    if np.max(np.abs(total - np.eye(dim))) > 1e-10:
        raise ValueError("sum_j L_j^2 != I")
    f = 1.0 + n * float(np.sum(s.s * (1.0 - s.s)))
    acc = sum(sj * (o @ o) for sj, o in zip(s.s, ops))
    return np.sqrt(f) * qcore.sqrtm_psd(acc)
