"""Differential entanglement-monotone conditions, probed numerically.

Three conditions characterize monotones: invariance under local unitaries,
non-increase on average under local two-outcome measurements
M1 = sqrt((I + eps)/2), M2 = sqrt((I - eps)/2), and (for mixed-state
monotones) convexity.  No symbolic derivatives are ever formed; each
condition is evaluated by finite differences of the state function at probe
scale h, with Richardson halving available to confirm the order.

Also provides the five polynomial invariants of three-qubit pure states and
the sixth-order decreasing monotone

    phi_ABC = 69 - Tr{(2 rho_AB + rho_A (x) I + I (x) rho_B)^3} - 3 Tr{rho_AB^2}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qcore
from .qcore import partial_trace


class ProbeTooLargeError(ValueError):
    """I +- h*eps (or rho +- h*sigma) left the PSD cone."""


@dataclass(frozen=True, eq=False)
class LocalHermitian:
    """Hermitian probe acting on one party of a multipartite system."""

    site: int
    op: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "op", qcore.require_hermitian(self.op, tol=1e-12))

    def embed(self, dims) -> np.ndarray:
        ops = [np.eye(d, dtype=complex) for d in dims]
        if self.op.shape[0] != dims[self.site]:
            raise qcore.ShapeError("probe dim does not match its party")
        ops[self.site] = self.op
        return qcore.tensor(*ops)


@dataclass(frozen=True)
class StateFunction:
    evaluator: Callable[[np.ndarray], float]
    name: str
    direction: str = "decreasing"  # monotone sense under local operations

    def __post_init__(self):
        if self.direction not in ("decreasing", "increasing"):
            raise ValueError("direction must be 'decreasing' or 'increasing'")

    def __call__(self, rho: np.ndarray) -> float:
        return float(self.evaluator(rho))


# ---------------------------------------------------------------------------
# built-in state functions
# ---------------------------------------------------------------------------


def trace_function() -> StateFunction:
    return StateFunction(lambda rho: np.trace(rho).real, "trace", "decreasing")


def local_purity(dims, party: int) -> StateFunction:
    def f(rho):
        ra = partial_trace(rho, dims, [party])
        return np.trace(ra @ ra).real

    return StateFunction(f, f"purity_{party}", "increasing")


def entanglement_entropy(dims, party: int) -> StateFunction:
    """von Neumann entropy of the reduced state on `party` (natural log)."""

    def f(rho):
        ra = partial_trace(rho, dims, [party])
        w = np.linalg.eigvalsh(ra)
        w = w[w > 1e-14]
        return float(-np.sum(w * np.log(w)))

    return StateFunction(f, f"entropy_{party}", "decreasing")


def phi_abc_function() -> StateFunction:
    return StateFunction(lambda rho: phi_abc_from_density(rho), "phi_abc", "decreasing")


# ---------------------------------------------------------------------------
# differential condition probes
# ---------------------------------------------------------------------------


def check_lu_invariance(
    f: StateFunction, rho: np.ndarray, eps: LocalHermitian, dims, h: float = 1e-3
) -> float:
    """|f(U rho U^dag) - f(rho)| / h for U = exp(i h eps)."""
    e = eps.embed(dims)
    u = qcore.expm_skew(e, -h)  # exp(+i h eps)
    rotated = u @ rho @ u.conj().T
    return abs(f(rotated) - f(rho)) / h


def measurement_pair(eps_embedded: np.ndarray, h: float):
    """M1 = sqrt((I + h eps)/2), M2 = sqrt((I - h eps)/2)."""
    dim = eps_embedded.shape[0]
    ident = np.eye(dim)
    w = np.linalg.eigvalsh(eps_embedded)
    if h * max(abs(w[0]), abs(w[-1])) > 1.0:
        raise ProbeTooLargeError("I +- h*eps is not PSD; shrink the probe")
    m1 = qcore.sqrtm_psd((ident + h * eps_embedded) / 2)
    m2 = qcore.sqrtm_psd((ident - h * eps_embedded) / 2)
    return m1, m2


def check_measurement_monotonicity(
    f: StateFunction, rho: np.ndarray, eps: LocalHermitian, dims, h: float = 1e-3
) -> float:
    """delta = p1 f(rho1) + p2 f(rho2) - f(rho).

    For a decreasing monotone delta <= 0 up to tolerance; the sign flips for
    increasing monotones (the caller applies the declared direction).
    """
    m1, m2 = measurement_pair(eps.embed(dims), h)
    out = 0.0
    for m in (m1, m2):
        mrm = m @ rho @ m
        p = np.trace(mrm).real
        if p > 1e-14:
            out += p * f(mrm / p)
    return out - f(rho)


def signed_delta(f: StateFunction, delta: float) -> float:
    """Delta oriented so that a valid monotone gives <= 0."""
    return delta if f.direction == "decreasing" else -delta


def check_convexity(
    f: StateFunction, rho: np.ndarray, sigma: np.ndarray, h: float = 1e-3
) -> float:
    """Second difference f(rho + h sigma) + f(rho - h sigma) - 2 f(rho)."""
    sigma = qcore.require_hermitian(sigma, tol=1e-10)
    if abs(np.trace(sigma)) > 1e-10:
        raise ValueError("sigma must be traceless")
    for sgn in (+1, -1):
        w = np.linalg.eigvalsh(rho + sgn * h * sigma)
        if w[0] < -1e-12:
            raise ProbeTooLargeError("rho +- h*sigma left the PSD cone")
    return f(rho + h * sigma) + f(rho - h * sigma) - 2 * f(rho)


def richardson_ratio(probe: Callable[[float], float], h: float) -> float:
    """probe(h) / probe(h/2); ~2 for a residual that scales linearly in h."""
    a, b = probe(h), probe(h / 2)
    return a / b if b != 0 else np.inf


# ---------------------------------------------------------------------------
# three-qubit invariants
# ---------------------------------------------------------------------------

_EPS2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _amps(psi) -> np.ndarray:
    a = np.asarray(psi, dtype=complex).ravel()
    if a.size != 8:
        raise qcore.ShapeError("need a three-qubit pure state (8 amplitudes)")
    n = np.linalg.norm(a)
    if abs(n - 1.0) > 1e-12:
        raise ValueError("state not normalized")
    return a.reshape(2, 2, 2)


def eval_three_qubit_invariants(psi) -> tuple[float, float, float, float, float]:
    """(I1, ..., I5): local purities of C, B, A, the Kempe invariant, and the
    squared epsilon-tensor contraction (3-tangle squared over 4)."""
    a = _amps(psi)
    rho = np.einsum("ijk,lmn->ijklmn", a, a.conj()).reshape(8, 8)
    rho_a = partial_trace(rho, [2, 2, 2], [0])
    rho_b = partial_trace(rho, [2, 2, 2], [1])
    rho_c = partial_trace(rho, [2, 2, 2], [2])
    rho_ab = partial_trace(rho, [2, 2, 2], [0, 1])
    i1 = np.trace(rho_c @ rho_c).real
    i2 = np.trace(rho_b @ rho_b).real
    i3 = np.trace(rho_a @ rho_a).real
    i4 = (
        3 * np.trace(rho_ab @ np.kron(rho_a, rho_b)).real
        - np.trace(rho_a @ rho_a @ rho_a).real
        - np.trace(rho_b @ rho_b @ rho_b).real
    )
    t = np.einsum(
        "abc,def,ghi,jkl,ad,gj,be,hk,ci,fl->",
        a, a, a, a, _EPS2, _EPS2, _EPS2, _EPS2, _EPS2, _EPS2,
    )
    i5 = float(abs(t) ** 2)
    return float(i1), float(i2), float(i3), float(i4), i5


def kempe_invariant_forms(psi) -> tuple[float, float, float]:
    """The three equivalent pair expressions for I4 (AB, AC, BC)."""
    a = _amps(psi)
    rho = np.einsum("ijk,lmn->ijklmn", a, a.conj()).reshape(8, 8)
    out = []
    for pair in ([0, 1], [0, 2], [1, 2]):
        r_pair = partial_trace(rho, [2, 2, 2], pair)
        r_1 = partial_trace(rho, [2, 2, 2], [pair[0]])
        r_2 = partial_trace(rho, [2, 2, 2], [pair[1]])
        val = (
            3 * np.trace(r_pair @ np.kron(r_1, r_2)).real
            - np.trace(np.linalg.matrix_power(r_1, 3)).real
            - np.trace(np.linalg.matrix_power(r_2, 3)).real
        )
        out.append(float(val))
    return tuple(out)


def phi_abc_from_density(rho: np.ndarray) -> float:
    """phi_ABC on a three-qubit density matrix (pure states intended)."""
    rho_a = partial_trace(rho, [2, 2, 2], [0])
    rho_b = partial_trace(rho, [2, 2, 2], [1])
    rho_ab = partial_trace(rho, [2, 2, 2], [0, 1])
    i2 = np.eye(2)
    x_op = 2 * rho_ab + np.kron(rho_a, i2) + np.kron(i2, rho_b)
    tr_x3 = np.trace(np.linalg.matrix_power(x_op, 3)).real
    return float(69.0 - tr_x3 - 3 * np.trace(rho_ab @ rho_ab).real)


def phi_abc(psi) -> float:
    a = _amps(psi).reshape(-1)
    return phi_abc_from_density(np.outer(a, a.conj()))


def tangle_from_i5(i5: float) -> float:
    """3-tangle tau_ABC = 2 sqrt(I5)."""
    return 2.0 * np.sqrt(max(i5, 0.0))


# ---------------------------------------------------------------------------
# Monte-Carlo sweeps (shared by tests and the CLI/service experiment)
# ---------------------------------------------------------------------------

BUILTIN_NAMES = ("trace", "purity", "entropy", "phi_abc")


def builtin_function(name: str, dims=(2, 2, 2), party: int = 0) -> StateFunction:
    if name == "trace":
        return trace_function()
    if name == "purity":
        return local_purity(list(dims), party)
    if name == "entropy":
        return entanglement_entropy(list(dims), party)
    if name == "phi_abc":
        return phi_abc_function()
    raise ValueError(f"unknown monotone '{name}'; pick from {BUILTIN_NAMES}")


@dataclass
class ConditionSample:
    trial: int
    condition: str
    value: float
    passed: bool


def sweep_conditions(
    name: str,
    trials: int,
    seed: int,
    h: float = 1e-3,
    dims=(2, 2, 2),
    tol: float = 1e-9,
) -> list[ConditionSample]:
    """Random (state, probe) sweep of the three conditions for one builtin.

    Purity is convex, so it passes measurement monotonicity (as an increasing
    monotone) but fails the mixed-state concavity requirement; entropy is
    concave hence fails convexity.  Expectations are encoded per function.
    """
    dims = list(dims)
    f = builtin_function(name, dims)
    rng = np.random.default_rng(seed)
    dim = int(np.prod(dims))
    rows: list[ConditionSample] = []
    for trial in range(trials):
        psi = qcore.rand_state_vector(dim, rng)
        rho = np.outer(psi, psi.conj())
        site = int(rng.integers(0, len(dims)))
        probe = LocalHermitian(site, qcore.rand_hermitian(dims[site], rng))

        lu = check_lu_invariance(f, rho, probe, dims, h)
        # LU residual is O(h) for an invariant f; quadratic term bounded by probe norm
        lu_ok = lu <= 10.0 * h * np.linalg.norm(probe.op) ** 2 + 1e-9
        rows.append(ConditionSample(trial, "lu_invariance", float(lu), bool(lu_ok)))

        delta = signed_delta(f, check_measurement_monotonicity(f, rho, probe, dims, h))
        rows.append(ConditionSample(trial, "measurement", float(delta), bool(delta <= tol)))

        sigma = qcore.rand_hermitian(dim, rng)
        sigma -= np.trace(sigma) * np.eye(dim) / dim
        sigma /= np.linalg.norm(sigma)
        mixed = 0.8 * np.eye(dim) / dim + 0.2 * rho
        second = check_convexity(f, mixed, sigma, h)
        # mixed-state requirement: convexity for decreasing monotones,
        # concavity for increasing ones
        if f.direction == "decreasing":
            conv_ok = second >= -tol
        else:
            conv_ok = second <= tol
        rows.append(ConditionSample(trial, "convexity", float(second), bool(conv_ok)))
    return rows


def phi_abc_measurement_sweep(
    n_states: int, probes_per_state: int, seed: int, h: float = 5e-2
) -> float:
    """Largest average increase of phi_ABC over sampled local weak
    measurements on Haar-random states (should stay <= ~0)."""
    rng = np.random.default_rng(seed)
    f = phi_abc_function()
    worst = -np.inf
    for _ in range(n_states):
        psi = qcore.rand_state_vector(8, rng)
        rho = np.outer(psi, psi.conj())
        base = f(rho)
        for _ in range(probes_per_state):
            site = int(rng.integers(0, 3))
            probe = LocalHermitian(site, qcore.rand_hermitian(2, rng))
            delta = check_measurement_monotonicity(f, rho, probe, [2, 2, 2], h)
            worst = max(worst, delta)
    return float(worst)
