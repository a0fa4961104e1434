"""Subsystem-encoded fidelity F^A and Markovian correctability residuals.

For a split H = H^A (x) H^B (+) K, the fidelity between the information
carried on subsystem A by two states is

    F^A(tau, ups) = sqrt(Tr P_AB tau * Tr P_AB ups) F(tau^A, ups^A)
                    + sqrt(Tr P_K tau * Tr P_K ups),

with tau^A the normalized B-traced AB block.  If an argument has no AB
weight, the first term is taken as zero (its prefactor vanishes).

Noise channels whose Kraus operators are block upper-triangular with
I^A (x) C_i^B upper-left blocks can only increase F^A between a perfectly
and an imperfectly initialized state; `check_fa_monotone_under_blocked_noise`
samples that statement.

`check_markov_correctable` evaluates the rotating-frame residuals of the
three Lindblad-level correctability conditions on a sampled U(t) schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qcore
from .qcore import Decomposition, dagger, fidelity


@dataclass(frozen=True, eq=False)
class EncodedState:
    rho: np.ndarray
    decomp: Decomposition

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (self.decomp.dim, self.decomp.dim):
            raise qcore.ShapeError("state dim does not match the decomposition")
        object.__setattr__(self, "rho", rho)


def f_a(tau: EncodedState, ups: EncodedState) -> float:
    """Fidelity of the encoded information on subsystem A."""
    if tau.decomp != ups.decomp:
        raise qcore.ShapeError("states carry different decompositions")
    dec = tau.decomp
    red_t, w_t = dec.reduced_a(tau.rho)
    red_u, w_u = dec.reduced_a(ups.rho)
    ab_term = 0.0
    if w_t > 1e-14 and w_u > 1e-14:
        ab_term = np.sqrt(w_t * w_u) * fidelity(red_t / w_t, red_u / w_u)
    k_t = float(np.trace(dec.k_block(tau.rho)).real)
    k_u = float(np.trace(dec.k_block(ups.rho)).real)
    k_term = np.sqrt(max(k_t, 0.0) * max(k_u, 0.0))
    return float(min(1.0, ab_term + k_term))


def fa_angle(tau: EncodedState, ups: EncodedState) -> float:
    return float(np.arccos(np.clip(f_a(tau, ups), -1.0, 1.0)))


# ---------------------------------------------------------------------------
# blocked Kraus channels
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockKraus:
    """CPTP channel with operators [[I_A (x) C_i, D_i], [0, G_i]]."""

    ops: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(o, dtype=complex) for o in self.ops)
        object.__setattr__(self, "ops", ops)
        self.validate()

    def validate(self, tol: float = 1e-10) -> None:
        dim = self.ops[0].shape[0]
        comp = sum(dagger(m) @ m for m in self.ops)
        if np.max(np.abs(comp - np.eye(dim))) > tol:
            raise ValueError("Kraus completeness violated")

    def check_block_form(self, dec: Decomposition, tol: float = 1e-10) -> None:
        for m in self.ops:
            lower_left = m[dec.d_ab :, : dec.d_ab]
            if lower_left.size and np.max(np.abs(lower_left)) > 0:
                raise ValueError("lower-left block must be exactly zero")
            blk = dec.ab_block(m)
            c = dec.trace_out_a(blk) / dec.d_a  # best I_A (x) C fit
            if np.max(np.abs(blk - np.kron(np.eye(dec.d_a), c))) > tol:
                raise ValueError("upper-left block does not factor as I_A (x) C")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(m @ rho @ dagger(m) for m in self.ops)


def sample_block_kraus(
    dec: Decomposition, n_ops: int, rng: np.random.Generator, max_attempts: int = 20
) -> BlockKraus:
    """Random blocked channel, exactly on the completeness manifold.

    C blocks are normalized first (sum C^dag C = I_B), the D blocks are then
    projected onto sum (I (x) C)^dag D = 0, and the (D, G) pair is rescaled
    jointly so the K-block completeness holds.  Near-singular draws resample.
    """
    d_ab, d_k, d_b = dec.d_ab, dec.d_k, dec.d_b

    def crand(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    for _ in range(max_attempts):
        cs = [crand(d_b, d_b) for _ in range(n_ops)]
        t = sum(dagger(c) @ c for c in cs)
        w = np.linalg.eigvalsh(t)
        if w[0] < 1e-6:
            continue
        t_inv_rt = _inv_sqrt(t)
        cs = [c @ t_inv_rt for c in cs]
        if d_k == 0:
            ops = [_assemble(dec, c, None, None) for c in cs]
            return BlockKraus(tuple(ops))
        ds = [0.3 * crand(d_ab, d_k) for _ in range(n_ops)]
        gs = [crand(d_k, d_k) for _ in range(n_ops)]
        ics = [np.kron(np.eye(dec.d_a), c) for c in cs]
        v = sum(dagger(ic) @ d for ic, d in zip(ics, ds))
        ds = [d - ic @ v for ic, d in zip(ics, ds)]
        s_k = sum(dagger(d) @ d + dagger(g) @ g for d, g in zip(ds, gs))
        w = np.linalg.eigvalsh(s_k)
        if w[0] < 1e-6:
            continue
        s_inv_rt = _inv_sqrt(s_k)
        ds = [d @ s_inv_rt for d in ds]
        gs = [g @ s_inv_rt for g in gs]
        ops = [_assemble(dec, c, d, g) for c, d, g in zip(cs, ds, gs)]
        chan = BlockKraus(tuple(ops))
        chan.check_block_form(dec)
        return chan
    raise RuntimeError("failed to sample a well-conditioned blocked channel")


def _inv_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v / np.sqrt(w)) @ v.conj().T


def _assemble(dec: Decomposition, c, d, g) -> np.ndarray:
    m = np.zeros((dec.dim, dec.dim), dtype=complex)
    m[: dec.d_ab, : dec.d_ab] = np.kron(np.eye(dec.d_a), c)
    if dec.d_k:
        m[: dec.d_ab, dec.d_ab :] = d
        m[dec.d_ab :, dec.d_ab :] = g
    return m


def rand_perfect_state(dec: Decomposition, rng: np.random.Generator) -> EncodedState:
    rho_ab = qcore.rand_density(dec.d_ab, rng)
    return EncodedState(dec.embed_ab(rho_ab), dec)


def rand_imperfect_state(dec: Decomposition, rng: np.random.Generator) -> EncodedState:
    return EncodedState(qcore.rand_density(dec.dim, rng), dec)


@dataclass
class MonotoneReport:
    trials: int
    violations: int
    min_gain: float
    rows: list


def check_fa_monotone_under_blocked_noise(
    dec: Decomposition,
    trials: int,
    seed: int,
    n_kraus: int = 3,
    slack: float = 1e-9,
) -> MonotoneReport:
    """Sample F^A(rho, E(rho~)) >= F^A(rho, rho~) over random blocked channels."""
    rng = np.random.default_rng(seed)
    rows = []
    violations = 0
    min_gain = np.inf
    for trial in range(trials):
        perfect = rand_perfect_state(dec, rng)
        imperfect = rand_imperfect_state(dec, rng)
        chan = sample_block_kraus(dec, n_kraus, rng)
        before = f_a(perfect, imperfect)
        after = f_a(perfect, EncodedState(chan.apply(imperfect.rho), dec))
        gain = after - before
        ok = gain >= -slack
        violations += not ok
        min_gain = min(min_gain, gain)
        rows.append((trial, before, after, ok))
    return MonotoneReport(trials, violations, float(min_gain), rows)


def sample_min_overlap(
    tau: EncodedState, ups: EncodedState, n_povms: int, rng: np.random.Generator
) -> float:
    """Smallest overlap over sampled allowed POVMs {P_K, M_i^A (x) I^B}."""
    dec = tau.decomp
    best = np.inf
    for _ in range(n_povms):
        n_el = int(rng.integers(2, 5))
        raw = [qcore.rand_density(dec.d_a, rng) * rng.uniform(0.2, 1.0) for _ in range(n_el)]
        total = sum(raw)
        w, v = np.linalg.eigh(total)
        inv_rt = (v / np.sqrt(w)) @ v.conj().T
        povm = [dec.embed_ab(np.kron(inv_rt @ m @ inv_rt, np.eye(dec.d_b))) for m in raw]
        povm.append(dec.p_k())
        overlap = 0.0
        for m in povm:
            pt = max(np.trace(m @ tau.rho).real, 0.0)
            pu = max(np.trace(m @ ups.rho).real, 0.0)
            overlap += np.sqrt(pt * pu)
        best = min(best, overlap)
    return float(best)


# ---------------------------------------------------------------------------
# Markovian correctability (rotating-frame residuals)
# ---------------------------------------------------------------------------


class GridTooCoarseError(ValueError):
    """Finite-difference H'(t) estimate failed its Richardson check."""


def correcting_frame_schedule(
    hamiltonian: np.ndarray,
    lindblad_ops,
    dec: Decomposition,
    t_grid,
    substeps: int = 4,
) -> list[np.ndarray]:
    """Candidate correcting frame U(t) from the canonical gauge choice.

    Fixes D^B = 0 and the K-block of H' to the value implied by

        i dU/dt = -U H - (i/2) P_AB U S + (i/2) U S U^dag P_AB U,

    with S = sum_j L_j^dag L_j and U(0) = I.  Along this schedule the
    Hamiltonian-compression and leakage conditions hold by construction, so
    feeding the result to :func:`check_markov_correctable` isolates the
    Lindblad block-structure condition: its residual stays small exactly when
    the noise is correctable.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    h = np.asarray(hamiltonian, dtype=complex)
    s = sum(dagger(np.asarray(l, dtype=complex)) @ np.asarray(l, dtype=complex)
            for l in lindblad_ops) if lindblad_ops else np.zeros_like(h)
    p_ab = dec.p_ab()

    def du_dt(u):
        rhs = -u @ h - 0.5j * p_ab @ u @ s + 0.5j * u @ s @ dagger(u) @ p_ab @ u
        return -1j * rhs

    us = [np.eye(dec.dim, dtype=complex)]
    u = us[0]
    for i in range(t_grid.size - 1):
        dt = (t_grid[i + 1] - t_grid[i]) / substeps
        for _ in range(substeps):
            k1 = du_dt(u)
            k2 = du_dt(u + dt / 2 * k1)
            k3 = du_dt(u + dt / 2 * k2)
            k4 = du_dt(u + dt * k3)
            u = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        # polar re-projection kills the slow unitarity drift of long runs
        w, _, vh = np.linalg.svd(u)
        u = w @ vh
        us.append(u)
    return us


@dataclass
class CorrectabilityReport:
    verdict: bool
    residual_lindblad: float
    residual_hamiltonian: float
    residual_leak: float

    def residuals(self) -> tuple[float, float, float]:
        return (self.residual_lindblad, self.residual_hamiltonian, self.residual_leak)


def _h_prime_from_schedule(us: list[np.ndarray], dt: float, idx: int) -> np.ndarray:
    """H'(t) = i (dU/dt) U^dag by central differences."""
    n = len(us)
    if 0 < idx < n - 1:
        du = (us[idx + 1] - us[idx - 1]) / (2 * dt)
    elif idx == 0:
        du = (us[1] - us[0]) / dt
    else:
        du = (us[-1] - us[-2]) / dt
    h = 1j * du @ dagger(us[idx])
    return (h + dagger(h)) / 2


def check_markov_correctable(
    hamiltonian: np.ndarray,
    lindblad_ops,
    dec: Decomposition,
    u_schedule,
    t_grid,
    tol: float = 1e-8,
) -> CorrectabilityReport:
    """Residuals of the three correctability conditions along U(t).

    u_schedule: list of unitaries sampled on t_grid (identity schedule means
    a candidate noiseless subsystem).  The conditions are evaluated in the
    rotating frame O -> U O U^dag with H' estimated by finite differences;
    a Richardson disagreement above 1e-6 on the coarsened grid raises
    :class:`GridTooCoarseError`.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    us = [np.asarray(u, dtype=complex) for u in u_schedule]
    if len(us) != t_grid.size:
        raise qcore.ShapeError("u_schedule and t_grid must have equal length")
    ls = [np.asarray(l, dtype=complex) for l in lindblad_ops]
    p_ab, p_k = dec.p_ab(), dec.p_k()
    ident_a = np.eye(dec.d_a)

    static = len(us) == 1 or all(np.allclose(u, us[0]) for u in us[1:])
    dt = float(t_grid[1] - t_grid[0]) if t_grid.size > 1 else 1.0
    if not static and t_grid.size >= 5:
        # Richardson sanity on the derivative estimate at an interior point
        mid = len(us) // 2
        fine = _h_prime_from_schedule(us, dt, mid)
        coarse = _h_prime_from_schedule(us[::2], 2 * dt, mid // 2)
        if np.max(np.abs(fine - coarse)) > 1e-6:
            raise GridTooCoarseError("H'(t) finite differences disagree beyond 1e-6")

    r1 = r2 = r3 = 0.0
    for idx, u in enumerate(us):
        h_t = u @ hamiltonian @ dagger(u)
        ls_t = [u @ l @ dagger(u) for l in ls]
        if static:
            h_prime = np.zeros_like(h_t)
        else:
            h_prime = _h_prime_from_schedule(us, dt, idx)
        for l_t in ls_t:
            lp = l_t @ p_ab
            c_j = dec.trace_out_a(dec.ab_block(lp)) / dec.d_a
            r1 = max(r1, float(np.linalg.norm(lp - dec.embed_ab(np.kron(ident_a, c_j)))))
        h_eff = h_t + h_prime
        blk = dec.ab_block(h_eff)
        d_b = dec.trace_out_a(blk) / dec.d_a
        r2 = max(r2, float(np.linalg.norm(blk - np.kron(ident_a, d_b))))
        ldag_l = sum(dagger(l_t) @ l_t for l_t in ls_t)
        leak = p_ab @ (h_eff + 0.5j * ldag_l) @ p_k
        r3 = max(r3, float(np.linalg.norm(leak)))
    return CorrectabilityReport(bool(max(r1, r2, r3) < tol), r1, r2, r3)
