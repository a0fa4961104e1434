"""One qubit Ising-coupled to an N-spin thermal bath: exact reduced dynamics
and every approximation scheme worth comparing against it.

The interaction is H = alpha * sigma_z (x) B with B = sum_n g_n sigma_z^n -
theta.  Everything commutes, so the z component never moves and the xy plane
evolves by the complex decoherence factor

    f(t) = exp(i 2 alpha theta t) prod_n [cos(2 alpha g_n t) - i beta_n sin(2 alpha g_n t)],

with beta_n = tanh(-Omega_n / (2 k T)).  Writing C = Re f and S = -Im f, the
Bloch components rotate and shrink as

    vx(t) = vx(0) C(t) - vy(0) S(t),   vy(t) = vx(0) S(t) + vy(0) C(t).

Approximations: Born/NZ2 cosine, the TCL family (orders 2-4), the NZ family
(orders 3-4, integrated as augmented linear ODEs), coarse-grained Lindblad
dynamics with an optimal averaging time, and the post-Markovian equation with
either the optimal kernel (xi = C) or the NZ2-matching kernel.

No strict weak-coupling semigroup limit exists for this bath: the correlator
Q2 is time independent, so its half-line integral (and with it the would-be
Lindblad rate) diverges.  The coarse-grained generator is the only Markovian
surrogate offered, and no regularization is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ode import rk4_refined


@dataclass(frozen=True, eq=False)
class BathSpec:
    n: int
    g: np.ndarray
    omega: np.ndarray
    inv_temp: float
    alpha: float = 1.0

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.g, dtype=float))
        om = np.atleast_1d(np.asarray(self.omega, dtype=float))
        if g.size != self.n or om.size != self.n:
            raise ValueError("g and omega must have length n")
        if np.any(np.abs(g) > 1 + 1e-12) or np.any(np.abs(om) > 1 + 1e-12):
            raise ValueError("couplings and frequencies must lie in [-1, 1]")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "omega", om)

    @classmethod
    def uniform(cls, n: int, inv_temp: float, g: float = 1.0, omega: float = 1.0,
                alpha: float = 1.0) -> "BathSpec":
        return cls(n, np.full(n, g), np.full(n, omega), inv_temp, alpha)

    @classmethod
    def random(cls, n: int, inv_temp: float, rng: np.random.Generator,
               alpha: float = 1.0) -> "BathSpec":
        return cls(n, rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), inv_temp, alpha)

    @classmethod
    def alternating(cls, m: int, inv_temp: float, g: float = 1.0, omega: float = 1.0,
                    alpha: float = 1.0) -> "BathSpec":
        """Bath of m pairs (g, Omega), (-g, Omega): theta = 0, f real."""
        gs = np.concatenate([np.full(m, g), np.full(m, -g)])
        oms = np.full(2 * m, omega)
        return cls(2 * m, gs, oms, inv_temp, alpha)


@dataclass(frozen=True)
class BlochXY:
    vx: float
    vy: float

    def __post_init__(self):
        if self.vx**2 + self.vy**2 > 1 + 1e-9:
            raise ValueError("Bloch vector outside the unit ball")

    def norm(self) -> float:
        return float(np.hypot(self.vx, self.vy))


@dataclass(frozen=True)
class CorrelatorSet:
    q2: float
    q3: float
    q4: float


def beta_n(spec: BathSpec) -> np.ndarray:
    return np.tanh(-spec.omega * spec.inv_temp / 2.0)


def theta(spec: BathSpec) -> float:
    return float(np.sum(spec.g * beta_n(spec)))


def exact_f(spec: BathSpec, t) -> np.ndarray:
    """Complex decoherence factor f(t); t may be a scalar or array."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    b = beta_n(spec)
    arg = 2.0 * spec.alpha * np.outer(t, spec.g)
    factors = np.cos(arg) - 1j * b[None, :] * np.sin(arg)
    f = np.exp(2j * spec.alpha * theta(spec) * t) * np.prod(factors, axis=1)
    return f


def cs_of_f(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(C, S) in the rotation-mixing convention: C = Re f, S = -Im f."""
    f = np.asarray(f)
    return f.real, -f.imag


def rotate_bloch(v0: BlochXY, c, s) -> tuple[np.ndarray, np.ndarray]:
    c = np.asarray(c, dtype=float)
    s = np.asarray(s, dtype=float)
    return v0.vx * c - v0.vy * s, v0.vx * s + v0.vy * c


def exact_bloch(spec: BathSpec, v0: BlochXY, t):
    c, s = cs_of_f(exact_f(spec, t))
    return rotate_bloch(v0, c, s)


def correlators(spec: BathSpec) -> CorrelatorSet:
    """Bath moments Q_k = Tr{B^k rho_B}, k = 2, 3, 4.

    Exact 2^n enumeration up to n = 20 spins; beyond that the independent-spin
    central-moment products (also exact) take over.
    """
    if spec.n <= 20:
        return _correlators_enumerated(spec)
    return _correlators_moments(spec)


def _correlators_enumerated(spec: BathSpec) -> CorrelatorSet:
    n = spec.n
    idx = np.arange(2**n, dtype=np.uint64)
    # sign_{l,k} = (-1)^{bit k of l}, qubit 0 most significant
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1, dtype=np.uint64)[None, :]) & 1
    signs = 1.0 - 2.0 * bits.astype(float)
    energies = 0.5 * signs @ spec.omega
    e_tilde = signs @ spec.g - theta(spec)
    log_w = -spec.inv_temp * energies
    weights = np.exp(log_w - log_w.max())  # overflow-safe Gibbs weights
    weights /= weights.sum()
    return CorrelatorSet(
        q2=float(weights @ e_tilde**2),
        q3=float(weights @ e_tilde**3),
        q4=float(weights @ e_tilde**4),
    )


def _correlators_moments(spec: BathSpec) -> CorrelatorSet:
    b = beta_n(spec)
    g = spec.g
    var = g**2 * (1 - b**2)
    q2 = float(np.sum(var))
    q3 = float(np.sum(-2 * g**3 * b * (1 - b**2)))
    q4 = float(3 * q2**2 - 2 * np.sum(g**4 * (1 - b**2) * (1 - 3 * b**2)))
    return CorrelatorSet(q2, q3, q4)


def q2_closed_form(spec: BathSpec) -> float:
    b = beta_n(spec)
    return float(np.sum(spec.g**2 * (1 - b**2)))


# ---------------------------------------------------------------------------
# second-order and TCL solutions (closed forms)
# ---------------------------------------------------------------------------


def born_nz2(spec: BathSpec, v0: BlochXY, t):
    """Born approximation == NZ2: v(t) = v(0) cos(2 alpha sqrt(Q2) t)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    q2 = correlators(spec).q2
    env = np.cos(2 * spec.alpha * np.sqrt(q2) * t)
    return v0.vx * env, v0.vy * env


def tcl_solution(spec: BathSpec, order: int, v0: BlochXY, t):
    """Time-convolutionless solutions of order 2, 3 or 4."""
    if order not in (2, 3, 4):
        raise ValueError("TCL order must be 2, 3 or 4")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    q = correlators(spec)
    at = spec.alpha * t
    if order == 2:
        env = np.exp(-2 * q.q2 * at**2)
        return v0.vx * env, v0.vy * env
    rot = 4 * q.q3 * at**3 / 3
    if order == 3:
        env = np.exp(-2 * q.q2 * at**2)
    else:
        env = np.exp(-2 * q.q2 * at**2 + (2 * q.q4 - 6 * q.q2**2) * at**4 / 3)
    vx = env * (v0.vx * np.cos(rot) + v0.vy * np.sin(rot))
    vy = env * (v0.vy * np.cos(rot) - v0.vx * np.sin(rot))
    return vx, vy


# ---------------------------------------------------------------------------
# NZ3 / NZ4: integro-differential -> augmented constant-coefficient ODE
# ---------------------------------------------------------------------------


def _nz_generator(spec: BathSpec, order: int) -> np.ndarray:
    """Companion matrix for y' = c2 u1 + c3 u2 + c4 u3 with u_k the nested
    integrals of y = <1| rho |0> (the vx + i vy component / 2)."""
    q = correlators(spec)
    a = spec.alpha
    c2 = -4 * a**2 * q.q2
    c3 = -8j * a**3 * q.q3
    c4 = 16 * a**4 * (q.q4 - q.q2**2)
    size = order  # y plus order-1 nested integrals
    gen = np.zeros((size, size), dtype=complex)
    gen[0, 1] = c2
    if order >= 3:
        gen[0, 2] = c3
    if order >= 4:
        gen[0, 3] = c4
    for k in range(1, size):
        gen[k, k - 1] = 1.0
    return gen


def nz_solution(spec: BathSpec, order: int, v0: BlochXY, t_grid):
    """NZ3/NZ4 trajectories on a uniform grid (RK4, step-halving verified)."""
    if order not in (2, 3, 4):
        raise ValueError("NZ order must be 2, 3 or 4")
    if order == 2:
        return born_nz2(spec, v0, t_grid)
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    gen = _nz_generator(spec, order)
    y0 = np.zeros(gen.shape[0], dtype=complex)
    y0[0] = (v0.vx + 1j * v0.vy) / 2
    # the initial condition lives at t = 0; prepend it when the grid starts later
    prepended = t_grid.size == 0 or t_grid[0] > 0
    solve_grid = np.concatenate([[0.0], t_grid]) if prepended else t_grid
    traj = rk4_refined(lambda t, y: gen @ y, y0, solve_grid)
    if prepended:
        traj = traj[1:]
    comp = 2 * traj[:, 0]
    return comp.real, comp.imag


# ---------------------------------------------------------------------------
# coarse-grained semigroup dynamics
# ---------------------------------------------------------------------------


def cg_rates(spec: BathSpec, tau: float) -> tuple[float, float]:
    """(gamma_tilde, omega_tilde) from the averaged Kraus expansion."""
    c, s = cs_of_f(exact_f(spec, tau))
    return float((1 - c[0]) / (2 * tau)), float(s[0] / (2 * tau))


def coarse_grain(spec: BathSpec, tau: float, v0: BlochXY, t):
    """Lindblad dynamics with coarse-graining time tau: damped rotation."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    gam, om = cg_rates(spec, tau)
    env = np.exp(-2 * gam * t)
    return rotate_bloch(v0, env * np.cos(2 * om * t), env * np.sin(2 * om * t))


def xy_trace_distance(vx1, vy1, vx2, vy2) -> np.ndarray:
    """Trace distance between two states with equal z components."""
    return 0.5 * np.hypot(np.asarray(vx1) - np.asarray(vx2),
                          np.asarray(vy1) - np.asarray(vy2))


def average_cg_distance(spec: BathSpec, tau: float, v0: BlochXY, t_grid) -> float:
    ve = exact_bloch(spec, v0, t_grid)
    vc = coarse_grain(spec, tau, v0, t_grid)
    return float(np.mean(xy_trace_distance(ve[0], ve[1], vc[0], vc[1])))


def optimal_tau(spec: BathSpec, v0: BlochXY, horizon: float, tau_grid, n_t: int = 400):
    """tau minimizing the time-averaged trace distance to the exact solution."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.size == 0:
        raise ValueError("empty tau grid")
    t_grid = np.linspace(0.0, horizon, n_t)
    dists = np.array([average_cg_distance(spec, tau, v0, t_grid) for tau in tau_grid])
    k = int(np.argmin(dists))
    return float(tau_grid[k]), float(dists[k])


# ---------------------------------------------------------------------------
# post-Markovian master equation
# ---------------------------------------------------------------------------


def post_markovian(spec: BathSpec, kernel: str, v0: BlochXY, t):
    """xi(t) v(0) with the optimal kernel (xi = C) or the NZ2-matching one."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if kernel == "optimal":
        xi, _ = cs_of_f(exact_f(spec, t))
    elif kernel == "nz2_match":
        q2 = correlators(spec).q2
        xi = np.cos(2 * spec.alpha * np.sqrt(q2) * t)
    else:
        raise ValueError("kernel must be 'optimal' or 'nz2_match'")
    return v0.vx * xi, v0.vy * xi


def pm_optimal_residual(spec: BathSpec, v0: BlochXY, t) -> np.ndarray:
    """Minimum achievable trace distance (1/2)|S(t)| |v0| of the optimal PM fit."""
    _, s = cs_of_f(exact_f(spec, t))
    return 0.5 * np.abs(s) * v0.norm()


MODELS = ("exact", "nz2", "nz3", "nz4", "tcl2", "tcl3", "tcl4", "pm", "cg")


def solve_model(spec: BathSpec, model: str, v0: BlochXY, t_grid, tau: float | None = None):
    """Uniform entry point used by the comparison experiment."""
    t_grid = np.asarray(t_grid, dtype=float)
    if model == "exact":
        return exact_bloch(spec, v0, t_grid)
    if model == "nz2":
        return born_nz2(spec, v0, t_grid)
    if model in ("nz3", "nz4"):
        return nz_solution(spec, int(model[2]), v0, t_grid)
    if model in ("tcl2", "tcl3", "tcl4"):
        return tcl_solution(spec, int(model[3]), v0, t_grid)
    if model == "pm":
        return post_markovian(spec, "optimal", v0, t_grid)
    if model == "cg":
        if tau is None:
            tau, _ = optimal_tau(spec, v0, float(t_grid[-1]),
                                 np.linspace(0.05, max(0.5, t_grid[-1]), 60) / spec.alpha)
        return coarse_grain(spec, tau, v0, t_grid)
    raise ValueError(f"unknown model '{model}'; pick from {MODELS}")
