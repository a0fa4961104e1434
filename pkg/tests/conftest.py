import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def kron_all(ops):
    out = np.array([[1.0 + 0j]])
    for o in ops:
        out = np.kron(out, o)
    return out


@pytest.fixture
def brute_force_bath():
    """Full 2^(n+1)-dim evolution of qubit + bath under the shifted Ising
    Hamiltonian; the independent oracle for every spinbath solver."""
    from oqslab import spinbath
    from oqslab.qcore import I2, X, Y, Z

    def evolve(spec, v0, t, vz0=0.0):
        n = spec.n
        b_vec = spinbath.beta_n(spec)
        bath_op = np.zeros((2**n, 2**n), dtype=complex)
        for k in range(n):
            ops = [I2] * n
            ops[k] = Z
            bath_op += spec.g[k] * kron_all(ops)
        bath_op -= spinbath.theta(spec) * np.eye(2**n)
        ham = spec.alpha * np.kron(Z, bath_op)
        rho_b = kron_all([0.5 * (I2 + b * Z) for b in b_vec])
        rho_s = 0.5 * (I2 + v0.vx * X + v0.vy * Y + vz0 * Z)
        rho = np.kron(rho_s, rho_b)
        w, v = np.linalg.eigh(ham)
        u = (v * np.exp(-1j * w * t)) @ v.conj().T
        rho_t = u @ rho @ u.conj().T
        d_b = 2**n
        rho_s_t = np.trace(rho_t.reshape(2, d_b, 2, d_b), axis1=1, axis2=3)
        return (
            float(np.trace(X @ rho_s_t).real),
            float(np.trace(Y @ rho_s_t).real),
            float(np.trace(Z @ rho_s_t).real),
        )

    return evolve
