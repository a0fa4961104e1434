"""Fixed-step RK4 with automatic step refinement.

All systems integrated here are small and non-stiff at the scales we run
them, so classic RK4 with Richardson-style halving acceptance is enough.
"""

from __future__ import annotations

import numpy as np


class StepRefinementError(RuntimeError):
    """Halving the step did not converge below the requested tolerance."""


def rk4_fixed(f, y0: np.ndarray, t_grid: np.ndarray, substeps: int = 1) -> np.ndarray:
    """Integrate y' = f(t, y) through t_grid; returns y at every grid point.

    Each grid interval is subdivided into `substeps` RK4 steps.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float)
    out = np.empty((t_grid.size,) + y.shape, dtype=y.dtype)
    out[0] = y
    for i in range(t_grid.size - 1):
        t = t_grid[i]
        h = (t_grid[i + 1] - t_grid[i]) / substeps
        for _ in range(substeps):
            k1 = f(t, y)
            k2 = f(t + h / 2, y + h / 2 * k1)
            k3 = f(t + h / 2, y + h / 2 * k2)
            k4 = f(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        out[i + 1] = y
    return out


def rk4_refined(
    f,
    y0: np.ndarray,
    t_grid: np.ndarray,
    tol: float = 1e-8,
    start_substeps: int = 1,
    max_doublings: int = 12,
) -> np.ndarray:
    """RK4 with substep doubling until the change drops below tol.

    The acceptance criterion is sup-norm relative to the solution scale, so
    exponentially growing solutions (NZ4 outside the Bloch ball) still
    converge.
    """
    substeps = start_substeps
    prev = rk4_fixed(f, y0, t_grid, substeps)
    for _ in range(max_doublings):
        substeps *= 2
        cur = rk4_fixed(f, y0, t_grid, substeps)
        scale = max(1.0, float(np.max(np.abs(cur))))
        if np.max(np.abs(cur - prev)) < tol * scale:
            return cur
        prev = cur
    raise StepRefinementError(
        f"no convergence below {tol:.1e} after {substeps} substeps per interval"
    )
