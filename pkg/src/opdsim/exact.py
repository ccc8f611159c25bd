"""Ground-truth oracles: dense global propagation, reduced map matrices,
master-equation ODE integration, and generator extraction from map families.

These routines are intentionally dense and small; they exist to validate the
trajectory engines, not to scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DimensionCapError
from .linalg import (
    BipartiteState,
    hermitian_eig,
    hermitianize,
    ketbra,
    partial_trace,
    tensor_product,
    vec,
)

DIM_CAP = 4096


def _unitary_factory(h: np.ndarray, tol: float = 1e-10):
    """Return U(t) = exp(-i h t) as a callable, via eigendecomposition."""
    w, v = hermitian_eig(h, tol)

    def u_of_t(t: float) -> np.ndarray:
        return (v * np.exp(-1j * w * t)) @ v.conj().T

    return u_of_t


def evolve_operator(h: np.ndarray, x0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """X(t) = U(t) X0 U(t)^dag for Hermitian h; X0 need not be positive."""
    if h.shape[0] > DIM_CAP:
        raise DimensionCapError(f"dimension {h.shape[0]} exceeds cap {DIM_CAP}")
    u_of_t = _unitary_factory(h)
    out = np.empty((len(times),) + x0.shape, dtype=complex)
    for i, t in enumerate(times):
        u = u_of_t(t)
        out[i] = u @ x0 @ u.conj().T
    return out


def propagate_global(h: np.ndarray, state: BipartiteState, times: np.ndarray) -> np.ndarray:
    """Unitary propagation of a bipartite state; returns stacked rho_SE(t)."""
    if h.shape != (state.dim, state.dim):
        raise ValueError("Hamiltonian dimension does not match the state")
    return evolve_operator(h, state.rho, times)


def reduced_map(h: np.ndarray, rho_env: np.ndarray, t: float, ds: int) -> np.ndarray:
    """Matrix of X -> tr_E[U(t) (X (x) rho_env) U(t)^dag] in row-major vec."""
    de = rho_env.shape[0]
    if ds * de != h.shape[0]:
        raise ValueError("factor dimensions do not match the Hamiltonian")
    if h.shape[0] > DIM_CAP:
        raise DimensionCapError(f"dimension {h.shape[0]} exceeds cap {DIM_CAP}")
    u = _unitary_factory(h)(t)
    m = np.empty((ds * ds, ds * ds), dtype=complex)
    for k in range(ds):
        for l in range(ds):
            x = ketbra(ds, k, l)
            image = partial_trace(
                u @ tensor_product(x, rho_env) @ u.conj().T, (ds, de), "system"
            )
            m[:, k * ds + l] = vec(image)
    return m


def apply_map(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    return (m @ vec(x)).reshape(d, d)


def choi_matrix(m: np.ndarray, d: int) -> np.ndarray:
    """Choi matrix sum_kl |k><l| (x) Phi[|k><l|] of a map matrix."""
    c = np.zeros((d * d, d * d), dtype=complex)
    for k in range(d):
        for l in range(d):
            c += tensor_product(ketbra(d, k, l), apply_map(m, ketbra(d, k, l)))
    return c


@dataclass(frozen=True)
class CptpReport:
    choi_min_eigenvalue: float
    trace_defect: float

    def is_cp(self, tol: float = 1e-8) -> bool:
        return self.choi_min_eigenvalue >= -tol

    def is_tp(self, tol: float = 1e-10) -> bool:
        return self.trace_defect <= tol


def cptp_report(m: np.ndarray, d: int) -> CptpReport:
    choi = choi_matrix(m, d)
    eig_min = float(np.linalg.eigvalsh(hermitianize(choi)).min())
    defect = 0.0
    for k in range(d):
        for l in range(d):
            tr = np.trace(apply_map(m, ketbra(d, k, l)))
            defect = max(defect, abs(tr - (1.0 if k == l else 0.0)))
    return CptpReport(choi_min_eigenvalue=eig_min, trace_defect=float(defect))


def lindblad_ode_solve(gen, rho0: np.ndarray, times: np.ndarray,
                       rtol: float = 1e-9, atol: float = 1e-12) -> np.ndarray:
    """Integrate d rho / dt = L_t[rho] with adaptive Runge-Kutta.

    ``gen`` must provide ``apply(t, X)``.  rho0 may be any Hermitian matrix
    (frame elements are evolved directly through here for cross checks).
    """
    d = rho0.shape[0]
    times = np.asarray(times, dtype=float)

    def rhs(t, y):
        return vec(gen.apply(t, y.reshape(d, d)))

    sol = solve_ivp(rhs, (times[0], times[-1]), vec(np.asarray(rho0, dtype=complex)),
                    t_eval=times, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"ODE integration failed: {sol.message}")
    return sol.y.T.reshape(len(times), d, d)


@dataclass
class ExtractionReport:
    n_valid: int
    max_condition: float
    truncated: bool


def generator_from_map(map_at, t: float, h: float, cond_threshold: float = 1e8):
    """L_t = dPhi/dt Phi^{-1} by central differences of a callable map family."""
    phi = map_at(t)
    cond = np.linalg.cond(phi)
    if cond > cond_threshold:
        raise np.linalg.LinAlgError(
            f"map at t={t:g} has condition number {cond:.3e} above {cond_threshold:g}"
        )
    dphi = (map_at(t + h) - map_at(t - h)) / (2 * h)
    return dphi @ np.linalg.inv(phi)


def generator_samples_from_maps(maps: np.ndarray, times: np.ndarray,
                                cond_threshold: float = 1e8):
    """Generators on a grid of sampled maps, with window truncation.

    Central differences on the interior, one-sided second-order stencils at
    the ends.  Stops at the first grid point whose map is ill-conditioned and
    reports the usable window.
    """
    times = np.asarray(times, dtype=float)
    n = len(times)
    n_valid = n
    max_cond = 0.0
    for i in range(n):
        c = np.linalg.cond(maps[i])
        if c > cond_threshold:
            n_valid = i
            break
        max_cond = max(max_cond, c)
    report = ExtractionReport(n_valid=n_valid, max_condition=float(max_cond),
                              truncated=n_valid < n)
    out = np.empty((n_valid,) + maps.shape[1:], dtype=complex)
    for i in range(n_valid):
        if i == 0:
            dt0 = times[1] - times[0]
            dphi = (-3 * maps[0] + 4 * maps[1] - maps[2]) / (2 * dt0)
        elif i == n_valid - 1:
            dt0 = times[i] - times[i - 1]
            dphi = (3 * maps[i] - 4 * maps[i - 1] + maps[i - 2]) / (2 * dt0)
        else:
            dphi = (maps[i + 1] - maps[i - 1]) / (times[i + 1] - times[i - 1])
        out[i] = dphi @ np.linalg.inv(maps[i])
    return out, report
