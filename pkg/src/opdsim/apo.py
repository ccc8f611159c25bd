"""Second-order time-local generators from adapted projections.

Given an interaction H_I = g sum_j A_j (x) B_j, free Hamiltonians H_S, H_E
and an environment operator rho, the generator at time t is

    L_t[X] = -i g sum_j <B_j(t)> [A_j(t), X]
             - g^2 sum_j [A_j(t), I_j(t) X]
             + g^2 sum_j [A_j(t), X Itilde_j(t)]

with interaction-picture operators A_j(t), B_j(t), environment covariances
Cov_jj'(t, tau) = <B_j(t) B_j'(tau)> - <B_j(t)><B_j'(tau)> and the memory
integrals

    I_j(t)      = sum_j' int_0^t A_j'(tau) Cov_jj'(t, tau) dtau,
    Itilde_j(t) = sum_j' int_0^t A_j'(tau) Cov_j'j(tau, t) dtau.

The t-dependence inside the covariances factorizes over environment Bohr
frequencies, so everything reduces to running integrals of cached,
outer-index-independent kernels on a refined uniform grid (composite
Simpson per coarse step).  A refinement doubling estimates the quadrature
error; failure to meet the tolerance raises QuadratureError.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError
from .generators import SampledGenerator, sampled_generator_from_superops
from .linalg import sandwich, spost, spre


@dataclass(frozen=True)
class ApoModel:
    """Interaction data for the second-order generator construction."""

    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]
    h_sys: np.ndarray
    h_env: np.ndarray
    rho_env: np.ndarray
    g: float

    @property
    def dim(self) -> int:
        return self.h_sys.shape[0]


def _simpson_weights(n_sub: int, h: float) -> np.ndarray:
    """Composite Simpson weights on n_sub equal subintervals (n_sub even)."""
    w = np.ones(n_sub + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def apo_superoperator_samples(model: ApoModel, times: np.ndarray,
                              refine: int = 4) -> np.ndarray:
    """Generator superoperator samples on a uniform time grid."""
    times = np.asarray(times, dtype=float)
    if len(times) < 2 or not np.allclose(np.diff(times), times[1] - times[0]):
        raise ValueError("times must be a uniform grid with at least two points")
    if refine % 2 != 0:
        raise ValueError("refine must be even for composite Simpson")
    d = model.dim
    de = model.h_env.shape[0]
    nj = len(model.pairs)
    g = model.g

    ws, vs = np.linalg.eigh((model.h_sys + model.h_sys.conj().T) / 2)
    we, ve = np.linalg.eigh((model.h_env + model.h_env.conj().T) / 2)
    a_tilde = [vs.conj().T @ a @ vs for a, _ in model.pairs]
    b_tilde = [ve.conj().T @ b @ ve for _, b in model.pairs]
    rho_tilde = ve.conj().T @ model.rho_env @ ve

    dt = times[1] - times[0]
    n_steps = len(times) - 1
    fine = np.linspace(times[0], times[-1], n_steps * refine + 1)
    h_fine = dt / refine

    # Kernels cached on the fine grid.  The memory integrands depend on the
    # inner interaction index only, so they are summed over it up front:
    #   m[a, b](tau)  = sum_j' A_j'(tau)-weighted is deferred; here per j':
    #   m_j'[a, b](tau)      = sum_c e^{i(E_b - E_c) tau} B_j'[b, c] rho[c, a]
    #   mtil_j'[b, c](tau)   = sum_a e^{i(E_a - E_b) tau} B_j'[a, b] rho[c, a]
    a_fine = np.empty((nj, len(fine), d, d), dtype=complex)
    m_fine = np.empty((nj, len(fine), de, de), dtype=complex)
    mt_fine = np.empty((nj, len(fine), de, de), dtype=complex)
    bmean_fine = np.empty((nj, len(fine)), dtype=complex)
    for j in range(nj):
        for i, tau in enumerate(fine):
            ph_s = np.exp(1j * ws * tau)
            a_fine[j, i] = vs @ (a_tilde[j] * np.outer(ph_s, ph_s.conj())) @ vs.conj().T
            ph_e = np.exp(1j * we * tau)
            bt = b_tilde[j] * np.outer(ph_e, ph_e.conj())
            m_fine[j, i] = (bt @ rho_tilde).T
            mt_fine[j, i] = rho_tilde @ bt
            bmean_fine[j, i] = np.trace(bt @ rho_tilde)

    # Running integrals over tau, already summed over the inner index j'.
    k_run = np.zeros((de, de, d, d), dtype=complex)    # int A(tau) m[a,b](tau)
    kt_run = np.zeros((de, de, d, d), dtype=complex)   # int A(tau) mtil[b,c](tau)
    k0_run = np.zeros((d, d), dtype=complex)           # int A(tau) <B(tau)>
    simpson = _simpson_weights(refine, h_fine)

    out = np.empty((len(times), d * d, d * d), dtype=complex)

    def assemble(idx: int) -> np.ndarray:
        t = times[idx]
        lmat = np.zeros((d * d, d * d), dtype=complex)
        ph_e = np.exp(1j * we * t)
        phase_env = np.outer(ph_e, ph_e.conj())
        for j in range(nj):
            a_t = a_fine[j, idx * refine]
            bm = bmean_fine[j, idx * refine]
            lmat += -1j * g * bm * (spre(a_t) - spost(a_t))
            coef = phase_env * b_tilde[j]          # e^{i(E_a - E_b) t} B_j[a, b]
            i_j = np.einsum("ab,abkl->kl", coef, k_run) - bm * k0_run
            it_j = np.einsum("bc,bckl->kl", coef, kt_run) - bm * k0_run
            lmat += -g * g * (spre(a_t @ i_j) - sandwich(i_j, a_t))
            lmat += g * g * (sandwich(a_t, it_j) - spost(it_j @ a_t))
        return lmat

    out[0] = assemble(0)
    for step in range(n_steps):
        base = step * refine
        for j in range(nj):
            seg_a = a_fine[j, base:base + refine + 1]
            k_run += np.einsum("i,iab,ikl->abkl", simpson,
                               m_fine[j, base:base + refine + 1], seg_a)
            kt_run += np.einsum("i,icb,ikl->bckl", simpson,
                                mt_fine[j, base:base + refine + 1], seg_a)
            k0_run += np.einsum("i,i,ikl->kl", simpson,
                                bmean_fine[j, base:base + refine + 1], seg_a)
        out[step + 1] = assemble(step + 1)
    return out


def apo_generator(model: ApoModel, times: np.ndarray, refine: int = 4,
                  rel_tol: float = 1e-8) -> SampledGenerator:
    """Build a sampled generator, verifying quadrature convergence.

    The samples are recomputed at double refinement; if the relative
    difference exceeds ``rel_tol`` the refinement is doubled (twice) before
    giving up with QuadratureError.
    """
    current = refine
    err = np.inf
    for _ in range(3):
        coarse = apo_superoperator_samples(model, times, refine=current)
        fine = apo_superoperator_samples(model, times, refine=2 * current)
        scale = max(np.max(np.abs(fine)), 1e-30)
        err = np.max(np.abs(fine - coarse)) / scale
        if err <= rel_tol:
            return sampled_generator_from_superops(times, fine, model.dim)
        current *= 2
    raise QuadratureError(
        f"memory-integral quadrature did not converge: relative error {err:.3e} "
        f"above {rel_tol:g} at refinement {current}"
    )
