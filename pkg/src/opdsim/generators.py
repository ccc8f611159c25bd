"""Time-dependent Lindblad generators and generator-level analysis.

A generator provides, for any queried time, a Hermitian Hamiltonian and a
list of jump channels (rate, operator).  Generators may also expose a
"general jump" pair (A, A_tilde) encoding the non-diagonal dissipator
J[X] = A X A_tilde + A_tilde X A, which trajectory engines can consume
without diagonalizing it into channels.

Also here: extraction of canonical GKSL data from an arbitrary
trace-annihilating, Hermiticity-preserving superoperator, the
fixed-correlations generator L^chi_t[X] = L_t[X] + Delta_t tr X with its
rate diagnostics, and the compatible-state domain tools.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exact import generator_from_map
from .linalg import (
    hermitian_basis,
    hermitianize,
    sandwich,
    spre,
    spost,
    vec,
)


# --------------------------------------------------------------------------
# Generator interface
# --------------------------------------------------------------------------

class Generator:
    """Base class; subclasses implement hamiltonian() and channels()."""

    dim: int

    def hamiltonian(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def channels(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Rates (J,) and jump operators (J, d, d) at time t."""
        raise NotImplementedError

    def general_jump(self, t: float):
        """Optional (A, A_tilde) pair; None when the jump term is diagonal."""
        return None

    def decay_operator(self, t: float) -> np.ndarray:
        """Gamma(t) such that the anticommutator term is -(1/2){Gamma, X}."""
        gj = self.general_jump(t)
        if gj is not None:
            a, at = gj
            return a @ at + at @ a
        rates, ops = self.channels(t)
        gam = np.zeros((self.dim, self.dim), dtype=complex)
        for g, l in zip(rates, ops):
            gam += g * (l.conj().T @ l)
        return gam

    def apply(self, t: float, x: np.ndarray) -> np.ndarray:
        """L_t[x]."""
        h = self.hamiltonian(t)
        out = -1j * (h @ x - x @ h)
        gj = self.general_jump(t)
        if gj is not None:
            a, at = gj
            gam = a @ at + at @ a
            out += a @ x @ at + at @ x @ a - 0.5 * (gam @ x + x @ gam)
            return out
        rates, ops = self.channels(t)
        for g, l in zip(rates, ops):
            ldl = l.conj().T @ l
            out += g * (l @ x @ l.conj().T - 0.5 * (ldl @ x + x @ ldl))
        return out

    def superoperator(self, t: float) -> np.ndarray:
        d = self.dim
        h = self.hamiltonian(t)
        m = -1j * (spre(h) - spost(h))
        gj = self.general_jump(t)
        if gj is not None:
            a, at = gj
            gam = a @ at + at @ a
            m += sandwich(a, at) + sandwich(at, a) - 0.5 * (spre(gam) + spost(gam))
            return m
        rates, ops = self.channels(t)
        for g, l in zip(rates, ops):
            ldl = l.conj().T @ l
            m += g * sandwich(l, l.conj().T) - 0.5 * g * (spre(ldl) + spost(ldl))
        return m

    def fingerprint(self, times) -> bytes:
        """Byte-exact sample of the generator, used to deduplicate runs."""
        parts = []
        for t in times:
            parts.append(np.ascontiguousarray(self.hamiltonian(t)).tobytes())
            gj = self.general_jump(t)
            if gj is None:
                rates, ops = self.channels(t)
                parts.append(np.ascontiguousarray(rates).tobytes())
                parts.append(np.ascontiguousarray(ops).tobytes())
            else:
                parts.append(np.ascontiguousarray(gj[0]).tobytes())
                parts.append(np.ascontiguousarray(gj[1]).tobytes())
        return b"".join(parts)


class LindbladGenerator(Generator):
    """Generator from closed-form callables (or constants)."""

    def __init__(self, dim, hamiltonian, channels=None, general_jump=None):
        self.dim = dim
        self._h = hamiltonian
        self._channels = channels
        self._gj = general_jump

    def hamiltonian(self, t: float) -> np.ndarray:
        h = self._h(t) if callable(self._h) else self._h
        return np.asarray(h, dtype=complex)

    def channels(self, t: float):
        if self._channels is None:
            return np.zeros(0), np.zeros((0, self.dim, self.dim), dtype=complex)
        ch = self._channels(t) if callable(self._channels) else self._channels
        rates = np.array([c[0] for c in ch], dtype=float)
        ops = np.array([c[1] for c in ch], dtype=complex)
        if len(ch) == 0:
            ops = ops.reshape(0, self.dim, self.dim)
        return rates, ops

    def general_jump(self, t: float):
        if self._gj is None:
            return None
        a, at = self._gj(t)
        return np.asarray(a, dtype=complex), np.asarray(at, dtype=complex)


class SampledGenerator(Generator):
    """Generator defined by samples on a uniform grid, linear in between."""

    def __init__(self, times, hams, rates, jump_ops, superops=None):
        self.times = np.asarray(times, dtype=float)
        self.dim = hams.shape[1]
        self.hams = np.asarray(hams, dtype=complex)
        self.rates = np.asarray(rates, dtype=float)
        self.jump_ops = np.asarray(jump_ops, dtype=complex)
        self.superops = None if superops is None else np.asarray(superops, dtype=complex)

    def _locate(self, t: float):
        ts = self.times
        if t <= ts[0]:
            return 0, 0, 0.0
        if t >= ts[-1]:
            return len(ts) - 1, len(ts) - 1, 0.0
        i = int(np.searchsorted(ts, t, side="right")) - 1
        frac = (t - ts[i]) / (ts[i + 1] - ts[i])
        return i, i + 1, frac

    def _interp(self, arr, t):
        i, j, frac = self._locate(t)
        if frac == 0.0:
            return arr[i]
        return (1.0 - frac) * arr[i] + frac * arr[j]

    def hamiltonian(self, t: float) -> np.ndarray:
        return self._interp(self.hams, t)

    def channels(self, t: float):
        return self._interp(self.rates, t), self._interp(self.jump_ops, t)

    def apply(self, t: float, x: np.ndarray) -> np.ndarray:
        if self.superops is not None:
            m = self._interp(self.superops, t)
            return (m @ vec(x)).reshape(self.dim, self.dim)
        return super().apply(t, x)

    def superoperator(self, t: float) -> np.ndarray:
        if self.superops is not None:
            return self._interp(self.superops, t)
        return super().superoperator(t)


# --------------------------------------------------------------------------
# GKSL extraction from superoperator samples
# --------------------------------------------------------------------------

def _sandwich_basis(d: int) -> list[list[np.ndarray]]:
    basis = hermitian_basis(d)
    return [[sandwich(gm, gn) for gn in basis] for gm in basis]


def lindblad_decompose(superop: np.ndarray, d: int):
    """Canonical GKSL data (H, Kossakowski matrix, basis) of a superoperator.

    The input must preserve Hermiticity and annihilate the trace (up to
    numerical noise); the output is the projection onto the GKSL form
    L[X] = -i[H, X] + sum_mn a_mn (G_m X G_n - (1/2){G_n G_m, X})
    over the traceless part of the orthonormal Hermitian basis.
    """
    basis = hermitian_basis(d)
    n = d * d
    chi = np.empty((n, n), dtype=complex)
    for m in range(n):
        for nn in range(n):
            chi[m, nn] = np.vdot(sandwich(basis[m], basis[nn]), superop)
    chi = hermitianize(chi)
    b_op = sum(chi[m, 0] * basis[m] for m in range(1, n)) / np.sqrt(d)
    c = (chi[0, 0] / (2 * d)) * np.eye(d) + b_op
    h = hermitianize(0.5j * (c - c.conj().T))
    a = chi[1:, 1:]
    return h, a, basis[1:]


def channels_from_kossakowski(a: np.ndarray, basis: list[np.ndarray],
                              prev_vectors: np.ndarray | None = None):
    """Diagonalize a Kossakowski matrix into (rates, jump operators).

    When ``prev_vectors`` is given, eigenvectors are reordered and phase
    aligned against it by maximal overlap so that rate curves stay on a
    continuous branch between neighboring time samples.
    """
    w, v = np.linalg.eigh(hermitianize(a))
    if prev_vectors is not None:
        overlap = np.abs(prev_vectors.conj().T @ v)
        order = np.full(len(w), -1)
        used = set()
        for row in range(len(w)):
            cols = np.argsort(-overlap[row])
            for c in cols:
                if c not in used:
                    order[row] = c
                    used.add(c)
                    break
        w = w[order]
        v = v[:, order]
        for j in range(v.shape[1]):
            phase = np.vdot(prev_vectors[:, j], v[:, j])
            if abs(phase) > 1e-12:
                v[:, j] *= phase.conj() / abs(phase)
    d = basis[0].shape[0]
    ops = np.einsum("mj,mkl->jkl", v, np.asarray(basis))
    return w, ops, v


def sampled_generator_from_superops(times, superops, d: int) -> SampledGenerator:
    """Project superoperator samples onto GKSL data with branch continuity."""
    n = len(times)
    n_ch = d * d - 1
    hams = np.empty((n, d, d), dtype=complex)
    rates = np.empty((n, n_ch))
    jump_ops = np.empty((n, n_ch, d, d), dtype=complex)
    prev = None
    for i in range(n):
        h, a, basis = lindblad_decompose(superops[i], d)
        w, ops, prev = channels_from_kossakowski(a, basis, prev)
        hams[i] = h
        rates[i] = w
        jump_ops[i] = ops
    return SampledGenerator(times, hams, rates, jump_ops, superops=np.asarray(superops))


# --------------------------------------------------------------------------
# Fixed-correlations generator
# --------------------------------------------------------------------------

@dataclass
class FixedCorrelationsDiagnostics:
    times: np.ndarray
    delta_eigenvalues: np.ndarray        # (T, d) eigenvalues b_j(t)
    delta_eigenvectors: np.ndarray       # (T, d, d) columns xi_j(t)
    rate_sums: np.ndarray                # (T,) sum_j b_j(t) = tr Delta
    truncated_at: float | None = None

    def rates(self, i: int) -> np.ndarray:
        """Double-index rates eta_{(j,j')} = b_j at time index i."""
        d = self.delta_eigenvalues.shape[1]
        return np.repeat(self.delta_eigenvalues[i], d)

    def min_rate(self, i: int) -> float:
        return float(self.delta_eigenvalues[i].min())


class FixedCorrelationsGenerator(Generator):
    """L^chi_t[X] = L_t[X] + Delta_t tr X from an uncorrelated map family.

    ``phi_at(t)`` must return the uncorrelated map matrix (row-major vec) and
    ``i_chi_at(t)`` the correlation contribution I_t; both are consulted at
    arbitrary times through central differences of step ``fd_step``.
    """

    def __init__(self, dim, phi_at, i_chi_at, fd_step=1e-4, cond_threshold=1e8):
        self.dim = dim
        self._phi = phi_at
        self._i = i_chi_at
        self.fd_step = fd_step
        self.cond_threshold = cond_threshold

    def uncorrelated_superop(self, t: float) -> np.ndarray:
        return generator_from_map(self._phi, t, self.fd_step, self.cond_threshold)

    def delta(self, t: float) -> np.ndarray:
        h = self.fd_step
        di = (self._i(t + h) - self._i(t - h)) / (2 * h)
        lmat = self.uncorrelated_superop(t)
        l_of_i = (lmat @ vec(self._i(t))).reshape(self.dim, self.dim)
        return hermitianize(di - l_of_i)

    def superoperator(self, t: float) -> np.ndarray:
        d = self.dim
        trace_row = vec(np.eye(d))
        return self.uncorrelated_superop(t) + np.outer(vec(self.delta(t)), trace_row)

    def apply(self, t: float, x: np.ndarray) -> np.ndarray:
        lmat = self.uncorrelated_superop(t)
        base = (lmat @ vec(x)).reshape(self.dim, self.dim)
        return base + self.delta(t) * np.trace(x)

    def hamiltonian(self, t: float) -> np.ndarray:
        h, _, _ = lindblad_decompose(self.superoperator(t), self.dim)
        return h

    def channels(self, t: float):
        _, a, basis = lindblad_decompose(self.superoperator(t), self.dim)
        w, ops, _ = channels_from_kossakowski(a, basis)
        return w, ops

    def diagnostics(self, times) -> FixedCorrelationsDiagnostics:
        times = np.asarray(times, dtype=float)
        d = self.dim
        evals = np.empty((len(times), d))
        evecs = np.empty((len(times), d, d), dtype=complex)
        sums = np.empty(len(times))
        truncated_at = None
        n_ok = len(times)
        for i, t in enumerate(times):
            try:
                delta = self.delta(t)
            except np.linalg.LinAlgError:
                truncated_at = float(t)
                n_ok = i
                warnings.warn(
                    f"fixed-correlations window truncated at t={t:g}: "
                    "uncorrelated map became ill-conditioned",
                    stacklevel=2,
                )
                break
            w, v = np.linalg.eigh(delta)
            evals[i] = w
            evecs[i] = v
            sums[i] = w.sum()
        return FixedCorrelationsDiagnostics(
            times=times[:n_ok],
            delta_eigenvalues=evals[:n_ok],
            delta_eigenvectors=evecs[:n_ok],
            rate_sums=sums[:n_ok],
            truncated_at=truncated_at,
        )


def fixed_correlations_generator(dim, phi_at, i_chi_at, times=None,
                                 fd_step=1e-4, cond_threshold=1e8):
    """Build the correlated generator and, optionally, its rate diagnostics."""
    gen = FixedCorrelationsGenerator(dim, phi_at, i_chi_at, fd_step, cond_threshold)
    diag = gen.diagnostics(times) if times is not None else None
    return gen, diag


def compatible_state_check(chi: np.ndarray, rho_env: np.ndarray,
                           rho_s: np.ndarray, tol: float = 1e-10) -> bool:
    """True iff rho_s (x) rho_env + chi is positive semidefinite within tol."""
    from .linalg import tensor_product

    total = tensor_product(rho_s, rho_env) + chi
    return bool(np.linalg.eigvalsh(hermitianize(total)).min() >= -tol)


def entangled_mixture_family(n: int, lam: float):
    """(rho_env, chi) for lam * maximally-entangled + (1 - lam) * uniform.

    The compatible reduced states of this family are exactly
    lam/n + (1 - lam) sigma with sigma an arbitrary state, i.e. density
    matrices whose smallest eigenvalue is at least lam/n.
    """
    from .linalg import maximally_entangled_state, tensor_product

    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    ident = np.eye(n, dtype=complex) / n
    maxent = maximally_entangled_state(n).rho
    rho_env = ident.copy()
    chi = lam * (maxent - tensor_product(ident, ident))
    return rho_env, chi


# --------------------------------------------------------------------------
# Divisibility reporting
# --------------------------------------------------------------------------

@dataclass
class DivisibilityReport:
    times: np.ndarray
    min_rates: np.ndarray
    cp_divisible: np.ndarray            # all rates nonnegative per time
    kossakowski_not_falsified: np.ndarray
    n_bases: int
    rate_tol: float

    @property
    def cp_window_end(self) -> float:
        """Last time before which every sample had nonnegative rates."""
        bad = np.nonzero(~self.cp_divisible)[0]
        return float(self.times[-1]) if bad.size == 0 else float(self.times[bad[0]])

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "min_rates": self.min_rates.tolist(),
            "cp_divisible": self.cp_divisible.tolist(),
            "kossakowski_not_falsified": self.kossakowski_not_falsified.tolist(),
            "n_bases": self.n_bases,
            "rate_tol": self.rate_tol,
        }


def _random_orthonormal_basis(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def divisibility_report(gen: Generator, times, n_bases: int = 200,
                        seed: int = 0, rate_tol: float = 1e-12) -> DivisibilityReport:
    """Per-time CP flag (rate signs) and a sampled Kossakowski P-check.

    The Kossakowski condition quantifies over all orthonormal bases, so the
    sampled check can only report "not falsified", never a proof.
    """
    rng = np.random.default_rng(seed)
    times = np.asarray(times, dtype=float)
    d = gen.dim
    bases = [_random_orthonormal_basis(d, rng) for _ in range(n_bases)]
    min_rates = np.empty(len(times))
    cp = np.empty(len(times), dtype=bool)
    koss = np.empty(len(times), dtype=bool)
    for i, t in enumerate(times):
        rates, ops = gen.channels(t)
        min_rates[i] = rates.min() if rates.size else 0.0
        cp[i] = min_rates[i] >= -rate_tol
        ok = True
        for basis in bases:
            elems = np.einsum("dm,jde,en->jmn", basis.conj(), ops, basis)
            total = np.einsum("j,jmn->mn", rates, np.abs(elems) ** 2)
            off = total - np.diag(np.diagonal(total))
            if off.min() < -1e-10:
                ok = False
                break
        koss[i] = ok
    return DivisibilityReport(times=times, min_rates=min_rates, cp_divisible=cp,
                              kossakowski_not_falsified=koss, n_bases=n_bases,
                              rate_tol=rate_tol)
