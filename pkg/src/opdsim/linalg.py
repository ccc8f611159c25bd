"""Dense complex operator algebra used by every other module.

Operators are plain ``numpy.ndarray`` square complex matrices.  Composite
spaces use the system-first ordering convention throughout the package:
``tensor_product(a_system, b_environment)`` puts the system factor on the
slow (left-most) index, so index ``i*dE + j`` means system level ``i`` and
environment level ``j``.

Qubit Pauli matrices follow the convention ``sigma_z = |1><1| - |0><0|``
(excited state ``|1>`` has ``<sigma_z> = +1``), with ``sigma_y`` fixed by
``sigma_x sigma_y = i sigma_z``.  Generalized d-level Pauli matrices use the
Gell-Mann pattern normalized to ``tr[s_a s_b] = 2 delta_ab``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-10
ABS_EIG_CLAMP = 1e-12


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hermitianize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (a + a^dag) / 2."""
    return (a + a.conj().T) / 2


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def is_psd(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    if not is_hermitian(a, tol):
        return False
    return bool(np.linalg.eigvalsh(hermitianize(a)).min() >= -tol)


def is_trace_one(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(abs(np.trace(a) - 1.0) <= tol)


def ket(d: int, k: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return v


def ketbra(d: int, k: int, l: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    m[k, l] = 1.0
    return m


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the system factor first."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: str) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``dims = (dS, dE)`` with system-first ordering; ``keep`` is ``"system"``
    or ``"environment"``.
    """
    ds, de = dims
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ds * de, ds * de):
        raise ValueError(
            f"operator of shape {rho.shape} does not match factor dims ({ds}, {de})"
        )
    r = rho.reshape(ds, de, ds, de)
    if keep == "system":
        return np.einsum("ikjk->ij", r)
    if keep == "environment":
        return np.einsum("kikj->ij", r)
    raise ValueError(f"keep must be 'system' or 'environment', got {keep!r}")


def hermitian_eig(h: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized before decomposition; inputs that are not
    Hermitian within ``tol`` are rejected.
    """
    h = np.asarray(h, dtype=complex)
    defect = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian within {tol:g} (defect {defect:.3e})")
    return np.linalg.eigh(hermitianize(h))


def operator_abs(x: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """|X| = sqrt(X^dag X) for Hermitian X, via eigendecomposition.

    Eigenvalues in (-ABS_EIG_CLAMP, 0) are treated as zero so that floating
    point noise cannot manufacture a spurious negative part.
    """
    w, v = hermitian_eig(x, tol)
    w = np.where((w > -ABS_EIG_CLAMP) & (w < 0.0), 0.0, w)
    return (v * np.abs(w)) @ v.conj().T


class OperatorSplit(NamedTuple):
    """Weighted difference q = mu_plus * sigma_plus - mu_minus * sigma_minus."""

    mu_plus: float
    sigma_plus: np.ndarray | None
    mu_minus: float
    sigma_minus: np.ndarray | None


def positive_negative_parts(
    q: np.ndarray, tol: float = HERMITIAN_TOL, weight_cutoff: float = 1e-12
) -> OperatorSplit:
    """Split a Hermitian operator into trace-one positive and negative parts.

    Returns (mu+, sigma+, mu-, sigma-) with q+ = (|q| + q)/2, q- = (|q| - q)/2,
    mu+- = tr[q+-] and sigma+- = q+- / mu+-.  A side whose weight falls below
    ``weight_cutoff`` is reported as (0.0, None).
    """
    w, v = hermitian_eig(q, tol)
    w = np.where((w > -ABS_EIG_CLAMP) & (w < 0.0), 0.0, w)
    wp = np.where(w > 0.0, w, 0.0)
    wm = np.where(w < 0.0, -w, 0.0)
    mu_p = float(wp.sum())
    mu_m = float(wm.sum())
    sig_p = (v * wp) @ v.conj().T / mu_p if mu_p > weight_cutoff else None
    sig_m = (v * wm) @ v.conj().T / mu_m if mu_m > weight_cutoff else None
    return OperatorSplit(mu_p if sig_p is not None else 0.0, sig_p,
                         mu_m if sig_m is not None else 0.0, sig_m)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) ||a - b||_1 for Hermitian a, b of equal dimension."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    w = np.linalg.eigvalsh(hermitianize(a - b))
    return float(np.abs(w).sum() / 2)


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))


# --------------------------------------------------------------------------
# Operator bases
# --------------------------------------------------------------------------

def pauli_matrices() -> dict[str, np.ndarray]:
    """Qubit Paulis in the package convention (sigma_z = |1><1| - |0><0|)."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, 1j], [-1j, 0]], dtype=complex)
    sz = np.array([[-1, 0], [0, 1]], dtype=complex)
    return {"x": sx, "y": sy, "z": sz}


def sigma_plus() -> np.ndarray:
    """Raising operator |1><0|."""
    return np.array([[0, 0], [1, 0]], dtype=complex)


def sigma_minus() -> np.ndarray:
    """Lowering operator |0><1|."""
    return np.array([[0, 1], [0, 0]], dtype=complex)


def generalized_pauli_matrices(d: int) -> list[np.ndarray]:
    """Gell-Mann style Hermitian traceless basis, tr[s_a s_b] = 2 delta_ab.

    Ordered per two-level subspace: for each level l = 1..d-1, first the
    symmetric and antisymmetric pairs (j, l) for j < l, then the diagonal
    element for level l.  For d = 2 this yields the textbook Pauli triple
    with sigma_3 = |0><0| - |1><1| (note: opposite z-sign to
    ``pauli_matrices``, which follows the qubit-frame convention).
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    out: list[np.ndarray] = []
    for l in range(1, d):
        for j in range(l):
            m = np.zeros((d, d), dtype=complex)
            m[j, l] = 1.0
            m[l, j] = 1.0
            out.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, l] = -1j
            m[l, j] = 1j
            out.append(m)
        m = np.zeros((d, d), dtype=complex)
        for k in range(l):
            m[k, k] = 1.0
        m[l, l] = -l
        out.append(m * np.sqrt(2.0 / (l * (l + 1))))
    return out


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis: identity/sqrt(d) then Paulis/sqrt(2)."""
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    basis.extend(s / np.sqrt(2.0) for s in generalized_pauli_matrices(d))
    return basis


# --------------------------------------------------------------------------
# Superoperator helpers (row-major vec: vec(A X B) = (A kron B^T) vec(X))
# --------------------------------------------------------------------------

def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(d, d)


def spre(a: np.ndarray) -> np.ndarray:
    d = a.shape[0]
    return np.kron(a, np.eye(d))


def spost(b: np.ndarray) -> np.ndarray:
    d = b.shape[0]
    return np.kron(np.eye(d), b.T)


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of X -> A X B."""
    return np.kron(a, b.T)


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Matrix of X -> -i [H, X]."""
    return -1j * (spre(h) - spost(h))


def dissipator_superop(l: np.ndarray, rate: float = 1.0) -> np.ndarray:
    """Matrix of X -> rate (L X L^dag - (1/2){L^dag L, X})."""
    ldl = l.conj().T @ l
    return rate * (sandwich(l, l.conj().T) - 0.5 * (spre(ldl) + spost(ldl)))


# --------------------------------------------------------------------------
# Bipartite states
# --------------------------------------------------------------------------

STATE_TOL = 1e-10


@dataclass(frozen=True)
class BipartiteState:
    """Density operator on a system (x) environment space, system first."""

    ds: int
    de: int
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        object.__setattr__(self, "rho", rho)
        n = self.ds * self.de
        if rho.shape != (n, n):
            raise ValueError(f"rho has shape {rho.shape}, expected ({n}, {n})")
        if not is_hermitian(rho, STATE_TOL):
            raise ValueError("rho is not Hermitian within tolerance")
        if not is_trace_one(rho, STATE_TOL):
            raise ValueError("rho does not have unit trace within tolerance")
        if np.linalg.eigvalsh(hermitianize(rho)).min() < -STATE_TOL:
            raise ValueError("rho is not positive semidefinite within tolerance")

    @property
    def dim(self) -> int:
        return self.ds * self.de

    def reduced_system(self) -> np.ndarray:
        return partial_trace(self.rho, (self.ds, self.de), "system")

    def reduced_environment(self) -> np.ndarray:
        return partial_trace(self.rho, (self.ds, self.de), "environment")

    def correlation_operator(self) -> np.ndarray:
        """chi = rho_SE - rho_S (x) rho_E; Hermitian and traceless."""
        return self.rho - tensor_product(self.reduced_system(), self.reduced_environment())


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt random density matrix from a Ginibre factor."""
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return hermitianize(g)


def maximally_entangled_state(d: int) -> BipartiteState:
    """|Psi> = d^{-1/2} sum_k |k>|k> as a BipartiteState."""
    psi = np.zeros(d * d, dtype=complex)
    for k in range(d):
        psi[k * d + k] = 1.0
    psi /= np.sqrt(d)
    return BipartiteState(d, d, projector(psi))


def entangled_qubit_state(psi0: np.ndarray, psi1: np.ndarray) -> BipartiteState:
    """(|0>|psi0> + |1>|psi1>)/sqrt(2) with arbitrary environment vectors."""
    psi0 = np.asarray(psi0, dtype=complex)
    psi1 = np.asarray(psi1, dtype=complex)
    if psi0.shape != psi1.shape or psi0.ndim != 1:
        raise ValueError("psi0 and psi1 must be vectors of equal length")
    de = psi0.size
    psi = np.concatenate([psi0, psi1]) / np.sqrt(2.0)
    norm = np.linalg.norm(psi)
    return BipartiteState(2, de, projector(psi / norm))
