"""Operator frames, dual frames, and the one-sided positive decomposition.

A frame is a spanning family {Q_a} of Hermitian system operators with a dual
family {P_a} satisfying tr[P_a Q_b] = delta_ab.  Any bipartite state can then
be written as rho_SE = sum_a w_a Q_a (x) rho_a with environment-side density
matrices rho_a, which is the decomposition driving every simulation pipeline
in this package.  Frame elements are generally not positive; their
trace-one positive/negative parts are what the trajectory engines evolve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionError, FrameRankError, RepreparationError
from .linalg import (
    BipartiteState,
    OperatorSplit,
    generalized_pauli_matrices,
    hermitian_basis,
    hermitianize,
    ketbra,
    partial_trace,
    pauli_matrices,
    positive_negative_parts,
    tensor_product,
)

DUALITY_TOL = 1e-10
WEIGHT_CUTOFF = 1e-12
ENV_EIG_FLOOR = -1e-8


@dataclass(frozen=True)
class Frame:
    """Hermitian frame elements and their duals on a d-level system."""

    d: int
    elements: tuple[np.ndarray, ...]
    dual: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.elements) != len(self.dual):
            raise ValueError("frame and dual frame must have equal length")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(len(self.elements))))

    def __len__(self) -> int:
        return len(self.elements)

    def duality_defect(self) -> float:
        """max_ab |tr[P_a Q_b] - delta_ab|."""
        n = len(self.elements)
        table = np.array([[np.trace(p @ q) for q in self.elements] for p in self.dual])
        return float(np.max(np.abs(table - np.eye(n))))

    def expand(self, a: np.ndarray) -> np.ndarray:
        """Coefficients c_a = tr[A P_a] so that A = sum_a c_a Q_a."""
        return np.array([np.trace(a @ p) for p in self.dual])


def build_dual_frame(
    elements: list[np.ndarray], basis: list[np.ndarray] | None = None
) -> list[np.ndarray]:
    """Canonical dual frame via the inverse Gram matrix.

    With T_ab = tr[Q_a G_b] against an orthonormal Hermitian basis {G_b}, the
    Gram matrix is T T^T and the dual is P_a = sum_b (T T^T)^{-1}_ab Q_b.
    Raises FrameRankError when the elements do not span the operator space.
    """
    d = elements[0].shape[0]
    basis = hermitian_basis(d) if basis is None else basis
    t = np.array([[np.trace(q @ g).real for g in basis] for q in elements])
    rank = np.linalg.matrix_rank(t, tol=1e-12)
    if rank < d * d or len(elements) > d * d:
        raise FrameRankError(
            f"frame of {len(elements)} elements has rank {rank}, needs {d * d}"
        )
    gram = t @ t.T
    m = np.linalg.inv(gram)
    return [hermitianize(sum(m[a, b] * elements[b] for b in range(len(elements))))
            for a in range(len(elements))]


def build_pauli_frame(d: int) -> Frame:
    """Frame with Q_0 = 1/d - (1/2) sum_a s_a and Q_a = s_a / 2.

    For d = 2 the s_a are the qubit Paulis in the sigma_z = |1><1| - |0><0|
    convention and the dual is P_0 = 1, P_a = 1 + s_a.  For d > 2 the s_a are
    the generalized Pauli matrices; the dual is computed numerically (it
    equals 1 + s_a for this family as well, but is not positive for the
    sqrt-normalized diagonal elements once d > 2).
    """
    if d < 2:
        raise ValueError("system dimension must be at least 2")
    if d == 2:
        p = pauli_matrices()
        sigmas = [p["x"], p["y"], p["z"]]
        labels = ("0", "x", "y", "z")
    else:
        sigmas = generalized_pauli_matrices(d)
        labels = ("0",) + tuple(str(i) for i in range(1, d * d))
    q0 = np.eye(d, dtype=complex) / d - sum(sigmas) / 2
    elements = [q0] + [s / 2 for s in sigmas]
    dual = build_dual_frame(elements)
    return Frame(d=d, elements=tuple(elements), dual=tuple(dual), labels=labels)


@dataclass
class OPDecomposition:
    """rho_SE = sum_a w_a Q_a (x) rho_a plus the per-element splits."""

    frame: Frame
    de: int
    weights: np.ndarray
    env_states: list[np.ndarray | None]
    splits: list[OperatorSplit]
    dropped: list[int] = field(default_factory=list)
    env_min_eigenvalues: np.ndarray | None = None

    @property
    def active(self) -> list[int]:
        return [a for a in range(len(self.frame)) if a not in self.dropped]

    def reconstruct(self) -> np.ndarray:
        total = np.zeros((self.frame.d * self.de,) * 2, dtype=complex)
        for a in self.active:
            total += self.weights[a] * tensor_product(self.frame.elements[a], self.env_states[a])
        return total

    def reduced(self) -> np.ndarray:
        total = np.zeros((self.frame.d,) * 2, dtype=complex)
        for a in self.active:
            total += self.weights[a] * self.frame.elements[a]
        return total


def decompose(state: BipartiteState, frame: Frame, strict: bool = True) -> OPDecomposition:
    """Decompose a bipartite state over a frame.

    Environmental operators come from rho_a = tr_S[(P_a (x) 1) rho_SE] / w_a
    with w_a the full trace of the same expression.  Elements with weight
    below WEIGHT_CUTOFF are dropped and recorded.  Eigenvalues of rho_a in
    (ENV_EIG_FLOOR, 0) are clamped to zero and the state renormalized; a
    negative eigenvalue below the floor raises DecompositionError unless
    ``strict`` is False (a non-positive dual element can produce such
    operators on strongly correlated states; the caller then takes
    responsibility for checking the downstream dynamics).
    """
    if frame.d != state.ds:
        raise ValueError(f"frame dimension {frame.d} does not match system {state.ds}")
    n = len(frame)
    de = state.de
    ident_e = np.eye(de, dtype=complex)
    weights = np.zeros(n)
    env_states: list[np.ndarray | None] = [None] * n
    splits: list[OperatorSplit] = []
    dropped: list[int] = []
    min_eigs = np.zeros(n)
    for a in range(n):
        block = tensor_product(frame.dual[a], ident_e) @ state.rho
        w = np.trace(block).real
        if w < WEIGHT_CUTOFF:
            dropped.append(a)
            weights[a] = 0.0
            min_eigs[a] = 0.0
            splits.append(positive_negative_parts(frame.elements[a]))
            continue
        rho_a = hermitianize(partial_trace(block, (state.ds, de), "environment") / w)
        eigs = np.linalg.eigvalsh(rho_a)
        min_eigs[a] = eigs.min()
        if eigs.min() < ENV_EIG_FLOOR:
            if strict:
                raise DecompositionError(
                    f"environmental operator for frame element {frame.labels[a]} "
                    f"(index {a}) has eigenvalue {eigs.min():.3e} below {ENV_EIG_FLOOR:g}; "
                    "the dual frame is not positive for this state"
                )
        elif eigs.min() < 0.0:
            w_e, v_e = np.linalg.eigh(rho_a)
            w_e = np.clip(w_e, 0.0, None)
            rho_a = (v_e * w_e) @ v_e.conj().T
            rho_a /= np.trace(rho_a).real
        weights[a] = w
        env_states[a] = rho_a
        splits.append(positive_negative_parts(frame.elements[a]))
    return OPDecomposition(
        frame=frame,
        de=de,
        weights=weights,
        env_states=env_states,
        splits=splits,
        dropped=dropped,
        env_min_eigenvalues=min_eigs,
    )


def recombine(evolved: dict[int, tuple[np.ndarray | None, np.ndarray | None]],
              decomposition: OPDecomposition) -> np.ndarray:
    """sum_a w_a (mu+_a evolved+_a - mu-_a evolved-_a).

    ``evolved[a]`` holds the evolved positive and negative parts of frame
    element a (either single matrices or stacked time series); a part whose
    weight vanishes may be None.
    """
    total = None
    for a in decomposition.active:
        if a not in evolved:
            raise KeyError(f"missing evolved entry for frame element index {a}")
        plus, minus = evolved[a]
        w = decomposition.weights[a]
        split = decomposition.splits[a]
        term = 0.0
        if split.mu_plus > 0.0:
            if plus is None:
                raise KeyError(f"missing evolved positive part for element {a}")
            term = term + w * split.mu_plus * np.asarray(plus, dtype=complex)
        if split.mu_minus > 0.0:
            if minus is None:
                raise KeyError(f"missing evolved negative part for element {a}")
            term = term - w * split.mu_minus * np.asarray(minus, dtype=complex)
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class RepreparationMatrix:
    """Frame expansion R[Q_a] = sum_b entries[a, b] Q_b of a CP map."""

    entries: np.ndarray
    norm_weights: np.ndarray
    name: str = "repreparation"


def apply_kraus(kraus: list[np.ndarray], x: np.ndarray) -> np.ndarray:
    return sum(k @ x @ k.conj().T for k in kraus)


def expand_repreparation(kraus: list[np.ndarray], frame: Frame,
                         name: str = "repreparation") -> RepreparationMatrix:
    """Expand a CP map given in operator-sum form over the frame."""
    n = len(frame)
    entries = np.zeros((n, n), dtype=complex)
    norm_weights = np.zeros(n)
    for a in range(n):
        image = apply_kraus(kraus, frame.elements[a])
        norm_weights[a] = np.trace(image).real
        for b in range(n):
            entries[a, b] = np.trace(frame.dual[b] @ image)
    if np.max(np.abs(entries.imag)) < 1e-12:
        entries = entries.real.astype(float)
    return RepreparationMatrix(entries=entries, norm_weights=norm_weights, name=name)


def reprepared_state(evolved: dict[tuple[int, int], tuple[np.ndarray | None, np.ndarray | None]],
                     decomposition: OPDecomposition,
                     reprep: RepreparationMatrix,
                     entry_cutoff: float = 1e-12) -> np.ndarray:
    """Reduced dynamics of the globally reprepared state.

    ``evolved[(a, b)]`` holds the dynamics of the positive/negative parts of
    frame element b propagated under the branch-a evolution.  Returns
    sum_ab w_a R_ab (mu+_b X+_ab - mu-_b X-_ab) / sum_a w_a tr R[Q_a].
    """
    denom = float(np.sum(decomposition.weights[decomposition.active]
                         * reprep.norm_weights[decomposition.active]))
    if abs(denom) < 1e-12:
        raise RepreparationError(
            f"{reprep.name}: zero normalization, the map annihilates the reachable set"
        )
    total = None
    for a in decomposition.active:
        w = decomposition.weights[a]
        for b in range(len(decomposition.frame)):
            r = reprep.entries[a, b]
            if abs(r) < entry_cutoff:
                continue
            split = decomposition.splits[b]
            if (a, b) not in evolved:
                raise KeyError(f"missing evolved entry for (branch, element) = ({a}, {b})")
            plus, minus = evolved[(a, b)]
            term = 0.0
            if split.mu_plus > 0.0:
                term = term + w * r * split.mu_plus * np.asarray(plus, dtype=complex)
            if split.mu_minus > 0.0:
                term = term - w * r * split.mu_minus * np.asarray(minus, dtype=complex)
            total = term if total is None else total + term
    return total / denom


# --------------------------------------------------------------------------
# Named repreparations
# --------------------------------------------------------------------------

def bell_repreparation(d: int, n: int, m: int) -> list[np.ndarray]:
    """Unitary |k> -> exp(2 pi i k n / d) |k + m mod d> as a single Kraus op."""
    v = np.zeros((d, d), dtype=complex)
    for k in range(d):
        v[(k + m) % d, k] = np.exp(2j * np.pi * k * n / d)
    return [v]


def zero_discord_repreparation(probs: list[float]) -> list[np.ndarray]:
    """rho -> sum_k p_k <k|rho|k> |k><k| as Kraus operators sqrt(p_k)|k><k|."""
    d = len(probs)
    if any(p < 0 for p in probs):
        raise ValueError("probabilities must be nonnegative")
    return [np.sqrt(p) * ketbra(d, k, k) for k, p in enumerate(probs)]


def factorize_repreparation(d: int) -> list[np.ndarray]:
    """rho -> tr[rho] 1/d, the correlation-erasing map."""
    return [ketbra(d, i, j) / np.sqrt(d) for i in range(d) for j in range(d)]
