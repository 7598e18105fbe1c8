"""Closed-form incompatibility witnesses and analytic boundaries.

A witness W certifies incompatibility of a covariance C with a topology
whenever Tr(W·C) > 0, provided every child block of W and every parent
support submatrix of W is negative semidefinite.  Two basis conventions
circulate: "direct" pairs with covariances computed from orthonormal
feature maps, "reflected" pairs with the closed-form C^N_pq family; they
differ by a per-child diag(1, −1) congruence (see covariance.reflect).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import BlockMatrix, reflect
from .topology import BlockLayout, NetworkTopology, all_bipartite, layout_for, \
    parent_support, triangle

WITNESS_EIG_TOL = 1e-10

DIRECT = "direct"
REFLECTED = "paper-reflected"


class WitnessError(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    matrix: np.ndarray
    layout: BlockLayout
    convention: str
    name: str = ""

    def __post_init__(self):
        d = self.layout.total_dim
        if self.matrix.shape != (d, d):
            raise WitnessError("witness shape does not match layout")
        if np.abs(self.matrix - self.matrix.T).max() > 1e-12:
            raise WitnessError("witness must be symmetric")
        self.matrix.setflags(write=False)

    def reflected(self) -> "Witness":
        """Swap between the two basis conventions."""
        other = DIRECT if self.convention == REFLECTED else REFLECTED
        flipped = reflect(BlockMatrix(self.layout, self.matrix.copy()))
        return Witness(flipped.data.copy(), self.layout, other, self.name)


def validate_witness(witness: Witness | np.ndarray, topology: NetworkTopology,
                     layout: BlockLayout | None = None) -> bool:
    """True iff all child blocks and parent supports of W are NSD (1e-10)."""
    if isinstance(witness, Witness):
        W, layout = witness.matrix, witness.layout
    else:
        W = np.asarray(witness)
        if layout is None:
            raise WitnessError("layout required for a bare matrix")
    if W.shape != (layout.total_dim, layout.total_dim):
        raise WitnessError("dimension mismatch between witness and layout")
    groups = [layout.child_indices(m) for m in range(topology.num_children)]
    groups += [parent_support(topology, layout, n) for n in range(topology.num_parents)]
    for idx in groups:
        sub = W[np.ix_(idx, idx)]
        if np.linalg.eigvalsh(sub).max() > WITNESS_EIG_TOL:
            return False
    return True


def evaluate(witness: Witness | np.ndarray, C: BlockMatrix | np.ndarray) -> float:
    W = witness.matrix if isinstance(witness, Witness) else np.asarray(witness)
    Cd = C.data if isinstance(C, BlockMatrix) else np.asarray(C)
    if W.shape != Cd.shape:
        raise WitnessError("dimension mismatch")
    return float(np.trace(W @ Cd))


# ---------------------------------------------------------------------------
# The triangle witness (6×6) and its N-party generalization.

_W_GHZ_NUM = np.array([
    [-1, 1, 1, -1, 1, -1],
    [1, -1, -1, 1, -1, 1],
    [1, -1, -1, 1, 1, -1],
    [-1, 1, 1, -1, -1, 1],
    [1, -1, 1, -1, -1, 1],
    [-1, 1, -1, 1, 1, -1],
], dtype=float)


def w_ghz() -> Witness:
    """6×6 triangle witness in the direct convention; Tr against the
    covariance of the two-point 000/111 distribution equals 1/2."""
    w = Witness(_W_GHZ_NUM / 6.0, layout_for([2, 2, 2]), DIRECT, name="ghz")
    if not validate_witness(w, triangle()):
        raise WitnessError("ghz witness failed its own constraint validation")
    return w


def w_2n(N: int) -> Witness:
    """2N×2N witness for the N-party all-bipartite-sources network.

    The generating expression −I + 2(I_N ⊗ σ_x) + Σ_{j=1}^{2N−1} (−1)^j
    (a^j + a^{†j}), with a the 2N-dimensional ladder, pairs with covariances
    in the direct orthonormal-map basis (for N = 3 it is exactly six times
    the triangle witness).  Its per-child diag(1, −1) conjugate, returned
    here, pairs with the closed-form C^N_pq family and satisfies
    Tr[W·C^N_pq] = 4N(χ(N−2) − Δ)."""
    if N < 3:
        raise WitnessError("w_2n requires N >= 3")
    d = 2 * N
    ladder = np.diag(np.ones(d - 1), -1)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    W = -np.eye(d) + 2 * np.kron(np.eye(N), sx)
    power = np.eye(d)
    for j in range(1, d):
        power = power @ ladder
        W += (-1) ** j * (power + power.T)
    D = np.kron(np.eye(N), np.diag([1.0, -1.0]))
    w = Witness(D @ W @ D, layout_for([2] * N), REFLECTED, name=f"2n-{N}")
    if not validate_witness(w, all_bipartite(N)):
        raise WitnessError(f"w_2n({N}) failed constraint validation")
    return w


# ---------------------------------------------------------------------------
# Analytic incompatibility region for the p,q family under w_2n.

def kappa(N: int) -> float:
    if N < 3:
        raise WitnessError("kappa requires N >= 3")
    return (N - 1) * 2 ** (N - 2) / ((N - 2) * (2 ** (N - 1) - 1))


def analytic_boundary(N: int, p: float) -> float:
    """q threshold above which (p, q) is detected; symmetric in p and q."""
    if not 0 <= p <= 1:
        raise WitnessError("p must lie in [0, 1]")
    k = kappa(N)
    return p + k - np.sqrt(4 * k * p + (k - 1) ** 2)


def q0(N: int) -> float:
    """q above which (p=anything, q) is detected regardless of p."""
    k = kappa(N)
    return k - abs(k - 1)


def in_analytic_region(N: int, p: float, q: float) -> bool:
    return q > analytic_boundary(N, p) or p > analytic_boundary(N, q)


# ---------------------------------------------------------------------------
# Serialization.

def witness_to_dict(w: Witness) -> dict:
    return {
        "name": w.name,
        "convention": w.convention,
        "matrix": w.matrix.tolist(),
    }


def witness_from_dict(data: dict, layout: BlockLayout) -> Witness:
    return Witness(np.array(data["matrix"], dtype=float), layout,
                   data.get("convention", DIRECT), data.get("name", ""))
