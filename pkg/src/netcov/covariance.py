"""Covariance matrices of feature-mapped outcome variables.

Each outcome x of child m at setting s is mapped to a vector in the block
V_{m,s} of a direct sum; the default maps are the canonical orthonormal
basis vectors. Covariances of the stacked vector Y are then assembled
block-by-block from pairwise marginals, which is all the downstream
decomposition tests ever look at.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionTable
from .topology import BlockLayout, layout_for

SYM_TOL = 1e-12
PSD_TOL = 1e-10


class CovarianceError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureMapSet:
    """One matrix per layout block: column x is the feature vector of
    outcome x, expressed in that block's own coordinates."""

    layout: BlockLayout
    maps: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.maps) != len(self.layout.blocks):
            raise CovarianceError("one feature map per layout block required")
        for V, (m, s, dim) in zip(self.maps, self.layout.blocks):
            if V.shape[0] != dim:
                raise CovarianceError(
                    f"feature map for block ({m},{s}) has row dim {V.shape[0]}, "
                    f"layout says {dim}"
                )

    def map_for(self, m: int, s: int) -> np.ndarray:
        return self.maps[self.layout.block_index(m, s)]


def orthonormal_maps(layout: BlockLayout) -> FeatureMapSet:
    """Default maps: canonical basis vector per outcome (dim = #outcomes)."""
    return FeatureMapSet(layout, tuple(np.eye(dim) for (_, _, dim) in layout.blocks))


@dataclass(frozen=True)
class BlockMatrix:
    """Dense symmetric matrix addressed through a BlockLayout.

    ``unobservable_mask`` lists unordered block pairs whose entries are not
    empirically defined (same child, different settings); such blocks are
    held at zero until a completion fills them in.
    """

    layout: BlockLayout
    data: np.ndarray
    unobservable_mask: frozenset[tuple[tuple[int, int], tuple[int, int]]] = field(
        default_factory=frozenset
    )

    def __post_init__(self):
        d = self.layout.total_dim
        if self.data.shape != (d, d):
            raise CovarianceError(f"data shape {self.data.shape} != layout dim {d}")
        if np.abs(self.data - self.data.T).max() > SYM_TOL:
            raise CovarianceError("matrix is not symmetric within 1e-12")
        self.data.setflags(write=False)

    def block(self, m: int, s: int, mp: int, sp: int) -> np.ndarray:
        rows = self.layout.indices(m, s)
        cols = self.layout.indices(mp, sp)
        return self.data[np.ix_(list(rows), list(cols))]

    def masked_index_pairs(self) -> list[tuple[list[int], list[int]]]:
        """Row/column index lists for every masked block (one orientation;
        the transpose is implied by symmetry)."""
        out = []
        for (a, b) in self.unobservable_mask:
            out.append((list(self.layout.indices(*a)), list(self.layout.indices(*b))))
        return out

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.data).min())


def mean_vector(dist: DistributionTable, maps: FeatureMapSet,
                s_bar: tuple[int, ...]) -> np.ndarray:
    """E[Y] at a full setting assignment."""
    layout = maps.layout
    mu = np.zeros(layout.total_dim)
    for m in range(dist.num_children):
        pm = dist.marginal((m,), s_bar)
        V = maps.map_for(m, s_bar[m])
        mu[list(layout.indices(m, s_bar[m]))] = V @ pm
    return mu


def covariance_from_distribution(dist: DistributionTable, maps: FeatureMapSet | None = None,
                                 layout: BlockLayout | None = None) -> BlockMatrix:
    """Cov(Y) of a joint (input-free) distribution."""
    if not dist.is_joint:
        raise CovarianceError("joint distribution required; use observable_covariance")
    if layout is None:
        layout = layout_for(list(dist.outcomes))
    if maps is None:
        maps = orthonormal_maps(layout)
    M = dist.num_children
    s0 = (0,) * M
    d = layout.total_dim
    cov = np.zeros((d, d))
    mu = mean_vector(dist, maps, s0)
    for m in range(M):
        rows = list(layout.indices(m, 0))
        Vm = maps.map_for(m, 0)
        pm = dist.marginal((m,), s0)
        cov[np.ix_(rows, rows)] = Vm @ np.diag(pm) @ Vm.T
        for mp in range(m + 1, M):
            cols = list(layout.indices(mp, 0))
            Vmp = maps.map_for(mp, 0)
            pair = dist.marginal((m, mp), s0)
            blk = Vm @ pair @ Vmp.T
            cov[np.ix_(rows, cols)] = blk
            cov[np.ix_(cols, rows)] = blk.T
    cov -= np.outer(mu, mu)
    cov = (cov + cov.T) / 2
    out = BlockMatrix(layout, cov)
    if out.min_eigenvalue() < -PSD_TOL:
        raise CovarianceError("covariance of a distribution came out non-PSD")
    return out


def observable_covariance(dist: DistributionTable, maps: FeatureMapSet | None = None,
                          layout: BlockLayout | None = None) -> BlockMatrix:
    """Block matrix of all empirically measurable covariances.

    Diagonal blocks come from single-party marginals, cross-child blocks
    from pairwise marginals at the relevant setting pair (other parties'
    settings pinned at 0, which no-signalling makes immaterial); same-child
    cross-setting blocks are zero and masked.
    """
    if layout is None:
        layout = layout_for(list(dist.outcomes), list(dist.settings))
    if maps is None:
        maps = orthonormal_maps(layout)
    M = dist.num_children
    d = layout.total_dim
    cov = np.zeros((d, d))
    mask = set()

    def base_settings(assign: dict[int, int]) -> tuple[int, ...]:
        return tuple(assign.get(m, 0) for m in range(M))

    means: dict[tuple[int, int], np.ndarray] = {}
    for m in range(M):
        Vm_settings = layout.settings_of(m)
        for s in Vm_settings:
            pm = dist.marginal((m,), base_settings({m: s}))
            V = maps.map_for(m, s)
            means[(m, s)] = V @ pm
            rows = list(layout.indices(m, s))
            blk = V @ np.diag(pm) @ V.T - np.outer(means[(m, s)], means[(m, s)])
            cov[np.ix_(rows, rows)] = blk
    for m in range(M):
        for mp in range(m + 1, M):
            for s in layout.settings_of(m):
                for sp in layout.settings_of(mp):
                    pair = dist.marginal((m, mp), base_settings({m: s, mp: sp}))
                    blk = (maps.map_for(m, s) @ pair @ maps.map_for(mp, sp).T
                           - np.outer(means[(m, s)], means[(mp, sp)]))
                    rows = list(layout.indices(m, s))
                    cols = list(layout.indices(mp, sp))
                    cov[np.ix_(rows, cols)] = blk
                    cov[np.ix_(cols, rows)] = blk.T
    for m in range(M):
        ss = layout.settings_of(m)
        for i, s in enumerate(ss):
            for sp in ss[i + 1:]:
                mask.add(((m, s), (m, sp)))
    cov = (cov + cov.T) / 2
    return BlockMatrix(layout, cov, frozenset(mask))


# ---------------------------------------------------------------------------
# The binary p,q family in closed form.

def pq_constants(N: int, p: float, q: float) -> tuple[float, float]:
    delta = 2 ** (N - 2) * (1 - p - q) / (2**N - 2)
    chi = (1 - (p - q) ** 2) / 4 - delta
    return delta, chi


def pq_covariance_closed_form(N: int, p: float, q: float) -> BlockMatrix:
    """(Δ·I_N + χ·J_N) ⊗ (I_2 + σ_x): the reflected-basis convention.

    Equals covariance_from_distribution(pq_distribution(N, p, q)) after
    conjugating each child block by diag(1, −1); see :func:`reflect`.
    """
    if p < 0 or q < 0 or p + q > 1 + 1e-12:
        raise CovarianceError(f"need p, q >= 0 and p + q <= 1, got p={p}, q={q}")
    delta, chi = pq_constants(N, p, q)
    core = delta * np.eye(N) + chi * np.ones((N, N))
    cell = np.eye(2) + np.array([[0.0, 1.0], [1.0, 0.0]])
    return BlockMatrix(layout_for([2] * N), np.kron(core, cell))


def reflect(matrix: BlockMatrix) -> BlockMatrix:
    """Congruence by diag(1, −1, 1, −1, ...) within every block.

    This is a feature-map sign relabeling, so it converts between the two
    basis conventions without affecting any feasibility verdict.
    """
    signs = np.ones(matrix.layout.total_dim)
    for i, (_, _, dim) in enumerate(matrix.layout.blocks):
        off = matrix.layout.offsets[i]
        signs[off:off + dim] = [(-1) ** j for j in range(dim)]
    D = np.diag(signs)
    return BlockMatrix(matrix.layout, D @ matrix.data @ D, matrix.unobservable_mask)
