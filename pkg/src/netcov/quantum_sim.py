"""Dense quantum engine for network scenarios at desk scale.

A realization assigns each parent a density matrix on the subsystems it
sends to its children, and each child a POVM (per setting) on the tensor
product of everything it receives.  Probabilities are contracted with
einsum over per-subsystem indices, so the full joint state never has to be
materialized; the constructive-decomposition checkers do build operators on
(suffixes of) the full Hilbert space and are therefore capped at small total
dimension.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .covariance import observable_covariance
from .distributions import DistributionTable, conditional_table, joint_table
from .net_tests import FeasibilityCertificate
from .topology import BlockLayout, NetworkTopology, layout_for, parent_support, star

DIM_CAP = 2 ** 12
DENSE_CAP = 2 ** 10  # for the explicit-certificate checkers
CHECK_TOL = 1e-10


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkRealization:
    """Parent states and child POVMs over a subsystem structure.

    ``subsystem_dims[(n, m)]`` is the dimension of the system parent n
    sends to child m.  Parent state n lives on its subsystems ordered by
    child index; the POVM of child m (one list per setting) lives on its
    subsystems ordered by parent index.
    """

    topology: NetworkTopology
    subsystem_dims: dict[tuple[int, int], int]
    parent_states: tuple[np.ndarray, ...]
    child_povms: tuple[tuple[tuple[np.ndarray, ...], ...], ...]

    def __post_init__(self):
        topo = self.topology
        if len(self.parent_states) != topo.num_parents:
            raise SimulationError("one state per parent required")
        if len(self.child_povms) != topo.num_children:
            raise SimulationError("one POVM collection per child required")
        for n, rho in enumerate(self.parent_states):
            d = int(np.prod([self.subsystem_dims[(n, m)]
                             for m in sorted(topo.children_of[n])]))
            if rho.shape != (d, d):
                raise SimulationError(f"parent {n}: state dim {rho.shape} != {d}")
            if np.abs(rho - rho.conj().T).max() > CHECK_TOL:
                raise SimulationError(f"parent {n}: state not Hermitian")
            if np.linalg.eigvalsh(rho).min() < -CHECK_TOL:
                raise SimulationError(f"parent {n}: state not PSD")
            if abs(np.trace(rho).real - 1.0) > 1e-12:
                raise SimulationError(f"parent {n}: state trace != 1")
        for m, settings in enumerate(self.child_povms):
            d = self.child_dim(m)
            for s, povm in enumerate(settings):
                total = np.zeros((d, d), dtype=complex)
                for x, A in enumerate(povm):
                    if A.shape != (d, d):
                        raise SimulationError(f"child {m}, setting {s}: bad POVM dim")
                    if np.abs(A - A.conj().T).max() > CHECK_TOL:
                        raise SimulationError(f"child {m}: POVM element not Hermitian")
                    if np.linalg.eigvalsh(A).min() < -CHECK_TOL:
                        raise SimulationError(f"child {m}: POVM element not PSD")
                    total += A
                if np.abs(total - np.eye(d)).max() > CHECK_TOL:
                    raise SimulationError(f"child {m}, setting {s}: POVM sum != 1")

    def child_subsystems(self, m: int) -> list[tuple[int, int]]:
        return [(n, m) for n in sorted(self.topology.parents_of(m))]

    def parent_subsystems(self, n: int) -> list[tuple[int, int]]:
        return [(n, m) for m in sorted(self.topology.children_of[n])]

    def child_dim(self, m: int) -> int:
        return int(np.prod([self.subsystem_dims[k] for k in self.child_subsystems(m)],
                           dtype=int))

    def parent_dim(self, n: int) -> int:
        return int(np.prod([self.subsystem_dims[k] for k in self.parent_subsystems(n)],
                           dtype=int))

    @property
    def total_dim(self) -> int:
        return int(np.prod(list(self.subsystem_dims.values()), dtype=int))

    @property
    def outcomes(self) -> tuple[int, ...]:
        return tuple(len(settings[0]) for settings in self.child_povms)

    @property
    def settings(self) -> tuple[int, ...]:
        return tuple(len(settings) for settings in self.child_povms)


# ---------------------------------------------------------------------------
# Probability tables by tensor contraction.

def _probability_table(real: NetworkRealization, s_bar: tuple[int, ...]) -> np.ndarray:
    """P(x_1..x_M) at a fixed setting tuple, via one einsum."""
    if real.total_dim > DIM_CAP:
        raise SimulationError(f"total dimension {real.total_dim} exceeds cap {DIM_CAP}")
    topo = real.topology
    subsystems = sorted(real.subsystem_dims)  # (n, m) pairs, any fixed order works
    ket = {k: 2 * i for i, k in enumerate(subsystems)}
    bra = {k: 2 * i + 1 for i, k in enumerate(subsystems)}
    next_axis = 2 * len(subsystems)
    operands = []
    for n in range(topo.num_parents):
        subs = real.parent_subsystems(n)
        dims = [real.subsystem_dims[k] for k in subs]
        rho = real.parent_states[n].reshape(dims + dims)
        # rho[i..., j...] with Tr(A rho) = A[j, i] rho[i, j]
        operands.append(rho)
        operands.append([bra[k] for k in subs] + [ket[k] for k in subs])
    out_axes = []
    for m in range(topo.num_children):
        subs = real.child_subsystems(m)
        dims = [real.subsystem_dims[k] for k in subs]
        povm = real.child_povms[m][s_bar[m]]
        stacked = np.stack(povm).reshape([len(povm)] + dims + dims)
        x_axis = next_axis
        next_axis += 1
        out_axes.append(x_axis)
        operands.append(stacked)
        operands.append([x_axis] + [ket[k] for k in subs] + [bra[k] for k in subs])
    table = np.einsum(*operands, out_axes, optimize=True)
    table = table.real
    table[np.abs(table) < 1e-15] = 0.0
    return np.clip(table, 0.0, None)


def distribution(real: NetworkRealization) -> DistributionTable:
    """Joint outcome distribution of a single-setting realization."""
    if any(S != 1 for S in real.settings):
        raise SimulationError("realization has settings; use conditional_distribution")
    return joint_table(_probability_table(real, (0,) * real.topology.num_children))


def conditional_distribution(real: NetworkRealization) -> DistributionTable:
    M = real.topology.num_children
    probs = np.zeros(real.settings + real.outcomes)
    for s_bar in itertools.product(*(range(S) for S in real.settings)):
        probs[s_bar] = _probability_table(real, s_bar)
    return conditional_table(probs, M)


# ---------------------------------------------------------------------------
# Dense operators on the full Hilbert space, parent-major subsystem order.

def _parent_major_order(real: NetworkRealization) -> list[tuple[int, int]]:
    order = []
    for n in range(real.topology.num_parents):
        order.extend(real.parent_subsystems(n))
    return order


def _embed_child_operator(real: NetworkRealization, m: int, A: np.ndarray,
                          order: list[tuple[int, int]]) -> np.ndarray:
    """A^{(m)} ⊗ 1 as a full matrix in the given subsystem order."""
    subs = real.child_subsystems(m)
    others = [k for k in order if k not in subs]
    dims_child = [real.subsystem_dims[k] for k in subs]
    dims_other = [real.subsystem_dims[k] for k in others]
    full = np.kron(A, np.eye(int(np.prod(dims_other, dtype=int))))
    current = subs + others
    tensor = full.reshape(dims_child + dims_other + dims_child + dims_other)
    perm = [current.index(k) for k in order]
    K = len(order)
    tensor = tensor.transpose(perm + [p + K for p in perm])
    d = real.total_dim
    return tensor.reshape(d, d)


def _full_state(real: NetworkRealization) -> np.ndarray:
    rho = np.eye(1, dtype=complex)
    for state in real.parent_states:
        rho = np.kron(rho, state)
    return rho


def child_major_state(real: NetworkRealization) -> np.ndarray:
    """The joint parent state permuted into child-major subsystem order."""
    order = _parent_major_order(real)
    target = sorted(order, key=lambda k: (k[1], k[0]))
    dims = [real.subsystem_dims[k] for k in order]
    K = len(order)
    tensor = _full_state(real).reshape(dims + dims)
    perm = [order.index(k) for k in target]
    d = real.total_dim
    return tensor.transpose(perm + [p + K for p in perm]).reshape(d, d)


def _peel_parent(real: NetworkRealization, X: np.ndarray, n: int,
                 suffix_dim: int) -> np.ndarray:
    """Tr_{p_n}(X (ρ_n ⊗ 1)) for X on parents n..N grouped in front."""
    dn = real.parent_dim(n)
    rest = suffix_dim // dn
    T = X.reshape(dn, rest, dn, rest)
    return np.einsum("arbs,ba->rs", T, real.parent_states[n], optimize=True)


def _setting_blocks(real: NetworkRealization) -> BlockLayout:
    return layout_for(list(real.outcomes), list(real.settings))


def _telescoping_cn(real: NetworkRealization, layout: BlockLayout) -> list[np.ndarray]:
    """The explicit PSD operators C_n of the constructive decomposition."""
    if real.total_dim > DENSE_CAP:
        raise SimulationError(
            f"total dimension {real.total_dim} exceeds dense cap {DENSE_CAP}")
    topo = real.topology
    N = topo.num_parents
    order = _parent_major_order(real)
    d_total = real.total_dim

    # T[k] maps each (m, s, x) to the operator left after absorbing the
    # states of parents 1..k; T[0] is A ⊗ 1 on everything.
    entries = [(m, s, x)
               for m in range(topo.num_children)
               for s in range(real.settings[m])
               for x in range(real.outcomes[m])]
    ops = {key: _embed_child_operator(real, key[0],
                                      np.asarray(real.child_povms[key[0]][key[1]][key[2]],
                                                 dtype=complex), order)
           for key in entries}
    levels = [dict(ops)]
    suffix = d_total
    for n in range(N):
        peeled = {key: _peel_parent(real, X, n, suffix) for key, X in levels[-1].items()}
        levels.append(peeled)
        suffix //= real.parent_dim(n)

    C_list = []
    ambient = layout.total_dim
    for n in range(N):
        dn = real.parent_dim(n)
        rho_suffix = np.eye(1, dtype=complex)
        for k in range(n, N):
            rho_suffix = np.kron(rho_suffix, real.parent_states[k])
        W = {}
        for key in entries:
            upper = levels[n][key]
            lower = np.kron(np.eye(dn), levels[n + 1][key])
            W[key] = upper - lower
        Cn = np.zeros((ambient, ambient), dtype=complex)
        for (m, s, x) in entries:
            i = layout.offsets[layout.block_index(m, s)] + x
            for (mp, sp, xp) in entries:
                j = layout.offsets[layout.block_index(mp, sp)] + xp
                if j < i:
                    continue
                val = np.trace(W[(m, s, x)] @ W[(mp, sp, xp)].conj().T @ rho_suffix)
                Cn[i, j] = val
                Cn[j, i] = np.conj(val)
        C_list.append(Cn)
    return C_list


@dataclass(frozen=True)
class DecompositionReport:
    C_n: tuple[np.ndarray, ...]
    R: np.ndarray
    identity_residual: float
    min_eigenvalues: tuple[float, ...]
    support_violation: float
    passed: bool


def lemma1_check(real: NetworkRealization) -> DecompositionReport:
    """Verify the constructive covariance decomposition of a no-inputs
    realization: Σ_n C_n equals the centered second moment of Q, each C_n
    is PSD, and each C_n is supported on its parent's child blocks."""
    if any(S != 1 for S in real.settings):
        raise SimulationError("lemma1_check expects a single setting per child")
    topo = real.topology
    layout = layout_for(list(real.outcomes))
    C_list = _telescoping_cn(real, layout)
    ambient = layout.total_dim

    order = _parent_major_order(real)
    rho = _full_state(real)
    entries = [(m, 0, x) for m in range(topo.num_children)
               for x in range(real.outcomes[m])]
    ops = {key: _embed_child_operator(real, key[0],
                                      np.asarray(real.child_povms[key[0]][0][key[2]],
                                                 dtype=complex), order)
           for key in entries}
    mean = np.zeros(ambient, dtype=complex)
    second = np.zeros((ambient, ambient), dtype=complex)
    for (m, _, x) in entries:
        i = layout.offsets[layout.block_index(m, 0)] + x
        mean[i] = np.trace(ops[(m, 0, x)] @ rho)
        for (mp, _, xp) in entries:
            j = layout.offsets[layout.block_index(mp, 0)] + xp
            second[i, j] = np.trace(ops[(m, 0, x)] @ ops[(mp, 0, xp)] @ rho)
    centered = second - np.outer(mean, mean.conj())
    total = sum(C_list)
    residual = float(np.abs(total - centered).max())

    # the block-diagonal remainder: δ_ab P(a) − Tr(A_a A_b ρ) per child
    R = np.zeros((ambient, ambient), dtype=complex)
    for m in range(topo.num_children):
        idx = list(layout.indices(m, 0))
        for i in idx:
            R[i, i] += mean[i].real
            for j in idx:
                R[i, j] -= second[i, j]

    min_eigs = tuple(float(np.linalg.eigvalsh((Cn + Cn.conj().T) / 2).min())
                     for Cn in C_list)
    support_violation = 0.0
    for n, Cn in enumerate(C_list):
        sup = parent_support(topo, layout, n)
        outside = np.setdiff1d(np.arange(ambient), np.array(sup, dtype=int))
        if outside.size:
            support_violation = max(support_violation,
                                    float(np.abs(Cn[outside, :]).max()))
    passed = (residual <= CHECK_TOL and support_violation <= CHECK_TOL
              and all(lo >= -CHECK_TOL for lo in min_eigs))
    return DecompositionReport(tuple(C_list), R, residual, min_eigs,
                               support_violation, passed)


@dataclass(frozen=True)
class CompletionReport:
    completion: np.ndarray
    R: np.ndarray
    certificate: FeasibilityCertificate
    decomposition_residual: float
    completed_min_eigenvalue: float
    r_min_eigenvalue: float
    passed: bool


def lemma2_completion(real: NetworkRealization) -> CompletionReport:
    """Explicit Hermitian completion and decomposition for a realization
    with settings: cross-setting operator-product covariances fill the
    masked blocks, and the telescoping C_n plus the per-block remainder R
    reconstruct the completed matrix exactly."""
    topo = real.topology
    layout = _setting_blocks(real)
    ambient = layout.total_dim
    order = _parent_major_order(real)
    rho = _full_state(real)
    entries = [(m, s, x)
               for m in range(topo.num_children)
               for s in range(real.settings[m])
               for x in range(real.outcomes[m])]
    ops = {key: _embed_child_operator(real, key[0],
                                      np.asarray(real.child_povms[key[0]][key[1]][key[2]],
                                                 dtype=complex), order)
           for key in entries}
    positions = {key: layout.offsets[layout.block_index(key[0], key[1])] + key[2]
                 for key in entries}
    mean = np.zeros(ambient, dtype=complex)
    gram = np.zeros((ambient, ambient), dtype=complex)
    for key in entries:
        mean[positions[key]] = np.trace(ops[key] @ rho)
    for key in entries:
        for key2 in entries:
            gram[positions[key], positions[key2]] = np.trace(ops[key] @ ops[key2] @ rho)

    completion = np.zeros((ambient, ambient), dtype=complex)
    R = np.zeros((ambient, ambient), dtype=complex)
    for (m, s, x) in entries:
        i = positions[(m, s, x)]
        for sp in range(real.settings[m]):
            for xp in range(real.outcomes[m]):
                j = positions[(m, sp, xp)]
                if sp != s:
                    completion[i, j] = gram[i, j] - mean[i] * mean[j].conj()
                else:
                    R[i, j] = (mean[i].real if i == j else 0.0) - gram[i, j]

    C_list = _telescoping_cn(real, layout)
    # entries outside a parent's support are analytically zero; project out
    # the floating-point dust so the certificate audit can demand exactness
    for n, Cn in enumerate(C_list):
        sup = parent_support(topo, layout, n)
        keep = np.zeros((ambient, ambient), dtype=bool)
        keep[np.ix_(sup, sup)] = True
        Cn[~keep] = 0.0
    dist = conditional_distribution(real)
    C_obs = observable_covariance(dist, layout=layout)
    total = R + sum(C_list)
    residual = float(np.abs(total - (C_obs.data + completion)).max())
    completed_min = float(np.linalg.eigvalsh(
        (C_obs.data + completion + (C_obs.data + completion).conj().T) / 2).min())
    r_min = float(np.linalg.eigvalsh((R + R.conj().T) / 2).min())
    herm = float(np.abs(completion - completion.conj().T).max())
    cert = FeasibilityCertificate(layout, R, tuple(C_list), completion)
    passed = (residual <= CHECK_TOL and completed_min >= -CHECK_TOL
              and r_min >= -CHECK_TOL and herm <= CHECK_TOL)
    return CompletionReport(completion, R, cert, residual, completed_min,
                            r_min, passed)


# ---------------------------------------------------------------------------
# Builders.

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_povm(axis: str) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the ±1 eigenspaces of the chosen Pauli operator;
    outcome 0 is the +1 eigenvector."""
    if axis not in SIGMA:
        raise SimulationError(f"unknown axis {axis!r}")
    vals, vecs = np.linalg.eigh(SIGMA[axis])
    plus = np.outer(vecs[:, 1], vecs[:, 1].conj())
    minus = np.outer(vecs[:, 0], vecs[:, 0].conj())
    return plus, minus


def _direction_povm(theta: float, phi: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi),
                  np.cos(theta)])
    op = n[0] * SIGMA["x"] + n[1] * SIGMA["y"] + n[2] * SIGMA["z"]
    plus = (np.eye(2) + op) / 2
    minus = (np.eye(2) - op) / 2
    return plus, minus


def ghz_state() -> NetworkRealization:
    """Single source feeding three qubits with a GHZ state, measured in
    the computational basis."""
    psi = np.zeros(8)
    psi[0] = psi[7] = 1 / np.sqrt(2)
    rho = np.outer(psi, psi)
    povm = pauli_povm("z")
    return NetworkRealization(
        topology=star(3),
        subsystem_dims={(0, 0): 2, (0, 1): 2, (0, 2): 2},
        parent_states=(rho.astype(complex),),
        child_povms=tuple((povm,) for _ in range(3)),
    )


def w_state(visibility: float) -> NetworkRealization:
    """Noisy W state v|W⟩⟨W| + (1−v)·1/8 on a single three-qubit source,
    with σ_x (setting 0) and σ_z (setting 1) measurements per child."""
    if not 0 <= visibility <= 1:
        raise SimulationError("visibility must lie in [0, 1]")
    psi = np.zeros(8)
    for idx in (0b001, 0b010, 0b100):
        psi[idx] = 1 / np.sqrt(3)
    rho = visibility * np.outer(psi, psi) + (1 - visibility) * np.eye(8) / 8
    settings = (pauli_povm("x"), pauli_povm("z"))
    return NetworkRealization(
        topology=star(3),
        subsystem_dims={(0, 0): 2, (0, 1): 2, (0, 2): 2},
        parent_states=(rho.astype(complex),),
        child_povms=tuple(settings for _ in range(3)),
    )


def singlet() -> NetworkRealization:
    """One source, two qubit children, CHSH-optimal measurement angles
    (⟨CHSH⟩ = 2√2): σ_z/σ_x on child 1, (σ_z ± σ_x)/√2 on child 2."""
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    rho = np.outer(psi, psi).astype(complex)
    child1 = (pauli_povm("z"), pauli_povm("x"))
    child2 = (_direction_povm(np.pi / 4), _direction_povm(-np.pi / 4))
    topo = NetworkTopology(("p1",), ("A", "B"), (frozenset({0, 1}),))
    return NetworkRealization(
        topology=topo,
        subsystem_dims={(0, 0): 2, (0, 1): 2},
        parent_states=(rho,),
        child_povms=(child1, child2),
    )


def pr_box_mixture(v: float) -> DistributionTable:
    """v·PR + (1−v)·uniform as a conditional table; the v = 1 point has no
    quantum realization, so no NetworkRealization is offered."""
    if not 0 <= v <= 1:
        raise SimulationError("mixing weight must lie in [0, 1]")
    probs = np.zeros((2, 2, 2, 2))
    for s1, s2, x1, x2 in itertools.product(range(2), repeat=4):
        pr = 0.5 if (x1 ^ x2) == (s1 & s2) else 0.0
        probs[s1, s2, x1, x2] = v * pr + (1 - v) * 0.25
    return conditional_table(probs, 2)


# ---------------------------------------------------------------------------
# Random instances.

def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Hilbert-Schmidt sampling: G·G† normalized to unit trace."""
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def _haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, Rm = np.linalg.qr(G)
    return Q * (np.diag(Rm) / np.abs(np.diag(Rm)))


def random_povm(dim: int, outcomes: int, rng: np.random.Generator
                ) -> tuple[np.ndarray, ...]:
    """Projective measurement in a Haar-random basis, basis vectors grouped
    round-robin into the requested number of outcomes."""
    if outcomes > dim:
        raise SimulationError("more outcomes than basis vectors")
    U = _haar_unitary(dim, rng)
    elements = [np.zeros((dim, dim), dtype=complex) for _ in range(outcomes)]
    for k in range(dim):
        v = U[:, k]
        elements[k % outcomes] += np.outer(v, v.conj())
    return tuple(elements)


def random_realization(topology: NetworkTopology, rng: np.random.Generator,
                       subsystem_dim: int = 2, outcomes: int = 2,
                       settings: int = 1) -> NetworkRealization:
    dims = {(n, m): subsystem_dim
            for n in range(topology.num_parents)
            for m in topology.children_of[n]}
    states = tuple(
        random_density_matrix(
            int(np.prod([dims[(n, m)] for m in sorted(topology.children_of[n])],
                        dtype=int)), rng)
        for n in range(topology.num_parents))
    povms = []
    for m in range(topology.num_children):
        d = int(np.prod([dims[(n, m)] for n in sorted(topology.parents_of(m))],
                        dtype=int))
        povms.append(tuple(random_povm(d, min(outcomes, d), rng)
                           for _ in range(settings)))
    return NetworkRealization(topology, dims, states, tuple(povms))
