"""Comparison tests: Finner inequality, entropic and inflation bounds.

All of these are rejectors only — a violation rules the network out, but
passing says nothing about compatibility.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .distributions import DistributionTable

FINNER_TOL = 1e-12
OPT_TOL = 1e-10


class BaselineError(ValueError):
    pass


class AsymmetricDistribution(BaselineError):
    """The inflation bound only holds for symmetric correlators."""


def _joint(P: DistributionTable) -> np.ndarray:
    if not P.is_joint:
        raise BaselineError("baseline tests expect a joint distribution")
    return P.joint()


def _single_marginals(table: np.ndarray) -> list[np.ndarray]:
    n = table.ndim
    return [table.sum(axis=tuple(k for k in range(n) if k != j)) for j in range(n)]


# ---------------------------------------------------------------------------
# Finner inequality.

def finner_indicator(P: DistributionTable) -> tuple[bool, float]:
    """Point test: P(x̄) must not exceed the geometric mean √(Π_i P_i(x_i))
    on an all-bipartite network; returns (violated, max margin)."""
    table = _joint(P)
    marginals = _single_marginals(table)
    bound = np.ones_like(table)
    n = table.ndim
    for j, pj in enumerate(marginals):
        shape = [1] * n
        shape[j] = -1
        bound = bound * pj.reshape(shape)
    margin = float((table - np.sqrt(bound)).max())
    return margin > FINNER_TOL, margin


@dataclass(frozen=True)
class FinnerQuadraticForm:
    """M over outcome tuples with M_{x̄,x̄'} = P(x̄)P(x̄') − Π_j P_j(x_j)δ;
    F^T M F = E[Π_j f_j]² − Π_j E[f_j²] for F = ⊗_j f_j."""

    matrix: np.ndarray
    outcomes: tuple[int, ...]


def finner_quadratic_form(P: DistributionTable) -> FinnerQuadraticForm:
    table = _joint(P)
    flat = table.reshape(-1)
    M = np.outer(flat, flat)
    marginals = _single_marginals(table)
    diag = np.ones_like(table)
    n = table.ndim
    for j, pj in enumerate(marginals):
        shape = [1] * n
        shape[j] = -1
        diag = diag * pj.reshape(shape)
    M -= np.diag(diag.reshape(-1))
    return FinnerQuadraticForm(M, P.outcomes)


def _finner_value(table: np.ndarray, deltas: np.ndarray) -> float:
    """F^T M F at f_j(x) = (1 + (−1)^x δ_j)/2."""
    n = table.ndim
    marginals = _single_marginals(table)
    ef = table
    for j in range(n):
        f = np.array([(1 + deltas[j]) / 2, (1 - deltas[j]) / 2])
        ef = np.tensordot(ef, f, axes=([0], [0]))
    prod = 1.0
    for j, pj in enumerate(marginals):
        f2 = np.array([((1 + deltas[j]) / 2) ** 2, ((1 - deltas[j]) / 2) ** 2])
        prod *= float(pj @ f2)
    return float(ef) ** 2 - prod


def finner_dichotomic_opt(P: DistributionTable, restarts: int = 32,
                          sweeps: int = 50, seed: int | None = 0
                          ) -> tuple[float, np.ndarray]:
    """Coordinate-ascent maximization of F^T M F over the dichotomic
    post-processing family; a best value above ~1e-10 flags a violation.

    Each coordinate step solves the exact scalar quadratic over [−1, 1]
    (interior vertex or an endpoint); coordinates cycle j → (j mod n) + 1
    from random starting points.
    """
    table = _joint(P)
    if any(X != 2 for X in P.outcomes):
        raise BaselineError("dichotomic optimization needs binary children")
    n = table.ndim
    marginals = _single_marginals(table)
    biases = [float(pj[0] - pj[1]) for pj in marginals]
    rng = np.random.default_rng(seed)
    best_value = -np.inf
    best_deltas = np.zeros(n)
    for _ in range(restarts):
        deltas = rng.uniform(-1, 1, size=n)
        for _ in range(sweeps):
            moved = 0.0
            for j in range(n):
                # E[F] = (u + v δ_j)/2 with u, v from the other parties
                partial = table
                for k in range(n):
                    if k == j:
                        continue
                    f = np.array([(1 + deltas[k]) / 2, (1 - deltas[k]) / 2])
                    partial = np.tensordot(partial, f, axes=([0 if k < j else 1], [0]))
                u = float(partial.sum())
                v = float(partial[0] - partial[1])
                rest = 1.0
                for k in range(n):
                    if k == j:
                        continue
                    f2 = np.array([((1 + deltas[k]) / 2) ** 2,
                                   ((1 - deltas[k]) / 2) ** 2])
                    rest *= float(marginals[k] @ f2)
                # value(δ) = ((u + v δ)/2)² − rest·(1 + 2 e_j δ + δ²)/4
                a = v * v / 4 - rest / 4
                b = u * v / 2 - rest * biases[j] / 2
                candidates = [-1.0, 1.0]
                if a < 0:
                    candidates.append(float(np.clip(-b / (2 * a), -1.0, 1.0)))
                scores = [a * c * c + b * c for c in candidates]
                new = candidates[int(np.argmax(scores))]
                moved = max(moved, abs(new - deltas[j]))
                deltas[j] = new
            if moved < 1e-12:
                break
        value = _finner_value(table, deltas)
        if value > best_value:
            best_value = value
            best_deltas = deltas.copy()
    return best_value, best_deltas


def finner_grid_scan(P: DistributionTable, step: float = 0.01
                     ) -> tuple[float, np.ndarray]:
    """Brute-force oracle over the δ grid, for three binary children."""
    table = _joint(P)
    if table.ndim != 3 or table.shape != (2, 2, 2):
        raise BaselineError("grid scan implemented for three binary children")
    signs = [np.array([1.0, -1.0])] * 3
    corr = {}
    for subset in itertools.product(range(2), repeat=3):
        weights = [signs[j] if subset[j] else np.ones(2) for j in range(3)]
        corr[subset] = float(np.einsum("abc,a,b,c->", table, *weights))
    grid = np.arange(-1.0, 1.0 + step / 2, step)
    G = grid.size
    ones = np.ones(G)
    ef = np.zeros((G, G, G))
    for subset, T in corr.items():
        factors = [grid if subset[j] else ones for j in range(3)]
        ef += T * np.einsum("a,b,c->abc", *factors)
    ef /= 8.0
    marginals = _single_marginals(table)
    biases = [float(pj[0] - pj[1]) for pj in marginals]
    moments = [(1 + 2 * biases[j] * grid + grid ** 2) / 4 for j in range(3)]
    prod = np.einsum("a,b,c->abc", *moments)
    values = ef ** 2 - prod
    flat = int(np.argmax(values))
    idx = np.unravel_index(flat, values.shape)
    return float(values[idx]), np.array([grid[i] for i in idx])


# ---------------------------------------------------------------------------
# Entropic inequality.

def _entropy(p: np.ndarray) -> float:
    p = p.reshape(-1)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def mutual_information(table: np.ndarray, i: int, j: int) -> float:
    n = table.ndim
    pij = table.sum(axis=tuple(k for k in range(n) if k not in (i, j)))
    pi = pij.sum(axis=1)
    pj = pij.sum(axis=0)
    return _entropy(pi) + _entropy(pj) - _entropy(pij)


def entropic_test(P: DistributionTable) -> list[tuple[bool, float, float]]:
    """I(A:B) + I(A:C) ≤ H(A) and its two relabelings, in bits; returns
    one (violated, lhs, rhs) triple per pivot party."""
    table = _joint(P)
    if table.ndim != 3:
        raise BaselineError("entropic test expects exactly 3 children")
    results = []
    for pivot in range(3):
        others = [k for k in range(3) if k != pivot]
        lhs = sum(mutual_information(table, pivot, o) for o in others)
        marg = table.sum(axis=tuple(others))
        rhs = _entropy(marg)
        results.append((lhs > rhs + FINNER_TOL, float(lhs), float(rhs)))
    return results


# ---------------------------------------------------------------------------
# Inflation inequality.

def inflation_test(P: DistributionTable) -> tuple[bool, float, float]:
    """(1 + 2E_1 + E_2)² ≤ 2(1 + E_1)³ for the triangle, valid only when
    single-party and pairwise ±1 correlators are party-symmetric."""
    table = _joint(P)
    if table.ndim != 3 or table.shape != (2, 2, 2):
        raise BaselineError("inflation test expects three binary children")
    sign = np.array([1.0, -1.0])
    singles = [float(np.einsum("abc,a->", table.transpose(np.roll(range(3), -j)), sign))
               for j in range(3)]
    pairs = []
    for (i, j) in itertools.combinations(range(3), 2):
        pij = table.sum(axis=tuple(k for k in range(3) if k not in (i, j)))
        pairs.append(float(np.einsum("ab,a,b->", pij, sign, sign)))
    if max(singles) - min(singles) > 1e-9 or max(pairs) - min(pairs) > 1e-9:
        raise AsymmetricDistribution(
            "inflation bound requires E_A = E_B = E_C and E_AB = E_BC = E_AC")
    E1, E2 = singles[0], pairs[0]
    lhs = (1 + 2 * E1 + E2) ** 2
    rhs = 2 * (1 + E1) ** 3
    return lhs > rhs + FINNER_TOL, float(lhs), float(rhs)
