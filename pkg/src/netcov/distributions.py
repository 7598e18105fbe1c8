"""Finite outcome/setting distribution tables and the p,q family."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

PROB_TOL = 1e-12


class DistributionError(ValueError):
    pass


@dataclass(frozen=True)
class DistributionTable:
    """P(x_1..x_M | s_1..s_M) stored dense, shape = settings + outcomes.

    All setting cardinalities equal to 1 means a joint (input-free) table.
    Outcome alphabets are padded to a per-child maximum across settings;
    padded outcomes simply carry zero probability.
    """

    outcomes: tuple[int, ...]
    settings: tuple[int, ...]
    probs: np.ndarray

    def __post_init__(self):
        expected = tuple(self.settings) + tuple(self.outcomes)
        if self.probs.shape != expected:
            raise DistributionError(
                f"table shape {self.probs.shape} != settings+outcomes {expected}"
            )
        if np.any(self.probs < -PROB_TOL):
            raise DistributionError("negative probability entry")
        M = len(self.outcomes)
        sums = self.probs.sum(axis=tuple(range(M, 2 * M)))
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise DistributionError("probabilities must sum to 1 per setting tuple")
        self.probs.setflags(write=False)

    @property
    def num_children(self) -> int:
        return len(self.outcomes)

    @property
    def is_joint(self) -> bool:
        return all(s == 1 for s in self.settings)

    def joint(self) -> np.ndarray:
        """Outcome table of an input-free distribution."""
        if not self.is_joint:
            raise DistributionError("not a joint distribution")
        return self.probs.reshape(self.outcomes)

    def at_settings(self, s_bar: tuple[int, ...]) -> np.ndarray:
        """Outcome table conditioned on a full setting assignment."""
        return self.probs[tuple(s_bar)]

    def marginal(self, children: tuple[int, ...], s_bar: tuple[int, ...]) -> np.ndarray:
        """Marginal over the given children at the given setting tuple."""
        table = self.at_settings(s_bar)
        drop = tuple(i for i in range(self.num_children) if i not in children)
        out = table.sum(axis=drop)
        order = np.argsort(np.argsort(children))
        return np.transpose(out, order) if out.ndim > 1 else out


def joint_table(probs: np.ndarray) -> DistributionTable:
    probs = np.asarray(probs, dtype=float)
    M = probs.ndim
    return DistributionTable(
        outcomes=probs.shape,
        settings=(1,) * M,
        probs=probs.reshape((1,) * M + probs.shape).copy(),
    )


def conditional_table(probs: np.ndarray, num_children: int) -> DistributionTable:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 2 * num_children:
        raise DistributionError("expected one setting and one outcome axis per child")
    return DistributionTable(
        outcomes=probs.shape[num_children:],
        settings=probs.shape[:num_children],
        probs=probs.copy(),
    )


def pq_distribution(N: int, p: float, q: float) -> DistributionTable:
    """Mass p on all-zeros, q on all-ones, the rest uniform over other strings."""
    if p < 0 or q < 0 or p + q > 1 + PROB_TOL:
        raise DistributionError(f"need p, q >= 0 and p + q <= 1, got p={p}, q={q}")
    table = np.full((2,) * N, (1 - p - q) / (2**N - 2))
    table[(0,) * N] = p
    table[(1,) * N] = q
    return joint_table(table)


def ghz_distribution() -> DistributionTable:
    return pq_distribution(3, 0.5, 0.5)


def uniform_joint(outcomes: list[int]) -> DistributionTable:
    size = int(np.prod(outcomes))
    return joint_table(np.full(tuple(outcomes), 1.0 / size))


def mix(a: DistributionTable, b: DistributionTable, weight_a: float) -> DistributionTable:
    if a.outcomes != b.outcomes or a.settings != b.settings:
        raise DistributionError("mixture requires identical alphabets")
    return DistributionTable(
        a.outcomes, a.settings, weight_a * a.probs + (1 - weight_a) * b.probs
    )


# ---------------------------------------------------------------------------
# Sparse JSON format: missing entries read as zero.

def distribution_to_dict(dist: DistributionTable) -> dict:
    entries = []
    for s_bar in itertools.product(*(range(S) for S in dist.settings)):
        table = dist.at_settings(s_bar)
        for x_bar in itertools.product(*(range(X) for X in dist.outcomes)):
            p = float(table[x_bar])
            if p != 0.0:
                entries.append({"s": list(s_bar), "x": list(x_bar), "p": p})
    return {
        "settings": list(dist.settings),
        "outcomes": list(dist.outcomes),
        "table": entries,
    }


def distribution_from_dict(data: dict) -> DistributionTable:
    try:
        settings = tuple(int(s) for s in data["settings"])
        outcomes = tuple(int(x) for x in data["outcomes"])
        probs = np.zeros(settings + outcomes)
        for entry in data["table"]:
            s = tuple(entry.get("s", [0] * len(settings)))
            x = tuple(entry["x"])
            probs[s + x] = float(entry["p"])
    except (KeyError, TypeError, IndexError) as exc:
        raise DistributionError(f"malformed distribution document: {exc}") from exc
    return DistributionTable(outcomes, settings, probs)


def load_distribution(path) -> DistributionTable:
    with open(path) as fh:
        return distribution_from_dict(json.load(fh))


def save_distribution(dist: DistributionTable, path) -> None:
    with open(path, "w") as fh:
        json.dump(distribution_to_dict(dist), fh, indent=1)
