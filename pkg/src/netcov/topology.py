"""Network topologies: latent parents feeding observed children.

The admissible class of DAGs is bipartite in the causal sense: every edge
points from a latent source ("parent") to an observed party ("child"), and
no vertex plays both roles.  The decomposition tests only ever need the
support structure this induces on a block matrix, which is what
:func:`parent_support` exposes.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field


class TopologyError(ValueError):
    pass


class DuplicateVertex(TopologyError):
    pass


class DanglingChildReference(TopologyError):
    pass


@dataclass(frozen=True)
class NetworkTopology:
    """Bipartite DAG: parents (sources) and the children each one feeds.

    ``children_of[n]`` holds 0-based child indices for parent ``n``.
    """

    parents: tuple[str, ...]
    children: tuple[str, ...]
    children_of: tuple[frozenset[int], ...]

    def __post_init__(self):
        validate(self)

    @property
    def num_parents(self) -> int:
        return len(self.parents)

    @property
    def num_children(self) -> int:
        return len(self.children)

    def parents_of(self, m: int) -> frozenset[int]:
        """Inverse relation: parent indices pointing at child m."""
        return frozenset(n for n, cs in enumerate(self.children_of) if m in cs)


def validate(topology: NetworkTopology) -> None:
    """Raise if vertex names collide or a parent references a missing child."""
    names = list(topology.parents) + list(topology.children)
    if len(set(names)) != len(names):
        raise DuplicateVertex("parent/child identifiers must be pairwise distinct")
    if len(topology.children_of) != len(topology.parents):
        raise TopologyError("children_of must have one entry per parent")
    M = len(topology.children)
    for n, cs in enumerate(topology.children_of):
        for m in cs:
            if not (0 <= m < M):
                raise DanglingChildReference(
                    f"parent {topology.parents[n]!r} references child index {m}, "
                    f"valid range is 0..{M - 1}"
                )


def orphan_children(topology: NetworkTopology) -> frozenset[int]:
    """Children that no parent points to.

    When this set is empty, the block-diagonal term of the decomposition can
    be absorbed into the per-parent terms and dropped as a variable.
    """
    covered = set().union(*topology.children_of) if topology.children_of else set()
    return frozenset(range(topology.num_children)) - covered


@dataclass(frozen=True)
class BlockLayout:
    """Direct-sum bookkeeping for the feature spaces, one block per
    (child, setting) pair, in child-major then setting order."""

    blocks: tuple[tuple[int, int, int], ...]  # (child m, setting s, dim)
    offsets: tuple[int, ...] = field(default=())
    total_dim: int = 0

    def __post_init__(self):
        offsets = []
        pos = 0
        for (_, _, dim) in self.blocks:
            offsets.append(pos)
            pos += dim
        object.__setattr__(self, "offsets", tuple(offsets))
        object.__setattr__(self, "total_dim", pos)

    def block_index(self, m: int, s: int) -> int:
        for i, (bm, bs, _) in enumerate(self.blocks):
            if bm == m and bs == s:
                return i
        raise KeyError((m, s))

    def indices(self, m: int, s: int) -> range:
        i = self.block_index(m, s)
        return range(self.offsets[i], self.offsets[i] + self.blocks[i][2])

    def child_indices(self, m: int) -> list[int]:
        """All indices of child m across its settings."""
        out: list[int] = []
        for i, (bm, _, dim) in enumerate(self.blocks):
            if bm == m:
                out.extend(range(self.offsets[i], self.offsets[i] + dim))
        return out

    def settings_of(self, m: int) -> list[int]:
        return sorted(s for (bm, s, _) in self.blocks if bm == m)


def layout_for(outcomes: list[int], settings: list[int] | None = None) -> BlockLayout:
    """Canonical layout: block dim = outcome cardinality, per (child, setting)."""
    if settings is None:
        settings = [1] * len(outcomes)
    blocks = []
    for m, (X, S) in enumerate(zip(outcomes, settings)):
        for s in range(S):
            blocks.append((m, s, X))
    return BlockLayout(tuple(blocks))


def parent_support(topology: NetworkTopology, layout: BlockLayout, n: int) -> list[int]:
    """Indices of all blocks, over all settings, of all children of parent n."""
    if not (0 <= n < topology.num_parents):
        raise IndexError(f"parent index {n} out of range")
    out: list[int] = []
    for m in sorted(topology.children_of[n]):
        out.extend(layout.child_indices(m))
    return out


# ---------------------------------------------------------------------------
# Named constructions used throughout.

def triangle() -> NetworkTopology:
    """Three children, three bipartite sources, each pair of children shared."""
    return NetworkTopology(
        parents=("p1", "p2", "p3"),
        children=("A", "B", "C"),
        children_of=(frozenset({0, 1}), frozenset({0, 2}), frozenset({1, 2})),
    )


def all_k_partite(num_children: int, k: int) -> NetworkTopology:
    """One source per k-subset of children; k=2 gives the all-bipartite net."""
    combos = list(itertools.combinations(range(num_children), k))
    return NetworkTopology(
        parents=tuple(f"p{i + 1}" for i in range(len(combos))),
        children=tuple(f"c{m + 1}" for m in range(num_children)),
        children_of=tuple(frozenset(c) for c in combos),
    )


def all_bipartite(num_children: int) -> NetworkTopology:
    return all_k_partite(num_children, 2)


def star(num_children: int) -> NetworkTopology:
    """Single source feeding every child."""
    return NetworkTopology(
        parents=("p1",),
        children=tuple(f"c{m + 1}" for m in range(num_children)),
        children_of=(frozenset(range(num_children)),),
    )


# ---------------------------------------------------------------------------
# File format.

def topology_from_dict(data: dict) -> tuple[NetworkTopology, list[int], list[int]]:
    """Parse the JSON topology format.

    Returns (topology, outcomes per child, settings per child); children
    order in the file fixes block order.
    """
    try:
        children = [c["name"] for c in data["children"]]
        outcomes = [int(c.get("outcomes", 2)) for c in data["children"]]
        settings = [int(c.get("settings", 1)) for c in data["children"]]
        parents = [p["name"] for p in data["parents"]]
        child_pos = {name: i for i, name in enumerate(children)}
        children_of = []
        for p in data["parents"]:
            refs = []
            for name in p["children"]:
                if name not in child_pos:
                    raise DanglingChildReference(
                        f"parent {p['name']!r} references unknown child {name!r}"
                    )
                refs.append(child_pos[name])
            children_of.append(frozenset(refs))
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"malformed topology document: {exc}") from exc
    topo = NetworkTopology(tuple(parents), tuple(children), tuple(children_of))
    return topo, outcomes, settings


def load_topology(path) -> tuple[NetworkTopology, list[int], list[int]]:
    with open(path) as fh:
        return topology_from_dict(json.load(fh))
