"""User hierarchy: a partial order given by immediate-superior edges.

Users are numbered densely from 1 to ``user_count``. An edge
``(superior, subordinate)`` states immediate dominance; dominance proper is
the strict transitive closure of those edges. Trees and general DAGs (several
parents, several roots) are both accepted.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable


class HierarchyError(ValueError):
    """Raised for malformed or inconsistent hierarchy input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Hierarchy:
    user_count: int
    edges: frozenset[tuple[int, int]]
    _children: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)
    _parents: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)
    _below: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)
    _height: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = self.user_count
        if m < 1:
            raise HierarchyError(f"user count must be at least 1, got {m}")
        children: list[set[int]] = [set() for _ in range(m + 1)]
        parents: list[set[int]] = [set() for _ in range(m + 1)]
        for sup, sub in self.edges:
            for uid in (sup, sub):
                if not 1 <= uid <= m:
                    raise HierarchyError(f"user id {uid} out of range 1..{m}")
            if sup == sub:
                raise HierarchyError(f"self-edge on user {sup}")
            children[sup].add(sub)
            parents[sub].add(sup)

        sorter = graphlib.TopologicalSorter({u: children[u] for u in range(1, m + 1)})
        try:
            # children come out before parents
            order = list(sorter.static_order())
        except graphlib.CycleError as exc:
            cycle = " -> ".join(str(u) for u in exc.args[1])
            raise HierarchyError(f"cycle detected: {cycle}") from None

        below: list[frozenset[int]] = [frozenset()] * (m + 1)
        height = [0] * (m + 1)
        for u in order:
            acc: set[int] = set()
            for c in children[u]:
                acc.add(c)
                acc |= below[c]
                height[u] = max(height[u], height[c] + 1)
            below[u] = frozenset(acc)

        object.__setattr__(self, "_children", tuple(frozenset(c) for c in children))
        object.__setattr__(self, "_parents", tuple(frozenset(p) for p in parents))
        object.__setattr__(self, "_below", tuple(below))
        object.__setattr__(self, "_height", tuple(height))

    @classmethod
    def from_edges(cls, user_count: int, edges: Iterable[tuple[int, int]]) -> Hierarchy:
        edge_list = [(int(a), int(b)) for a, b in edges]
        seen: set[tuple[int, int]] = set()
        for e in edge_list:
            if e in seen:
                raise HierarchyError(f"duplicate edge {e[0]} -> {e[1]}")
            seen.add(e)
        return cls(user_count, frozenset(edge_list))

    @property
    def users(self) -> range:
        return range(1, self.user_count + 1)

    def check_user(self, uid: int) -> None:
        if not 1 <= uid <= self.user_count:
            raise HierarchyError(f"user id {uid} out of range 1..{self.user_count}")

    def subordinates(self, uid: int) -> frozenset[int]:
        """Immediate subordinates of ``uid``."""
        self.check_user(uid)
        return self._children[uid]

    def superiors(self, uid: int) -> frozenset[int]:
        """Immediate superiors of ``uid``."""
        self.check_user(uid)
        return self._parents[uid]

    def dominated_by(self, uid: int) -> frozenset[int]:
        """All users strictly below ``uid``."""
        self.check_user(uid)
        return self._below[uid]

    def dominators(self, uid: int) -> frozenset[int]:
        """All users strictly above ``uid``."""
        self.check_user(uid)
        return frozenset(a for a in self.users if uid in self._below[a])

    def leaves(self) -> list[int]:
        return [u for u in self.users if not self._children[u]]

    def is_tree(self) -> bool:
        """True when every user has at most one immediate superior."""
        return all(len(self._parents[u]) <= 1 for u in self.users)


def dominates(h: Hierarchy, i: int, j: int) -> bool:
    """Strict dominance ``u_i > u_j``; never true for ``i == j``."""
    h.check_user(j)
    return j in h.dominated_by(i)


def incomparable(h: Hierarchy, i: int, j: int) -> bool:
    if i == j:
        raise ValueError("incomparable() needs two distinct users")
    return not dominates(h, i, j) and not dominates(h, j, i)


def leaves_to_root_order(h: Hierarchy) -> list[int]:
    """Every user after all of its subordinates.

    Users are grouped by height (longest downward path to a leaf), so leaves
    come first, and ordered by id inside a group.
    """
    return sorted(h.users, key=lambda u: (h._height[u], u))


def parse_hierarchy(text: str) -> Hierarchy:
    user_count: int | None = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if user_count is None:
            if len(parts) != 2 or parts[0] != "users":
                raise HierarchyError("expected 'users <m>'", lineno)
            user_count = _parse_int(parts[1], lineno)
            if user_count < 1:
                raise HierarchyError("user count must be at least 1", lineno)
            continue
        if len(parts) != 3 or parts[0] != "edge":
            raise HierarchyError("expected 'edge <superior> <subordinate>'", lineno)
        sup, sub = _parse_int(parts[1], lineno), _parse_int(parts[2], lineno)
        for uid in (sup, sub):
            if not 1 <= uid <= user_count:
                raise HierarchyError(f"user id {uid} out of range 1..{user_count}", lineno)
        if sup == sub:
            raise HierarchyError(f"self-edge on user {sup}", lineno)
        if (sup, sub) in seen:
            raise HierarchyError(f"duplicate edge {sup} -> {sub}", lineno)
        seen.add((sup, sub))
        edges.append((sup, sub))
    if user_count is None:
        raise HierarchyError("missing 'users <m>' line")
    return Hierarchy(user_count, frozenset(edges))


def _parse_int(token: str, lineno: int) -> int:
    if not token.isdigit():
        raise HierarchyError(f"not a decimal id: {token!r}", lineno)
    return int(token)


def format_hierarchy(h: Hierarchy) -> str:
    lines = [f"users {h.user_count}"]
    lines += [f"edge {a} {b}" for a, b in sorted(h.edges)]
    return "\n".join(lines) + "\n"


def load_hierarchy(path: str | Path) -> Hierarchy:
    return parse_hierarchy(Path(path).read_text(encoding="utf-8"))
