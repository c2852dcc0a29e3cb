"""Independent policy check for generated key matrices.

The allowed-channel policy is recomputed by breadth-first search over the raw
edge list, without touching S-sets or the hierarchy's cached closure, and then
compared entry by entry against the key matrix.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Literal

from .family import SSetTable
from .hierarchy import Hierarchy
from .keyderive import KeyMatrix, Rule, ZeroKeyCollision, is_zero_key
from .provisioning import derive_receive_key, make_bundles
from .scheme import build_scheme

FORBIDDEN_HAS_KEY = "forbidden-channel-has-key"
ALLOWED_KEY_ZERO = "allowed-channel-key-zero"

# random hierarchy generation
DAG_EXTRA_EDGE_PROB = 0.08
MIN_BLOCK_SIZE, MAX_BLOCK_SIZE = 1, 3
RANDOM_KEY_LEN = 16

Shape = Literal["tree", "dag"]


class VerificationError(ValueError):
    pass


@dataclass(frozen=True)
class PolicyMatrix:
    """``allowed[i-1][j-1]``: may user j send to user i."""

    allowed: tuple[tuple[bool, ...], ...]

    @property
    def user_count(self) -> int:
        return len(self.allowed)

    def __call__(self, i: int, j: int) -> bool:
        return self.allowed[i - 1][j - 1]

    def allowed_pairs(self) -> list[tuple[int, int]]:
        m = self.user_count
        return [(i, j) for i in range(1, m + 1) for j in range(1, m + 1) if self.allowed[i - 1][j - 1]]


@dataclass(frozen=True)
class Violation:
    i: int
    j: int
    kind: str


@dataclass(frozen=True)
class Erratum:
    entry: str
    recomputed: str
    printed: str


@dataclass
class VerificationReport:
    violations: list[Violation]
    rule_used: Rule
    user_count: int
    allowed_channels: int
    nonzero_keys: int
    material_size: int | None = None
    sset_size_total: int | None = None
    errata: list[Erratum] = field(default_factory=list)

    @property
    def policy_match(self) -> bool:
        return not self.violations

    def format(self) -> str:
        def opt(v: int | None) -> str:
            return "-" if v is None else str(v)

        lines = [
            f"policy_match: {'true' if self.policy_match else 'false'}",
            f"rule: {self.rule_used.value}",
            f"users: {self.user_count}",
            f"allowed_channels: {self.allowed_channels}",
            f"nonzero_keys: {self.nonzero_keys}",
            f"material_size: {opt(self.material_size)}",
            f"sset_size_total: {opt(self.sset_size_total)}",
            f"violations: {len(self.violations)}",
            f"errata: {len(self.errata)}",
            "[violations]",
        ]
        lines += [f"{v.i} {v.j} {v.kind}" for v in self.violations]
        lines.append("[errata]")
        lines += [f"{e.entry} recomputed={e.recomputed} printed={e.printed}" for e in self.errata]
        return "\n".join(lines) + "\n"


def policy_matrix(h: Hierarchy) -> PolicyMatrix:
    m = h.user_count
    adj: dict[int, list[int]] = {u: [] for u in range(1, m + 1)}
    for sup, sub in h.edges:
        adj[sup].append(sub)
    rows = []
    for i in range(1, m + 1):
        reach = set()
        queue = deque(adj[i])
        while queue:
            v = queue.popleft()
            if v not in reach:
                reach.add(v)
                queue.extend(adj[v])
        rows.append(tuple(j in reach and j != i for j in range(1, m + 1)))
    return PolicyMatrix(tuple(rows))


def verify_scheme(
    km: KeyMatrix,
    pm: PolicyMatrix,
    material_size: int | None = None,
    ssets: SSetTable | None = None,
    errata: list[Erratum] | None = None,
) -> VerificationReport:
    m = km.user_count
    if pm.user_count != m:
        raise VerificationError(f"key matrix has {m} users, policy has {pm.user_count}")
    violations = []
    nonzero = 0
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            has_key = not is_zero_key(km.key(i, j))
            nonzero += has_key
            if has_key and not pm(i, j):
                violations.append(Violation(i, j, FORBIDDEN_HAS_KEY))
            elif pm(i, j) and not has_key:
                violations.append(Violation(i, j, ALLOWED_KEY_ZERO))
    return VerificationReport(
        violations=violations,
        rule_used=km.rule,
        user_count=m,
        allowed_channels=len(pm.allowed_pairs()),
        nonzero_keys=nonzero,
        material_size=material_size,
        sset_size_total=ssets.total_size() if ssets is not None else None,
        errata=list(errata or []),
    )


def random_hierarchy(rng: random.Random, m: int, shape: Shape) -> Hierarchy:
    """Random tree or DAG on users 1..m.

    Trees: each user k > 1 gets a superior drawn uniformly from 1..k-1.
    DAGs: the same tree spine plus every other forward pair a -> b (a < b)
    added independently with probability ``DAG_EXTRA_EDGE_PROB``.
    """
    edges = {(rng.randint(1, k - 1), k) for k in range(2, m + 1)}
    if shape == "dag":
        for b in range(2, m + 1):
            for a in range(1, b):
                if (a, b) not in edges and rng.random() < DAG_EXTRA_EDGE_PROB:
                    edges.add((a, b))
    elif shape != "tree":
        raise ValueError(f"unknown shape {shape!r}")
    return Hierarchy(m, frozenset(edges))


@dataclass
class Counterexample:
    trial: int
    hierarchy: Hierarchy
    sizes: list[int]
    violations: list[Violation]
    problem: str = ""


@dataclass
class AggregateReport:
    shape: str
    rule: Rule
    trials: int
    passed: int
    first_counterexample: Counterexample | None = None

    @property
    def all_passed(self) -> bool:
        return self.passed == self.trials

    def format(self) -> str:
        lines = [
            f"shape: {self.shape}",
            f"rule: {self.rule.value}",
            f"trials: {self.trials}",
            f"passed: {self.passed}",
        ]
        cx = self.first_counterexample
        if cx is not None:
            lines.append(f"counterexample_trial: {cx.trial}")
            if cx.problem:
                lines.append(f"counterexample_problem: {cx.problem}")
            lines.append(f"counterexample_users: {cx.hierarchy.user_count}")
            lines.append(
                "counterexample_edges: "
                + " ".join(f"{a}>{b}" for a, b in sorted(cx.hierarchy.edges))
            )
            lines.append("counterexample_sizes: " + ",".join(map(str, cx.sizes)))
            lines += [f"violation {v.i} {v.j} {v.kind}" for v in cx.violations]
        return "\n".join(lines) + "\n"


def check_instance(
    h: Hierarchy, sizes: list[int], seed: bytes, rule: Rule, key_len: int = RANDOM_KEY_LEN
) -> tuple[list[Violation], str]:
    """Run the full pipeline on one instance.

    Returns policy violations plus a description of any other failure
    (receiver/KDC disagreement or collision exhaustion); both empty on success.
    """
    try:
        scheme = build_scheme(h, sizes, key_len=key_len, seed=seed, rule=rule)
    except ZeroKeyCollision as exc:
        return [], f"zero-key collision exhaustion at {exc.pair}"
    report = verify_scheme(scheme.matrix, policy_matrix(h))
    if report.violations:
        return report.violations, ""
    bundles = make_bundles(h, scheme.family, scheme.ssets, scheme.material, scheme.matrix)
    for b in bundles:
        for j in h.users:
            if derive_receive_key(b, scheme.ssets, j, rule) != scheme.matrix.key(b.user, j):
                return [], f"receiver {b.user} disagrees with the matrix on channel from {j}"
    return [], ""


def random_instance_check(
    m_max: int,
    trials: int,
    seed: int,
    shape: Shape = "tree",
    rule: Rule = Rule.CONTAINMENT,
) -> AggregateReport:
    if m_max < 1 or trials < 1:
        raise ValueError("need m_max >= 1 and trials >= 1")
    rng = random.Random(seed)
    passed = 0
    first = None
    for t in range(trials):
        m = rng.randint(1, m_max)
        h = random_hierarchy(rng, m, shape)
        sizes = [rng.randint(MIN_BLOCK_SIZE, MAX_BLOCK_SIZE) for _ in range(m)]
        material_seed = rng.randbytes(8)
        violations, problem = check_instance(h, sizes, material_seed, rule)
        if violations or problem:
            if first is None:
                first = Counterexample(t, h, sizes, violations, problem)
        else:
            passed += 1
    return AggregateReport(shape, rule, trials, passed, first)
