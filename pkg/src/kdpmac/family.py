"""Block family construction and S-set building.

Each user owns a nonempty block of key-material indices. Blocks are pairwise
disjoint, so no block contains another. A user's S-set is its own block
joined with the S-sets of its immediate subordinates, built from the leaves
upward.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .hierarchy import Hierarchy, leaves_to_root_order

PAPER_SIZES = (2, 2, 1, 3, 2, 3, 2)
DEFAULT_BLOCK_SIZE = 2


class FamilyError(ValueError):
    pass


@dataclass(frozen=True)
class BlockFamily:
    ground_size: int
    blocks: tuple[frozenset[int], ...]

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], ground_size: int | None = None) -> BlockFamily:
        frozen = tuple(frozenset(b) for b in blocks)
        if ground_size is None:
            ground_size = max((max(b) for b in frozen if b), default=0)
        return cls(ground_size, frozen)

    @property
    def user_count(self) -> int:
        return len(self.blocks)

    def block(self, uid: int) -> frozenset[int]:
        return self.blocks[uid - 1]


@dataclass(frozen=True)
class FamilyReport:
    disjoint: bool
    nonempty: bool
    antichain: bool
    in_range: bool
    problems: tuple[str, ...] = field(default=())

    @property
    def valid(self) -> bool:
        return self.disjoint and self.nonempty and self.antichain and self.in_range


def parse_sizes(spec: str, user_count: int) -> list[int]:
    """Parse ``paper``, ``uniform:<b>`` or a comma list of block sizes."""
    spec = spec.strip()
    if spec == "paper":
        sizes = list(PAPER_SIZES)
    elif spec.startswith("uniform:"):
        try:
            b = int(spec.split(":", 1)[1])
        except ValueError:
            raise FamilyError(f"bad uniform size in {spec!r}") from None
        sizes = [b] * user_count
    else:
        try:
            sizes = [int(tok) for tok in spec.split(",")]
        except ValueError:
            raise FamilyError(f"bad size list {spec!r}") from None
    if len(sizes) != user_count:
        raise FamilyError(f"{len(sizes)} block sizes given for {user_count} users")
    return sizes


def build_block_family(m: int, sizes: Sequence[int] | None = None) -> BlockFamily:
    """Assign contiguous index runs to users 1..m in id order."""
    if sizes is None:
        sizes = [DEFAULT_BLOCK_SIZE] * m
    if len(sizes) != m:
        raise FamilyError(f"{len(sizes)} block sizes given for {m} users")
    blocks = []
    nxt = 1
    for uid, size in enumerate(sizes, start=1):
        if size < 1:
            raise FamilyError(f"block size for user {uid} must be positive, got {size}")
        blocks.append(frozenset(range(nxt, nxt + size)))
        nxt += size
    return BlockFamily(nxt - 1, tuple(blocks))


def validate_family(family: BlockFamily) -> FamilyReport:
    problems = []
    nonempty = True
    for uid, b in enumerate(family.blocks, start=1):
        if not b:
            nonempty = False
            problems.append(f"block {uid} is empty")
    in_range = True
    for uid, b in enumerate(family.blocks, start=1):
        bad = sorted(x for x in b if not 1 <= x <= family.ground_size)
        if bad:
            in_range = False
            problems.append(f"block {uid} has indices outside 1..{family.ground_size}: {bad}")
    disjoint = True
    antichain = True
    indexed = list(enumerate(family.blocks, start=1))
    for (a, ba), (b, bb) in combinations(indexed, 2):
        if ba & bb:
            disjoint = False
            problems.append(f"blocks {a} and {b} overlap")
        # checked on its own, not inferred from disjointness
        if ba <= bb:
            antichain = False
            problems.append(f"block {a} is contained in block {b}")
        elif bb <= ba:
            antichain = False
            problems.append(f"block {b} is contained in block {a}")
    return FamilyReport(disjoint, nonempty, antichain, in_range, tuple(problems))


@dataclass(frozen=True)
class SSetTable:
    ssets: tuple[frozenset[int], ...]

    @property
    def user_count(self) -> int:
        return len(self.ssets)

    def of(self, uid: int) -> frozenset[int]:
        if not 1 <= uid <= len(self.ssets):
            raise FamilyError(f"user id {uid} out of range 1..{len(self.ssets)}")
        return self.ssets[uid - 1]

    def total_size(self) -> int:
        return sum(len(s) for s in self.ssets)


def build_ssets(h: Hierarchy, family: BlockFamily, order: Sequence[int] | None = None) -> SSetTable:
    """Build S-sets bottom-up.

    ``order`` may override the traversal; it must list every user after all
    of its subordinates.
    """
    if family.user_count != h.user_count:
        raise FamilyError(
            f"family has {family.user_count} blocks for {h.user_count} users"
        )
    if order is None:
        order = leaves_to_root_order(h)
    if sorted(order) != list(h.users):
        raise FamilyError("traversal order must list every user exactly once")
    done: dict[int, frozenset[int]] = {}
    for u in order:
        acc = set(family.block(u))
        for c in h.subordinates(u):
            if c not in done:
                raise FamilyError(f"user {u} visited before its subordinate {c}")
            acc |= done[c]
        done[u] = frozenset(acc)
    return SSetTable(tuple(done[u] for u in h.users))


def format_index_set(indices: Iterable[int]) -> str:
    items = sorted(indices)
    return ",".join(str(x) for x in items) if items else "-"


def parse_index_set(text: str) -> frozenset[int]:
    text = text.strip()
    if text == "-":
        return frozenset()
    try:
        values = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise FamilyError(f"bad index list {text!r}") from None
    if any(v < 1 for v in values):
        raise FamilyError(f"index list {text!r} has non-positive entries")
    return frozenset(values)


def format_sset_table(family: BlockFamily, ssets: SSetTable) -> str:
    lines = [f"users {ssets.user_count}", f"ground {family.ground_size}"]
    lines += [f"block {u} {format_index_set(b)}" for u, b in enumerate(family.blocks, start=1)]
    lines += [f"sset {u} {format_index_set(s)}" for u, s in enumerate(ssets.ssets, start=1)]
    return "\n".join(lines) + "\n"


def parse_sset_table(text: str) -> tuple[BlockFamily, SSetTable]:
    header: dict[str, int] = {}
    blocks: dict[int, frozenset[int]] = {}
    ssets: dict[int, frozenset[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] in ("users", "ground") and len(parts) == 2:
                header[parts[0]] = int(parts[1])
            elif parts[0] in ("block", "sset") and len(parts) == 3:
                target = blocks if parts[0] == "block" else ssets
                target[int(parts[1])] = parse_index_set(parts[2])
            else:
                raise FamilyError(f"unrecognised line {line!r}")
        except ValueError as exc:
            raise FamilyError(f"line {lineno}: {exc}") from None
    if "users" not in header or "ground" not in header:
        raise FamilyError("missing 'users' or 'ground' header")
    m = header["users"]
    want = set(range(1, m + 1))
    if set(blocks) != want or set(ssets) != want:
        raise FamilyError(f"expected one block and one sset line per user 1..{m}")
    family = BlockFamily(header["ground"], tuple(blocks[u] for u in range(1, m + 1)))
    return family, SSetTable(tuple(ssets[u] for u in range(1, m + 1)))
