"""Key material, delta sets and directed pair keys.

The key for the channel from user j to user i is the XOR of the material
elements indexed by the delta set of (i, j). An all-zero key means the channel
does not exist.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

from .family import SSetTable

DEFAULT_KEY_LEN = 16
MAX_SEED_RETRIES = 16


class Rule(str, enum.Enum):
    CONTAINMENT = "containment"
    INTERSECTION = "intersection"


class MaterialError(ValueError):
    """Invalid key material or matrix input."""


class ZeroKeyCollision(RuntimeError):
    """An allowed channel folded to the all-zero sentinel."""

    def __init__(self, i: int, j: int):
        self.pair = (i, j)
        super().__init__(f"allowed channel ({i},{j}) derived an all-zero key")


@dataclass(frozen=True)
class KeyMaterial:
    element_len: int
    elements: tuple[bytes, ...]

    def __post_init__(self) -> None:
        if self.element_len < 1:
            raise MaterialError("element length must be at least 1")
        for idx, e in enumerate(self.elements, start=1):
            if len(e) != self.element_len:
                raise MaterialError(
                    f"element {idx} has {len(e)} bytes, expected {self.element_len}"
                )

    @property
    def size(self) -> int:
        return len(self.elements)

    def element(self, index: int) -> bytes:
        if not 1 <= index <= len(self.elements):
            raise MaterialError(f"material index {index} out of range 1..{len(self.elements)}")
        return self.elements[index - 1]


def generate_key_material(n: int, element_len: int, seed: bytes) -> KeyMaterial:
    """Expand ``seed`` into ``n`` nonzero elements of ``element_len`` bytes.

    Element ``l`` is SHAKE-256 over ``b"kdpmac-material" || seed || l || c``
    (``l`` and the counter ``c`` as 4-byte big-endian), truncated to
    ``element_len`` bytes; ``c`` starts at 0 and is bumped while the output is
    all zero.
    """
    if n < 1 or element_len < 1:
        raise MaterialError("need n >= 1 and element_len >= 1")
    if not seed:
        raise MaterialError("seed must be nonempty")
    elements = []
    for index in range(1, n + 1):
        counter = 0
        while True:
            h = hashlib.shake_256(b"kdpmac-material" + seed)
            h.update(index.to_bytes(4, "big") + counter.to_bytes(4, "big"))
            out = h.digest(element_len)
            if any(out):
                break
            counter += 1
        elements.append(out)
    return KeyMaterial(element_len, tuple(elements))


def delta_set(ssets: SSetTable, i: int, j: int, rule: Rule = Rule.CONTAINMENT) -> frozenset[int]:
    """Indices whose XOR gives the key for the channel from j to i."""
    si, sj = ssets.of(i), ssets.of(j)
    if rule is Rule.CONTAINMENT:
        return si - sj if sj < si else frozenset()
    if rule is Rule.INTERSECTION:
        return si - sj if si & sj else frozenset()
    raise ValueError(f"unknown rule {rule!r}")


def xor_fold(elements: Iterable[bytes], length: int) -> bytes:
    acc = 0
    for e in elements:
        acc ^= int.from_bytes(e, "big")
    return acc.to_bytes(length, "big")


def pair_key(material: KeyMaterial, delta: Iterable[int]) -> bytes:
    return xor_fold((material.element(x) for x in delta), material.element_len)


def is_zero_key(key: bytes) -> bool:
    return not any(key)


@dataclass(frozen=True)
class KeyMatrix:
    """``keys[i-1][j-1]`` is the key of the channel from user j to user i."""

    element_len: int
    keys: tuple[tuple[bytes, ...], ...]
    rule: Rule = Rule.CONTAINMENT

    @property
    def user_count(self) -> int:
        return len(self.keys)

    def key(self, i: int, j: int) -> bytes:
        m = len(self.keys)
        if not (1 <= i <= m and 1 <= j <= m):
            raise MaterialError(f"pair ({i},{j}) out of range for {m} users")
        return self.keys[i - 1][j - 1]

    def nonzero(self, i: int, j: int) -> bool:
        return not is_zero_key(self.key(i, j))

    def nonzero_pairs(self) -> list[tuple[int, int]]:
        m = len(self.keys)
        return [
            (i, j)
            for i in range(1, m + 1)
            for j in range(1, m + 1)
            if any(self.keys[i - 1][j - 1])
        ]

    def replace(self, i: int, j: int, key: bytes) -> KeyMatrix:
        """Copy with one entry swapped out."""
        if len(key) != self.element_len:
            raise MaterialError(f"key has {len(key)} bytes, expected {self.element_len}")
        rows = [list(r) for r in self.keys]
        rows[i - 1][j - 1] = key
        return KeyMatrix(self.element_len, tuple(tuple(r) for r in rows), self.rule)


def key_matrix(
    material: KeyMaterial,
    ssets: SSetTable,
    rule: Rule = Rule.CONTAINMENT,
    screen: bool = True,
) -> KeyMatrix:
    """Derive every directed pair key.

    With ``screen`` on, a nonempty delta folding to zero raises
    ``ZeroKeyCollision`` so the zero sentinel stays unambiguous.
    """
    union = frozenset().union(*ssets.ssets)
    if union and max(union) > material.size:
        raise MaterialError(
            f"S-sets reference index {max(union)} but material has {material.size} elements"
        )
    m = ssets.user_count
    rows = []
    for i in range(1, m + 1):
        row = []
        for j in range(1, m + 1):
            delta = delta_set(ssets, i, j, rule)
            k = pair_key(material, delta)
            if screen and delta and is_zero_key(k):
                raise ZeroKeyCollision(i, j)
            row.append(k)
        rows.append(tuple(row))
    return KeyMatrix(material.element_len, tuple(rows), rule)


def retry_seed(seed: bytes, attempt: int) -> bytes:
    """Seed for the ``attempt``-th regeneration; attempt 0 is the seed itself."""
    return seed if attempt == 0 else seed + attempt.to_bytes(1, "big")


def derive_screened(
    n: int,
    element_len: int,
    seed: bytes,
    ssets: SSetTable,
    rule: Rule = Rule.CONTAINMENT,
    max_retries: int = MAX_SEED_RETRIES,
) -> tuple[KeyMaterial, KeyMatrix, int]:
    """Generate material and matrix, regenerating on zero-key collisions.

    Returns the material, the matrix and the number of retries used.
    """
    last: ZeroKeyCollision | None = None
    for attempt in range(max_retries + 1):
        material = generate_key_material(n, element_len, retry_seed(seed, attempt))
        try:
            return material, key_matrix(material, ssets, rule), attempt
        except ZeroKeyCollision as exc:
            last = exc
    assert last is not None
    raise last


def format_key_matrix(km: KeyMatrix) -> str:
    m = km.user_count
    lines = [f"users {m}", f"keylen {km.element_len}", f"rule {km.rule.value}"]
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            lines.append(f"key {i} {j} {km.key(i, j).hex()}")
    return "\n".join(lines) + "\n"


def parse_key_matrix(text: str) -> KeyMatrix:
    header: dict[str, str] = {}
    entries: dict[tuple[int, int], bytes] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] in ("users", "keylen", "rule") and len(parts) == 2:
            header[parts[0]] = parts[1]
        elif parts[0] == "key" and len(parts) == 4:
            try:
                i, j = int(parts[1]), int(parts[2])
                key = bytes.fromhex(parts[3])
            except ValueError:
                raise MaterialError(f"line {lineno}: malformed key entry") from None
            if (i, j) in entries:
                raise MaterialError(f"line {lineno}: duplicate entry ({i},{j})")
            entries[(i, j)] = key
        else:
            raise MaterialError(f"line {lineno}: unrecognised line {line!r}")
    try:
        m, length = int(header["users"]), int(header["keylen"])
        rule = Rule(header.get("rule", Rule.CONTAINMENT.value))
    except (KeyError, ValueError) as exc:
        raise MaterialError(f"bad or missing header field: {exc}") from None
    rows = []
    for i in range(1, m + 1):
        row = []
        for j in range(1, m + 1):
            if (i, j) not in entries:
                raise MaterialError(f"missing entry ({i},{j})")
            k = entries[(i, j)]
            if len(k) != length:
                raise MaterialError(f"entry ({i},{j}) has {len(k)} bytes, expected {length}")
            row.append(k)
        rows.append(tuple(row))
    if len(entries) != m * m:
        raise MaterialError("entries outside the declared user range")
    return KeyMatrix(length, tuple(rows), rule)


def material_from_bits(bit_strings: Sequence[str]) -> KeyMaterial:
    """One-byte material from strings like ``"00100100"``."""
    return KeyMaterial(1, tuple(bytes([int(b, 2)]) for b in bit_strings))
