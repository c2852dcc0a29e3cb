"""The published seven-user worked example, as fixed data.

``PRINTED_KEYS`` and ``PRINTED_DELTAS`` are transcribed exactly as printed,
mistakes included: k36 and k37 do not match the XOR of their listed
elements, and the printed delta for (1, 4) drops index 5 (which then carries
into k14). ``errata()`` finds these by recomputation instead of listing them.
"""

from __future__ import annotations

from importlib import resources

from .family import PAPER_SIZES, SSetTable
from .hierarchy import Hierarchy, parse_hierarchy
from .keyderive import KeyMaterial, KeyMatrix, delta_set, material_from_bits
from .verifier import Erratum

MATERIAL_BITS = (
    "00100100", "10101010", "01010101", "11011011", "11101110",
    "00010001", "10010010", "10110110", "00011000", "11101110",
    "10111001", "11100111", "00101101", "11010010", "01111111",
)

SIZES = PAPER_SIZES

# (i, j) -> printed bits; every other pair is printed as 0
PRINTED_KEYS = {
    (1, 2): "10111110",
    (1, 3): "11000011",
    (1, 4): "00101000",
    (1, 5): "00000101",
    (1, 6): "10000000",
    (1, 7): "01011110",
    (2, 4): "01111000",
    (2, 5): "10111011",
    (3, 6): "01100011",
    (3, 7): "10011111",
}

# (i, j) -> printed index set; every other pair is printed as empty
PRINTED_DELTAS = {
    (1, 2): {1, 2, 5, 11, 12, 13, 14, 15},
    (1, 3): {1, 2, 3, 4, 6, 7, 8, 9, 10},
    (1, 4): {1, 2, 3, 4, 9, 10, 11, 12, 13, 14, 15},
    (1, 5): {1, 2, 3, 4, 5, 6, 7, 8, 11, 12, 13, 14, 15},
    (1, 6): {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 14, 15},
    (1, 7): {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13},
    (2, 4): {3, 4, 9, 10},
    (2, 5): {3, 4, 6, 7, 8},
    (3, 6): {5, 14, 15},
    (3, 7): {5, 11, 12, 13},
}

PRINTED_SSETS = {
    1: set(range(1, 16)),
    2: {3, 4, 6, 7, 8, 9, 10},
    3: {5, 11, 12, 13, 14, 15},
    4: {6, 7, 8},
    5: {9, 10},
    6: {11, 12, 13},
    7: {14, 15},
}


def fig1_text() -> str:
    return resources.files("kdpmac").joinpath("data/fig1.hier").read_text(encoding="utf-8")


def fig1_hierarchy() -> Hierarchy:
    return parse_hierarchy(fig1_text())


def material() -> KeyMaterial:
    return material_from_bits(MATERIAL_BITS)


def bits(key: bytes) -> str:
    return "".join(format(b, "08b") for b in key)


def printed_key(i: int, j: int) -> str:
    return PRINTED_KEYS.get((i, j), "00000000")


def printed_delta(i: int, j: int) -> frozenset[int]:
    return frozenset(PRINTED_DELTAS.get((i, j), ()))


def _fmt(indices) -> str:
    return "{" + ",".join(map(str, sorted(indices))) + "}"


def errata(km: KeyMatrix, ssets: SSetTable | None = None) -> list[Erratum]:
    """Printed entries that disagree with recomputation.

    Delta sets are compared too when ``ssets`` is given.
    """
    out = []
    for i in range(1, km.user_count + 1):
        for j in range(1, km.user_count + 1):
            if i == j:
                continue
            if ssets is not None:
                d = delta_set(ssets, i, j, km.rule)
                if d != printed_delta(i, j):
                    out.append(Erratum(f"dS{i}{j}", _fmt(d), _fmt(printed_delta(i, j))))
            derived = bits(km.key(i, j))
            if derived != printed_key(i, j):
                out.append(Erratum(f"k{i}{j}", derived, printed_key(i, j)))
    return out
