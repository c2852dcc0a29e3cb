"""End-to-end generation: hierarchy and block sizes in, keys and bundles out."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .family import BlockFamily, FamilyError, SSetTable, build_block_family, build_ssets, validate_family
from .hierarchy import Hierarchy
from .keyderive import (
    DEFAULT_KEY_LEN,
    KeyMaterial,
    KeyMatrix,
    MaterialError,
    Rule,
    derive_screened,
    key_matrix,
)


@dataclass(frozen=True)
class Scheme:
    hierarchy: Hierarchy
    family: BlockFamily
    ssets: SSetTable
    material: KeyMaterial
    matrix: KeyMatrix
    rule: Rule
    retries: int = 0

    @property
    def material_size(self) -> int:
        return self.family.ground_size


def build_scheme(
    h: Hierarchy,
    sizes: Sequence[int] | None = None,
    key_len: int = DEFAULT_KEY_LEN,
    seed: bytes = b"\x00",
    rule: Rule = Rule.CONTAINMENT,
    material: KeyMaterial | None = None,
) -> Scheme:
    """Run the whole derivation.

    Passing ``material`` skips generation (and the reseeding retries); a zero
    collision against fixed material is raised as-is.
    """
    family = build_block_family(h.user_count, sizes)
    report = validate_family(family)
    if not report.valid:
        raise FamilyError("; ".join(report.problems))
    ssets = build_ssets(h, family)
    if material is None:
        material, matrix, retries = derive_screened(family.ground_size, key_len, seed, ssets, rule)
    else:
        if material.size != family.ground_size:
            raise MaterialError(
                f"material has {material.size} elements, family needs {family.ground_size}"
            )
        matrix, retries = key_matrix(material, ssets, rule), 0
    return Scheme(h, family, ssets, material, matrix, rule, retries)
