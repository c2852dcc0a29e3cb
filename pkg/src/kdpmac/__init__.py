"""Key pre-distribution for hierarchical mandatory access control."""

from .family import BlockFamily, SSetTable, build_block_family, build_ssets, validate_family
from .hierarchy import Hierarchy, dominates, incomparable, leaves_to_root_order, parse_hierarchy
from .keyderive import KeyMaterial, KeyMatrix, Rule, delta_set, generate_key_material, key_matrix, pair_key
from .provisioning import UserBundle, derive_receive_key, make_bundles, read_bundle, write_bundle
from .scheme import Scheme, build_scheme
from .simulator import decrypt, encrypt, run_scenario
from .verifier import policy_matrix, random_instance_check, verify_scheme

__all__ = [
    "BlockFamily", "Hierarchy", "KeyMaterial", "KeyMatrix", "Rule", "SSetTable", "Scheme",
    "UserBundle", "build_block_family", "build_scheme", "build_ssets", "decrypt", "delta_set",
    "derive_receive_key", "dominates", "encrypt", "generate_key_material", "incomparable",
    "key_matrix", "leaves_to_root_order", "make_bundles", "pair_key", "parse_hierarchy",
    "policy_matrix", "random_instance_check", "read_bundle", "run_scenario", "validate_family",
    "verify_scheme", "write_bundle",
]
