"""Distribution-center side: per-user bundles and their file format.

A bundle carries the user's public S-set, the private material elements
indexed by it, and the keys for every channel the user may send on. Receive
keys are never stored; the receiver derives them from its own material.

Senders get their keys handed over explicitly because the delta set of an
upward channel lies entirely outside the sender's S-set.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .family import BlockFamily, SSetTable, format_index_set, parse_index_set
from .hierarchy import Hierarchy
from .keyderive import KeyMaterial, KeyMatrix, Rule, delta_set, is_zero_key, xor_fold


class BundleError(ValueError):
    pass


@dataclass(frozen=True)
class UserBundle:
    user: int
    sset: frozenset[int]
    material: dict[int, bytes] = field(hash=False)
    send_keys: dict[int, bytes] = field(hash=False)
    element_len: int

    def __post_init__(self) -> None:
        if self.user < 1:
            raise BundleError(f"bad user id {self.user}")
        if self.element_len < 1:
            raise BundleError("key length must be at least 1")
        if set(self.material) != set(self.sset):
            raise BundleError(f"bundle {self.user}: material indices differ from S-set")
        for idx, e in self.material.items():
            if len(e) != self.element_len:
                raise BundleError(
                    f"bundle {self.user}: material {idx} has {len(e)} bytes, expected {self.element_len}"
                )
        for a, k in self.send_keys.items():
            if len(k) != self.element_len:
                raise BundleError(
                    f"bundle {self.user}: send key for {a} has {len(k)} bytes, expected {self.element_len}"
                )
            if is_zero_key(k):
                raise BundleError(f"bundle {self.user}: zero send key for {a}")
            if a == self.user:
                raise BundleError(f"bundle {self.user}: send key addressed to itself")


def make_bundles(
    h: Hierarchy,
    family: BlockFamily,
    ssets: SSetTable,
    material: KeyMaterial,
    km: KeyMatrix,
) -> list[UserBundle]:
    m = h.user_count
    if not (family.user_count == ssets.user_count == km.user_count == m):
        raise BundleError("hierarchy, family, S-sets and key matrix disagree on user count")
    if material.size != family.ground_size:
        raise BundleError("material size differs from the family ground set")
    if material.element_len != km.element_len:
        raise BundleError("material and key matrix disagree on key length")
    bundles = []
    for u in h.users:
        s = ssets.of(u)
        send = {}
        for a in sorted(h.dominators(u)):
            k = km.key(a, u)
            if is_zero_key(k):
                raise BundleError(f"allowed channel {u}->{a} has a zero key")
            send[a] = k
        bundles.append(
            UserBundle(
                user=u,
                sset=s,
                material={x: material.element(x) for x in sorted(s)},
                send_keys=send,
                element_len=material.element_len,
            )
        )
    return bundles


def derive_receive_key(b: UserBundle, ssets: SSetTable, j: int, rule: Rule = Rule.CONTAINMENT) -> bytes:
    """Key for the channel from ``j`` into ``b.user``, from the bundle's material only."""
    if ssets.of(b.user) != b.sset:
        raise BundleError(f"bundle {b.user}: S-set differs from the public table")
    delta = delta_set(ssets, b.user, j, rule)
    missing = sorted(x for x in delta if x not in b.material)
    if missing:
        raise BundleError(f"bundle {b.user}: material missing indices {missing}")
    return xor_fold((b.material[x] for x in delta), b.element_len)


def format_bundle(b: UserBundle) -> str:
    lines = [f"bundle {b.user}", f"keylen {b.element_len}", f"sset {format_index_set(b.sset)}"]
    lines += [f"material {x} {b.material[x].hex()}" for x in sorted(b.material)]
    lines += [f"sendkey {a} {b.send_keys[a].hex()}" for a in sorted(b.send_keys)]
    return "\n".join(lines) + "\n"


def parse_bundle(text: str) -> UserBundle:
    user = keylen = None
    sset: frozenset[int] | None = None
    material: dict[int, bytes] = {}
    send: dict[int, bytes] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, *rest = line.split()
        try:
            if tag == "bundle" and len(rest) == 1:
                user = int(rest[0])
            elif tag == "keylen" and len(rest) == 1:
                keylen = int(rest[0])
            elif tag == "sset" and len(rest) == 1:
                sset = parse_index_set(rest[0])
            elif tag in ("material", "sendkey") and len(rest) == 2:
                idx = int(rest[0])
                target = material if tag == "material" else send
                if idx in target:
                    raise BundleError(f"line {lineno}: duplicate {tag} {idx}")
                target[idx] = _hex(rest[1], keylen, lineno)
            else:
                raise BundleError(f"line {lineno}: unrecognised line {line!r}")
        except ValueError as exc:
            if isinstance(exc, BundleError):
                raise
            raise BundleError(f"line {lineno}: {exc}") from None
    for name, val in (("bundle", user), ("keylen", keylen), ("sset", sset)):
        if val is None:
            raise BundleError(f"missing '{name}' line")
    return UserBundle(user, sset, material, send, keylen)


def _hex(token: str, keylen: int | None, lineno: int) -> bytes:
    if keylen is None:
        raise BundleError(f"line {lineno}: key material before 'keylen'")
    if len(token) != 2 * keylen or token != token.lower():
        raise BundleError(
            f"line {lineno}: expected {2 * keylen} lowercase hex digits, got {len(token)}"
        )
    try:
        return bytes.fromhex(token)
    except ValueError:
        raise BundleError(f"line {lineno}: bad hex {token!r}") from None


def write_bundle(b: UserBundle, destination: str | Path | IO[str]) -> None:
    text = format_bundle(b)
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text, encoding="utf-8")
    else:
        destination.write(text)


def read_bundle(source: str | Path | IO[str]) -> UserBundle:
    if isinstance(source, (str, Path)):
        return parse_bundle(Path(source).read_text(encoding="utf-8"))
    return parse_bundle(source.read())


def bundle_filename(uid: int) -> str:
    return f"user-{uid}.bundle"


def roundtrip(b: UserBundle) -> UserBundle:
    buf = io.StringIO()
    write_bundle(b, buf)
    buf.seek(0)
    return read_bundle(buf)


def check_bundles(bundles: Iterable[UserBundle], h: Hierarchy) -> None:
    """Raise unless every bundle stores send keys for exactly its dominators."""
    for b in bundles:
        expected = h.dominators(b.user)
        if set(b.send_keys) != expected:
            raise BundleError(
                f"bundle {b.user}: send keys for {sorted(b.send_keys)}, expected {sorted(expected)}"
            )
