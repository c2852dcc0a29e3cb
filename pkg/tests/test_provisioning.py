import io

import pytest
from hypothesis import given, strategies as st

from kdpmac import example
from kdpmac.family import build_block_family
from kdpmac.hierarchy import Hierarchy, dominates
from kdpmac.keyderive import Rule
from kdpmac.provisioning import (
    BundleError,
    UserBundle,
    check_bundles,
    derive_receive_key,
    format_bundle,
    make_bundles,
    parse_bundle,
    read_bundle,
    roundtrip,
    write_bundle,
)
from kdpmac.scheme import build_scheme

from .conftest import schemes


def test_user4_bundle(paper_bundles, paper_scheme):
    b4 = paper_bundles[3]
    assert b4.user == 4
    assert b4.sset == {6, 7, 8}
    assert {i: example.bits(v) for i, v in b4.material.items()} == {
        6: "00010001", 7: "10010010", 8: "10110110",
    }
    assert set(b4.send_keys) == {1, 2}
    assert example.bits(b4.send_keys[2]) == "01111000"
    assert b4.send_keys[1] == paper_scheme.matrix.key(1, 4)


def test_root_has_no_send_keys(paper_bundles):
    assert paper_bundles[0].send_keys == {}
    assert len(paper_bundles[0].material) == 15


def test_single_user_bundle():
    s = build_scheme(Hierarchy(1, frozenset()), [2], key_len=4, seed=b"a")
    (b,) = make_bundles(s.hierarchy, s.family, s.ssets, s.material, s.matrix)
    assert b.sset == s.family.block(1) and b.send_keys == {}


def test_make_bundles_rejects_inconsistent_inputs(paper_scheme):
    s = paper_scheme
    with pytest.raises(BundleError):
        make_bundles(s.hierarchy, build_block_family(6), s.ssets, s.material, s.matrix)
    with pytest.raises(BundleError, match="zero key"):
        make_bundles(s.hierarchy, s.family, s.ssets, s.material, s.matrix.replace(2, 4, b"\x00"))


def test_receive_keys_from_bundle(paper_bundles, paper_scheme):
    b2 = paper_bundles[1]
    assert example.bits(derive_receive_key(b2, paper_scheme.ssets, 4)) == "01111000"
    assert derive_receive_key(b2, paper_scheme.ssets, 3) == b"\x00"
    for b in paper_bundles:
        assert derive_receive_key(b, paper_scheme.ssets, b.user) == b"\x00"


def test_receive_key_detects_missing_material(paper_bundles, paper_scheme):
    b2 = paper_bundles[1]
    stripped = UserBundle(2, b2.sset - {3}, {k: v for k, v in b2.material.items() if k != 3}, b2.send_keys, 1)
    with pytest.raises(BundleError):
        derive_receive_key(stripped, paper_scheme.ssets, 4)


def test_bundle_file_layout(paper_bundles):
    text = format_bundle(paper_bundles[3])
    assert text.splitlines() == [
        "bundle 4",
        "keylen 1",
        "sset 6,7,8",
        "material 6 11",
        "material 7 92",
        "material 8 b6",
        "sendkey 1 c6",
        "sendkey 2 78",
    ]


def test_bundle_roundtrip_paths_and_streams(paper_bundles, tmp_path):
    b = paper_bundles[3]
    path = tmp_path / "u4.bundle"
    write_bundle(b, path)
    assert read_bundle(path) == b
    assert read_bundle(str(path)) == b
    buf = io.StringIO()
    write_bundle(b, buf)
    assert read_bundle(io.StringIO(buf.getvalue())) == b


BASE = "bundle 4\nkeylen 1\nsset 6,7,8\nmaterial 6 11\nmaterial 7 92\nmaterial 8 b6\nsendkey 2 78\n"


@pytest.mark.parametrize(
    "text, fragment",
    [
        (BASE.replace("material 6 11", "material 6 aabbcc"), "2 lowercase hex digits"),
        (BASE.replace("material 8 b6\n", ""), "differ from S-set"),
        (BASE.replace("material 6 11", "material 6 zz"), "bad hex"),
        (BASE.replace("material 6 11", "material 6 AB"), "lowercase"),
        (BASE.replace("keylen 1\n", ""), "keylen"),
        (BASE.replace("sset 6,7,8\n", ""), "sset"),
        (BASE.replace("sendkey 2 78", "sendkey 2 00"), "zero send key"),
        (BASE + "sendkey 2 11\n", "duplicate"),
        (BASE + "extra line\n", "unrecognised"),
    ],
)
def test_bundle_parse_errors(text, fragment):
    with pytest.raises(BundleError, match=fragment):
        parse_bundle(text)


@given(schemes(max_users=10), st.sampled_from(list(Rule)))
def test_bundle_agreement(scheme, rule):
    if rule is not scheme.rule:
        scheme = build_scheme(scheme.hierarchy, [len(b) for b in scheme.family.blocks], 8, b"\x07", rule)
    h, km, s = scheme.hierarchy, scheme.matrix, scheme.ssets
    bundles = make_bundles(h, scheme.family, s, scheme.material, km)
    check_bundles(bundles, h)
    by_user = {b.user: b for b in bundles}
    assert sum(len(b.material) for b in bundles) == s.total_size()
    assert scheme.material_size == sum(len(b) for b in scheme.family.blocks)
    for i in h.users:
        for j in h.users:
            assert derive_receive_key(by_user[i], s, j, rule) == km.key(i, j)
            if dominates(h, i, j):
                assert by_user[j].send_keys[i] == derive_receive_key(by_user[i], s, j, rule)


@st.composite
def bundles(draw):
    length = draw(st.integers(1, 32))
    sset = draw(st.frozensets(st.integers(1, 200), max_size=30))
    material = {x: draw(st.binary(min_size=length, max_size=length)) for x in sset}
    nonzero = st.binary(min_size=length, max_size=length).filter(any)
    user = draw(st.integers(1, 500))
    senders = draw(st.frozensets(st.integers(1, 500).filter(lambda a: a != user), max_size=8))
    return UserBundle(user, sset, material, {a: draw(nonzero) for a in senders}, length)


@given(bundles())
def test_random_bundle_roundtrip(b):
    again = roundtrip(b)
    assert again == b
    assert format_bundle(again) == format_bundle(b)
