import pytest
from hypothesis import given, strategies as st

from kdpmac.provisioning import UserBundle
from kdpmac.simulator import (
    ChannelMessage,
    ForbiddenChannel,
    ScenarioError,
    Step,
    UserAgent,
    all_pairs_scenario,
    decrypt,
    encrypt,
    parse_scenario,
    run_scenario,
)
from kdpmac.verifier import policy_matrix


def test_cipher_examples():
    assert encrypt(bytes([0b01111000]), b"\x00") == b"\x78"
    assert encrypt(b"\x01\x02", b"") == b""
    assert encrypt(b"\x01\x02", b"\x00\x00\x00") == b"\x01\x02\x01"
    with pytest.raises(ForbiddenChannel):
        encrypt(b"\x00\x00", b"hi")


@given(st.binary(min_size=1, max_size=32).filter(any), st.binary(min_size=1024, max_size=1024))
def test_cipher_roundtrip(key, payload):
    assert decrypt(key, encrypt(key, payload)) == payload


def test_message_framing():
    msg = ChannelMessage(4, 2, b"abc")
    wire = msg.to_bytes()
    assert wire[:8] == b"\x00\x04\x00\x02\x00\x00\x00\x03"
    assert ChannelMessage.from_bytes(wire) == msg
    with pytest.raises(ValueError):
        ChannelMessage.from_bytes(wire[:-1])
    with pytest.raises(ValueError):
        ChannelMessage.from_bytes(b"\x00")


def test_fig1_examples(paper_bundles, paper_scheme):
    steps = parse_scenario(
        """
        # upward is fine, everything else is refused
        send 4 2 "report" expect ok
        send 2 4 "orders" expect forbidden
        send 4 5 0x00ff expect forbidden
        send 5 4 'x' expect forbidden
        send 7 1 "" expect ok
        """
    )
    t = run_scenario(paper_bundles, paper_scheme.ssets, steps)
    assert t.passed
    assert t.format().splitlines() == [
        "step 1 4->2 ok pass",
        "step 2 2->4 forbidden pass",
        "step 3 4->5 forbidden pass",
        "step 4 5->4 forbidden pass",
        "step 5 7->1 ok pass",
    ]


def test_mismatch_is_recorded(paper_bundles, paper_scheme):
    t = run_scenario(paper_bundles, paper_scheme.ssets, [Step(2, 4, b"x", "ok")])
    assert not t.passed
    assert t.format() == "step 1 2->4 forbidden fail\n"


def test_unknown_user(paper_bundles, paper_scheme):
    with pytest.raises(ScenarioError):
        run_scenario(paper_bundles, paper_scheme.ssets, [Step(9, 1, b"", "ok")])


@pytest.mark.parametrize(
    "line",
    ["send 1 2 hi", "send 1 2 hi expect maybe", "send a 2 hi expect ok", "send 1 2 0xzz expect ok", 'send 1 2 "x expect ok'],
)
def test_bad_scenario_lines(line):
    with pytest.raises(ScenarioError):
        parse_scenario(line)


def test_all_pairs_matches_policy(fig1, paper_bundles, paper_scheme):
    steps = all_pairs_scenario(fig1)
    assert len(steps) == 49
    t = run_scenario(paper_bundles, paper_scheme.ssets, steps)
    assert t.passed
    pm = policy_matrix(fig1)
    for r in t.results:
        assert (r.outcome == "ok") == pm(r.step.receiver, r.step.sender)


def test_receiver_ignores_stored_send_keys(paper_bundles, paper_scheme):
    # scramble every send key the receiver holds; receiving must still work
    b2 = paper_bundles[1]
    scrambled = UserBundle(2, b2.sset, b2.material, {a: b"\xff" for a in b2.send_keys}, 1)
    sender = UserAgent(paper_bundles[3], paper_scheme.ssets)
    receiver = UserAgent(scrambled, paper_scheme.ssets)
    assert receiver.receive(sender.send(2, b"hello")) == b"hello"


def test_sender_uses_only_send_keys(paper_bundles, paper_scheme):
    # without material the sender can still send; without send keys it cannot
    b4 = paper_bundles[3]
    no_material = UserBundle(4, frozenset(), {}, b4.send_keys, 1)
    msg = UserAgent(no_material, paper_scheme.ssets).send(2, b"up")
    assert UserAgent(paper_bundles[1], paper_scheme.ssets).receive(msg) == b"up"
    no_keys = UserBundle(4, b4.sset, b4.material, {}, 1)
    with pytest.raises(ForbiddenChannel):
        UserAgent(no_keys, paper_scheme.ssets).send(2, b"up")


def test_transcript_deterministic(fig1, paper_bundles, paper_scheme):
    steps = all_pairs_scenario(fig1)
    a = run_scenario(paper_bundles, paper_scheme.ssets, steps)
    b = run_scenario(paper_bundles, paper_scheme.ssets, steps)
    assert a == b
