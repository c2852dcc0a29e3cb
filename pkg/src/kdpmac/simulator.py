"""In-process simplex channel simulation.

Senders encrypt with the send key from their bundle; receivers rebuild the
key from their own material. The cipher is repeating-key XOR and offers no
security whatsoever: it only demonstrates that both ends hold the same key.
"""

from __future__ import annotations

import shlex
import struct
from collections import deque
from dataclasses import dataclass
from itertools import cycle
from typing import Literal, Sequence

from .family import SSetTable
from .hierarchy import Hierarchy
from .keyderive import Rule, is_zero_key
from .provisioning import UserBundle, derive_receive_key

Outcome = Literal["ok", "forbidden", "corrupt"]

HEADER = struct.Struct(">HHI")


class ForbiddenChannel(Exception):
    """Refusal to use the all-zero key."""


class ScenarioError(ValueError):
    pass


def encrypt(key: bytes, plaintext: bytes) -> bytes:
    if is_zero_key(key):
        raise ForbiddenChannel("zero key: channel is forbidden")
    return bytes(p ^ k for p, k in zip(plaintext, cycle(key)))


def decrypt(key: bytes, ciphertext: bytes) -> bytes:
    return encrypt(key, ciphertext)


@dataclass(frozen=True)
class ChannelMessage:
    sender: int
    receiver: int
    ciphertext: bytes

    def header(self) -> bytes:
        return HEADER.pack(self.sender, self.receiver, len(self.ciphertext))

    def to_bytes(self) -> bytes:
        return self.header() + self.ciphertext

    @classmethod
    def from_bytes(cls, data: bytes) -> ChannelMessage:
        if len(data) < HEADER.size:
            raise ValueError("message shorter than its header")
        sender, receiver, length = HEADER.unpack_from(data)
        body = data[HEADER.size:]
        if len(body) != length:
            raise ValueError(f"header declares {length} payload bytes, got {len(body)}")
        return cls(sender, receiver, body)


class UserAgent:
    """One user, holding nothing but its bundle and the public S-set table."""

    def __init__(self, bundle: UserBundle, ssets: SSetTable, rule: Rule = Rule.CONTAINMENT):
        self.bundle = bundle
        self.ssets = ssets
        self.rule = rule

    @property
    def uid(self) -> int:
        return self.bundle.user

    def send(self, to: int, payload: bytes) -> ChannelMessage:
        key = self.bundle.send_keys.get(to)
        if key is None:
            raise ForbiddenChannel(f"user {self.uid} holds no key for sending to {to}")
        return ChannelMessage(self.uid, to, encrypt(key, payload))

    def receive(self, msg: ChannelMessage) -> bytes:
        key = derive_receive_key(self.bundle, self.ssets, msg.sender, self.rule)
        return decrypt(key, msg.ciphertext)


class MessageBus:
    def __init__(self) -> None:
        self.queue: deque[bytes] = deque()

    def post(self, msg: ChannelMessage) -> None:
        self.queue.append(msg.to_bytes())

    def take(self) -> ChannelMessage:
        return ChannelMessage.from_bytes(self.queue.popleft())


@dataclass(frozen=True)
class Step:
    sender: int
    receiver: int
    payload: bytes
    expect: Literal["ok", "forbidden"]


@dataclass(frozen=True)
class StepResult:
    index: int
    step: Step
    outcome: Outcome

    @property
    def passed(self) -> bool:
        return self.outcome == self.step.expect

    def format(self) -> str:
        s = self.step
        return f"step {self.index} {s.sender}->{s.receiver} {self.outcome} {'pass' if self.passed else 'fail'}"


@dataclass(frozen=True)
class Transcript:
    results: tuple[StepResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def format(self) -> str:
        return "".join(r.format() + "\n" for r in self.results)


def parse_scenario(text: str) -> list[Step]:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            parts = shlex.split(line)
        except ValueError as exc:
            raise ScenarioError(f"line {lineno}: {exc}") from None
        if len(parts) != 6 or parts[0] != "send" or parts[4] != "expect":
            raise ScenarioError(
                f"line {lineno}: expected 'send <from> <to> <payload> expect <ok|forbidden>'"
            )
        if parts[5] not in ("ok", "forbidden"):
            raise ScenarioError(f"line {lineno}: expectation must be ok or forbidden")
        try:
            sender, receiver = int(parts[1]), int(parts[2])
        except ValueError:
            raise ScenarioError(f"line {lineno}: user ids must be integers") from None
        steps.append(Step(sender, receiver, _payload(parts[3], lineno), parts[5]))
    return steps


def _payload(token: str, lineno: int) -> bytes:
    if token.startswith("0x"):
        try:
            return bytes.fromhex(token[2:])
        except ValueError:
            raise ScenarioError(f"line {lineno}: bad hex payload") from None
    return token.encode("utf-8")


def all_pairs_scenario(h: Hierarchy, payload: bytes = b"report") -> list[Step]:
    """Every ordered pair, self-pairs included, expected ok exactly upward."""
    return [
        Step(j, i, payload, "ok" if j in h.dominated_by(i) else "forbidden")
        for j in h.users
        for i in h.users
    ]


def run_scenario(
    bundles: Sequence[UserBundle],
    ssets: SSetTable,
    steps: Sequence[Step],
    rule: Rule = Rule.CONTAINMENT,
) -> Transcript:
    agents = {b.user: UserAgent(b, ssets, rule) for b in bundles}
    for n, s in enumerate(steps, start=1):
        for uid in (s.sender, s.receiver):
            if uid not in agents:
                raise ScenarioError(f"step {n} references unknown user {uid}")
    bus = MessageBus()
    results = []
    for n, s in enumerate(steps, start=1):
        try:
            bus.post(agents[s.sender].send(s.receiver, s.payload))
        except ForbiddenChannel:
            results.append(StepResult(n, s, "forbidden"))
            continue
        msg = bus.take()
        try:
            plain = agents[msg.receiver].receive(msg)
        except ForbiddenChannel:
            # receiver derives a zero key: it cannot read this channel
            results.append(StepResult(n, s, "forbidden"))
            continue
        results.append(StepResult(n, s, "ok" if plain == s.payload else "corrupt"))
    return Transcript(tuple(results))
