"""Seven-step secret sharing run over an append-only broadcast log.

The dealer prepares 2n three-qudit states with hidden residues, ships
two slots to the players, and sifts the rounds into correlation tests
and key rounds.  Test rounds are announced in one of two randomized
orders chosen so that neither player can tailor an announcement to
information the other has not yet revealed; the log records every
announcement with explicit citations, and `transcript_audit` replays
those citations to catch any message that depends on a later one.

All randomness flows from named substreams of the run seed, so a run is
a pure function of its configuration and every report serializes to
byte-identical JSON on replay.  Adversaries plug in through two narrow
hooks: a channel tap while qudits are in flight, and a rewrite hook on
the dishonest player's own announcements.  A hook that raises marks the
run invalid rather than aborted, keeping detection statistics honest.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .core import PureState, rng_stream, tensor
from .errors import ContractError
from .ghz import GhzSpec, realize
from .measurement import MeasOutcome, alice_basis_for, correlation_holds, measure_subsystem
from .mub import DIRECTIONS, basis_for_label, random_direction

SCHEMA_VERSION = "1"

#: The two legal test-round announcement orders, as (sender, kind) slots.
ORDER_TEMPLATES = {
    "A": (("bob", "outcome"), ("charlie", "outcome"), ("charlie", "direction"), ("bob", "direction")),
    "B": (("charlie", "outcome"), ("bob", "outcome"), ("bob", "direction"), ("charlie", "direction")),
}

_ALPHA_MODES = ("fixed", "string")
_ORDER_MODES = ("per-round", "fixed-A", "fixed-B")
_MASK_MODES = ("exact", "bernoulli")

#: Substream labels drawn from the run seed, one per independent random role.
_STREAMS = (
    "alice-alpha",
    "alice-mask",
    "alice-meas",
    "bob-dir",
    "bob-meas",
    "charlie-dir",
    "charlie-meas",
    "order",
    "adversary",
)


@dataclass(frozen=True)
class ProtocolConfig:
    """Full description of one run; two configs with equal fields replay identically."""

    d: int
    n: int
    alpha_mode: str = "fixed"
    alpha: int = 0
    order_mode: str = "per-round"
    mask_mode: str = "exact"
    test_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        from .core import require_dim

        require_dim(self.d)
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise ContractError(f"n must be a positive integer, got {self.n!r}")
        if self.alpha_mode not in _ALPHA_MODES:
            raise ContractError(f"alpha_mode must be one of {_ALPHA_MODES}")
        if self.alpha_mode == "fixed" and not 0 <= self.alpha < self.d:
            raise ContractError(f"alpha {self.alpha} out of range for d={self.d}")
        if self.order_mode not in _ORDER_MODES:
            raise ContractError(f"order_mode must be one of {_ORDER_MODES}")
        if self.mask_mode not in _MASK_MODES:
            raise ContractError(f"mask_mode must be one of {_MASK_MODES}")
        if not 0.0 <= self.test_fraction <= 1.0:
            raise ContractError(f"test_fraction {self.test_fraction} outside [0, 1]")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ContractError(f"seed must be an integer, got {self.seed!r}")


@dataclass(frozen=True)
class Message:
    """One broadcast-log entry; cites lists the seqs this content depends on."""

    seq: int
    round: int | None
    step: str
    sender: str
    kind: str
    payload: dict
    cites: tuple[int, ...] = ()


@dataclass
class RoundRecord:
    """Everything one round produced, private values included."""

    index: int
    alpha: int
    is_test: bool = False
    bob_dir: str = ""
    charlie_dir: str = ""
    bob_outcome: int = -1
    charlie_outcome: int = -1
    alice_basis: str | None = None
    alice_outcome: int | None = None
    order_template: str | None = None
    passed: bool | None = None


@dataclass(frozen=True)
class RunReport:
    """Outcome of one run: abort decision, keys, per-round records, full log."""

    config: ProtocolConfig
    aborted: bool
    first_failed_round: int | None
    invalid: bool
    rounds: tuple[RoundRecord, ...]
    alice_key: tuple[int, ...]
    reconstructed_key: tuple[int, ...]
    key_agreement: bool
    messages: tuple[Message, ...]
    adversary: dict | None
    schema_version: str = SCHEMA_VERSION


class BroadcastLog:
    """Ordered, authenticated, append-only list of public messages."""

    def __init__(self):
        self._messages: list[Message] = []

    def append(self, round_index, step, sender, kind, payload, cites=()) -> Message:
        msg = Message(len(self._messages), round_index, step, sender, kind, dict(payload), tuple(cites))
        self._messages.append(msg)
        return msg

    def view(self) -> tuple[Message, ...]:
        return tuple(self._messages)


class QuantumRound:
    """One round's joint register plus the wire map naming who holds which slot."""

    __slots__ = ("state", "wires")

    def __init__(self, state: PureState):
        self.state = state
        self.wires = {"alice": 0, "bob": 1, "charlie": 2}

    def measure_wire(self, wire: str, basis, rng, party: str) -> MeasOutcome:
        return self.measure_slot(self.wires[wire], basis, rng, party)

    def measure_slot(self, slot: int, basis, rng, party: str) -> MeasOutcome:
        outcome, self.state = measure_subsystem(self.state, slot, basis, rng, party)
        return outcome

    def extend(self, extra: PureState) -> int:
        """Adjoin a fresh register; returns the index of its first slot."""
        first = len(self.state.dims)
        self.state = tensor(self.state, extra)
        return first


class StoredWire:
    """Adversary-held slot of a round register; yields outcome values only."""

    __slots__ = ("_round", "_slot", "_rng", "_d")

    def __init__(self, qround: QuantumRound, slot: int, rng, d: int):
        self._round = qround
        self._slot = slot
        self._rng = rng
        self._d = d

    def measure(self, direction: str) -> int:
        basis = basis_for_label(direction, self._d)
        return self._round.measure_slot(self._slot, basis, self._rng, "adversary").value


class ChannelTap:
    """Adversary's handle on one flying qudit.

    `measure` collapses the qudit in a chosen direction and reports the
    outcome, leaving the eigenstate on the wire (intercept-and-resend).
    `replace` swaps in one half of a supplied two-qudit state and hands
    back the original qudit and the other half as stored wires; only a
    dishonest insider may call it.  Amplitudes are never exposed.
    """

    __slots__ = ("_round", "_wire", "_rng", "_allow_replace", "d")

    def __init__(self, qround: QuantumRound, wire: str, rng, allow_replace: bool, d: int):
        self._round = qround
        self._wire = wire
        self._rng = rng
        self._allow_replace = allow_replace
        self.d = d

    def measure(self, direction: str) -> int:
        basis = basis_for_label(direction, self.d)
        return self._round.measure_wire(self._wire, basis, self._rng, "adversary").value

    def replace(self, pair: PureState) -> tuple[StoredWire, StoredWire]:
        if not self._allow_replace:
            raise ContractError("this adversary may not inject replacement states")
        if pair.dims != (self.d, self.d):
            raise ContractError(f"replacement must be a ({self.d}, {self.d}) register, got dims {pair.dims}")
        first = self._round.extend(pair)
        original_slot = self._round.wires[self._wire]
        self._round.wires[self._wire] = first + 1
        stored = StoredWire(self._round, original_slot, self._rng, self.d)
        kept = StoredWire(self._round, first, self._rng, self.d)
        return stored, kept


def announcement_order(round_index: int, sampler: np.random.Generator) -> str:
    """Uniform choice between the two legal announcement templates."""
    if round_index < 0:
        raise ContractError(f"round index must be nonnegative, got {round_index}")
    return "A" if int(sampler.integers(2)) == 0 else "B"


def draw_sift_mask(rng: np.random.Generator, total: int, fraction: float, mode: str) -> np.ndarray:
    """Binary test mask over all rounds; exact mode fixes the number of ones."""
    if mode == "exact":
        ones = int(round(fraction * total))
        mask = np.zeros(total, dtype=np.int64)
        mask[rng.permutation(total)[:ones]] = 1
        return mask
    return (rng.random(total) < fraction).astype(np.int64)


def reconstruct_key(bob_outcomes, charlie_outcomes, alpha_schedule, d: int | None = None) -> tuple[int, ...]:
    """Digit i is alpha_i - t_i - u_i mod d; lengths must agree.

    Outcomes may be MeasOutcome objects, which carry their own
    dimension, or plain integers with d supplied explicitly.
    """
    if not len(bob_outcomes) == len(charlie_outcomes) == len(alpha_schedule):
        raise ContractError(
            f"length mismatch: {len(bob_outcomes)}, {len(charlie_outcomes)}, {len(alpha_schedule)}"
        )

    def value_and_dim(outcome):
        if isinstance(outcome, MeasOutcome):
            return outcome.value, outcome.d
        return int(outcome), None

    digits = []
    for t, u, alpha in zip(bob_outcomes, charlie_outcomes, alpha_schedule):
        tv, td = value_and_dim(t)
        uv, ud = value_and_dim(u)
        dims = {x for x in (td, ud, d) if x is not None}
        if len(dims) != 1:
            raise ContractError(f"outcome dimension is ambiguous or inconsistent: {dims or 'none given'}")
        digits.append((int(alpha) - tv - uv) % dims.pop())
    return tuple(digits)


def _valid_announcement(kind: str, payload, d: int) -> bool:
    if not isinstance(payload, dict):
        return False
    if kind == "outcome":
        value = payload.get("value")
        return set(payload) == {"value"} and isinstance(value, int) and 0 <= value < d
    if kind == "direction":
        return set(payload) == {"direction"} and payload.get("direction") in DIRECTIONS
    return False


def run_protocol(config: ProtocolConfig, adversary=None) -> RunReport:
    """Execute one full run and assemble its report.

    `adversary` is a strategy blueprint (or None); a fresh instance is
    spawned from the run's adversary substream so trials stay
    independent.  Faulting hooks mute the adversary and mark the run
    invalid; the protocol itself then continues honestly.
    """
    d, n = config.d, config.n
    total = 2 * n
    streams = {name: rng_stream(config.seed, name) for name in _STREAMS}

    if config.alpha_mode == "fixed":
        alphas = [config.alpha] * total
    else:
        alphas = [int(a) for a in streams["alice-alpha"].integers(0, d, size=total)]

    instance = None
    identity = None
    targets = ()
    adversary_name = None
    invalid = False
    if adversary is not None:
        identity = adversary.identity
        targets = tuple(adversary.targets)
        adversary_name = adversary.name
        try:
            instance = adversary.spawn(streams["adversary"])
        except Exception:
            invalid = True

    def mute():
        nonlocal instance, invalid
        instance = None
        invalid = True

    log = BroadcastLog()
    dir_basis = {lab: basis_for_label(lab, d) for lab in DIRECTIONS}

    # Steps 1 and 2a: prepare each state and ship slots two and three.
    # Taps fire while the qudits are in flight.
    rounds_q: list[QuantumRound] = []
    for r in range(total):
        qround = QuantumRound(realize(GhzSpec(d, alphas[r], "XYY")))
        if instance is not None:
            for channel, wire in (("bob-channel", "bob"), ("charlie-channel", "charlie")):
                if channel not in targets:
                    continue
                tap = ChannelTap(qround, wire, streams["adversary"], identity == "dishonest-bob", d)
                try:
                    instance.on_qudit_in_transit(r, channel, tap)
                except Exception:
                    mute()
                    break
        rounds_q.append(qround)

    # Step 2b: both players confirm receipt before anything is sifted.
    log.append(None, "2", "bob", "receipt", {"rounds": total})
    log.append(None, "2", "charlie", "receipt", {"rounds": total})

    # Step 2c: private direction choices and measurements, all rounds.
    records: list[RoundRecord] = []
    for r in range(total):
        bob_dir = random_direction(streams["bob-dir"])
        charlie_dir = random_direction(streams["charlie-dir"])
        t = rounds_q[r].measure_wire("bob", dir_basis[bob_dir], streams["bob-meas"], "bob")
        u = rounds_q[r].measure_wire("charlie", dir_basis[charlie_dir], streams["charlie-meas"], "charlie")
        records.append(
            RoundRecord(
                index=r,
                alpha=alphas[r],
                bob_dir=bob_dir,
                charlie_dir=charlie_dir,
                bob_outcome=t.value,
                charlie_outcome=u.value,
            )
        )

    # Step 3a: the dealer sifts only after both receipts are logged.
    mask = draw_sift_mask(streams["alice-mask"], total, config.test_fraction, config.mask_mode)
    mask_msg = log.append(None, "3", "alice", "sift-mask", {"mask": "".join(str(int(b)) for b in mask)})
    for rec in records:
        rec.is_test = bool(mask[rec.index])

    def announce(rec, step, sender, kind, cites):
        """Log one announcement, routing it through a dishonest insider's hook."""
        if kind == "outcome":
            honest = {"value": rec.bob_outcome if sender == "bob" else rec.charlie_outcome}
        else:
            honest = {"direction": rec.bob_dir if sender == "bob" else rec.charlie_dir}
        payload = honest
        if instance is not None and identity == "dishonest-bob" and sender == "bob":
            try:
                payload = instance.on_announcement(step, kind, rec.index, log.view(), dict(honest))
            except Exception:
                mute()
                payload = honest
            if not _valid_announcement(kind, payload, d):
                mute()
                payload = honest
        return log.append(rec.index, step, sender, kind, payload, cites)

    # Steps 3b, 4, 5: per test round, ordered announcements, then the
    # dealer measures in the basis the announced directions dictate and
    # checks the residue.  First failure aborts; later test rounds are
    # still checked for the record.
    aborted = False
    first_failed: int | None = None
    fixed_template = config.order_mode[-1] if config.order_mode.startswith("fixed-") else None
    for rec in records:
        if not rec.is_test:
            continue
        template = fixed_template or announcement_order(rec.index, streams["order"])
        rec.order_template = template
        choice = log.append(rec.index, "3", "alice", "order-choice", {"template": template}, (mask_msg.seq,))
        announced: dict[tuple[str, str], dict] = {}
        seqs = []
        for sender, kind in ORDER_TEMPLATES[template]:
            msg = announce(rec, "3", sender, kind, (choice.seq,))
            announced[(sender, kind)] = msg.payload
            seqs.append(msg.seq)

        alice_basis = alice_basis_for(
            announced[("bob", "direction")]["direction"],
            announced[("charlie", "direction")]["direction"],
            d,
        )
        rec.alice_basis = alice_basis.label
        s = rounds_q[rec.index].measure_wire("alice", alice_basis, streams["alice-meas"], "alice")
        rec.alice_outcome = s.value
        t_ann = MeasOutcome(announced[("bob", "outcome")]["value"], "X", "bob", d)
        u_ann = MeasOutcome(announced[("charlie", "outcome")]["value"], "X", "charlie", d)
        rec.passed = correlation_holds(s, t_ann, u_ann, rec.alpha)
        check = log.append(rec.index, "5", "alice", "check-result", {"passed": rec.passed}, tuple(seqs))
        if not rec.passed and not aborted:
            aborted = True
            first_failed = rec.index
            log.append(rec.index, "5", "alice", "abort", {"round": rec.index}, (check.seq,))

    # Steps 6 and 7: key rounds only exist for runs that survived the tests.
    alice_key: list[int] = []
    key_alphas: list[int] = []
    key_t: list[int] = []
    key_u: list[int] = []
    if not aborted:
        for rec in records:
            if rec.is_test:
                continue
            msg_b = announce(rec, "6", "bob", "direction", (mask_msg.seq,))
            msg_c = announce(rec, "6", "charlie", "direction", (mask_msg.seq,))
            alice_basis = alice_basis_for(msg_b.payload["direction"], msg_c.payload["direction"], d)
            rec.alice_basis = alice_basis.label
            s = rounds_q[rec.index].measure_wire("alice", alice_basis, streams["alice-meas"], "alice")
            rec.alice_outcome = s.value
            alice_key.append(s.value)
            key_alphas.append(rec.alpha)
            key_t.append(rec.bob_outcome)
            key_u.append(rec.charlie_outcome)
        log.append(None, "7", "alice", "alpha-reveal", {"alphas": [rec.alpha for rec in records]})

    if instance is not None:
        try:
            instance.finalize(log.view())
        except Exception:
            mute()
    notes = None
    if adversary is not None:
        collected = {}
        if instance is not None:
            try:
                collected = instance.notes()
            except Exception:
                mute()
                collected = {}
        notes = {"name": adversary_name, "identity": identity, "notes": collected}

    if aborted:
        reconstructed: tuple[int, ...] = ()
    else:
        t_out = [MeasOutcome(v, "X", "bob", d) for v in key_t]
        u_out = [MeasOutcome(v, "X", "charlie", d) for v in key_u]
        reconstructed = reconstruct_key(t_out, u_out, key_alphas)

    alice_key_t = tuple(alice_key) if not aborted else ()
    return RunReport(
        config=config,
        aborted=aborted,
        first_failed_round=first_failed,
        invalid=invalid,
        rounds=tuple(records),
        alice_key=alice_key_t,
        reconstructed_key=reconstructed,
        key_agreement=(not aborted) and alice_key_t == reconstructed,
        messages=log.view(),
        adversary=notes,
    )


def transcript_lines(report: RunReport) -> list[str]:
    """Line-delimited rendering: `round, step, sender, kind, payload`."""
    lines = []
    for msg in report.messages:
        round_field = "-" if msg.round is None else str(msg.round)
        payload = json.dumps(msg.payload, sort_keys=True)
        lines.append(f"{round_field}, {msg.step}, {msg.sender}, {msg.kind}, {payload}")
    return lines


def parse_transcript_line(line: str) -> tuple[int | None, str, str, str, dict]:
    """Inverse of one transcript_lines entry."""
    parts = line.split(", ", 4)
    if len(parts) != 5:
        raise ContractError(f"malformed transcript line: {line!r}")
    round_field, step, sender, kind, payload = parts
    round_index = None if round_field == "-" else int(round_field)
    return round_index, step, sender, kind, json.loads(payload)


def transcript_audit(report: RunReport) -> list[str]:
    """Causality and ordering violations in a report's broadcast log.

    Honest runs and order-respecting adversaries produce an empty list.
    Checks: dense ascending seq numbers; every citation strictly
    earlier; both receipts before the sift mask; each test round's four
    announcements in exactly its recorded template order, after the
    order choice; no outcome announcements for key rounds.
    """
    violations: list[str] = []
    messages = report.messages

    for i, msg in enumerate(messages):
        if msg.seq != i:
            violations.append(f"message at position {i} has seq {msg.seq}, log is not append-only")
        for cited in msg.cites:
            if not 0 <= cited < msg.seq:
                violations.append(f"message {msg.seq} cites {cited}, which is not strictly earlier")

    mask_seq = next((m.seq for m in messages if m.kind == "sift-mask"), None)
    if mask_seq is not None:
        for sender in ("bob", "charlie"):
            receipt = next((m.seq for m in messages if m.kind == "receipt" and m.sender == sender), None)
            if receipt is None or receipt > mask_seq:
                violations.append(f"{sender} receipt missing or after the sift mask")

    test_rounds = {rec.index: rec for rec in report.rounds if rec.is_test}
    key_rounds = {rec.index for rec in report.rounds if not rec.is_test}
    for index, rec in sorted(test_rounds.items()):
        choice_seq = next(
            (m.seq for m in messages if m.kind == "order-choice" and m.round == index), None
        )
        announcements = [
            m
            for m in messages
            if m.round == index and m.step == "3" and m.kind in ("outcome", "direction")
        ]
        observed = [(m.sender, m.kind) for m in announcements]
        expected = list(ORDER_TEMPLATES.get(rec.order_template or "", ()))
        if observed != expected:
            violations.append(f"round {index} announcements {observed} violate template {rec.order_template}")
        if choice_seq is None:
            violations.append(f"round {index} has announcements but no order choice")
        elif any(m.seq < choice_seq for m in announcements):
            violations.append(f"round {index} has announcements before the order choice")

    for msg in messages:
        if msg.kind == "outcome" and msg.round in key_rounds:
            violations.append(f"message {msg.seq} announces an outcome for key round {msg.round}")

    return violations


def report_to_dict(report: RunReport) -> dict:
    """JSON-ready dictionary, deterministic for a given report."""
    return {
        "schema_version": report.schema_version,
        "config": asdict(report.config),
        "aborted": report.aborted,
        "first_failed_round": report.first_failed_round,
        "invalid": report.invalid,
        "key_agreement": report.key_agreement,
        "alice_key": list(report.alice_key),
        "reconstructed_key": list(report.reconstructed_key),
        "rounds": [asdict(rec) for rec in report.rounds],
        "adversary": report.adversary,
        "messages": [
            {
                "seq": m.seq,
                "round": m.round,
                "step": m.step,
                "sender": m.sender,
                "kind": m.kind,
                "payload": m.payload,
                "cites": list(m.cites),
            }
            for m in report.messages
        ],
        "transcript": transcript_lines(report),
    }


def report_to_json(report: RunReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"
