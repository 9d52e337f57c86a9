"""Channel attacks on the sharing protocol and detection-rate estimators.

Two identities exist.  An external eavesdropper touches only flying
qudits and the public log; her taps can measure (collapse and forward)
but never inject.  A dishonest insider additionally owns his own lab:
he may store intercepted qudits, inject replacement states, and rewrite
his own announcements, though the broadcast ordering still binds him.

Strategies are immutable blueprints; every run spawns a private
instance seeded from the run's adversary substream, so Monte Carlo
trials stay independent and replayable.  The uniform-guess
intercept-and-resend attack on one channel is the calibrated case: each
test round escapes with probability (d+1)/2d, so over n test rounds the
dealer catches it with probability 1 - ((d+1)/2d)^n, which
`detection_analytic` returns and `estimate_detection` reproduces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import MAX_TENSOR_DIM, PureState, require_dim, rng_stream
from .errors import ContractError, ResourceLimitError
from .mub import random_direction
from .protocol import ProtocolConfig, run_protocol

#: Channels an attack may tap.
CHANNELS = ("bob-channel", "charlie-channel")

_TARGET_CHOICES = {
    "bob-channel": ("bob-channel",),
    "charlie-channel": ("charlie-channel",),
    "both": CHANNELS,
}


def maximally_entangled(d: int) -> PureState:
    """Two-qudit state (1/sqrt(d)) * sum_j |jj>."""
    require_dim(d)
    amps = np.eye(d, dtype=np.complex128).reshape(-1) / np.sqrt(d)
    return PureState(amps, (d, d))


class AdversaryInstance:
    """Per-run attack state; concrete strategies override the hooks they use."""

    def on_qudit_in_transit(self, round_index: int, channel: str, tap) -> None:
        pass

    def on_announcement(self, step, kind, round_index, visible_log, honest_payload) -> dict:
        return honest_payload

    def finalize(self, visible_log) -> None:
        """Post-run bookkeeping on the final log; cannot influence the outcome."""

    def notes(self) -> dict:
        return {}


@dataclass(frozen=True)
class AdversaryStrategy:
    """Immutable blueprint: identity fixes visibility, factory builds instances."""

    name: str
    identity: str
    targets: tuple[str, ...]
    factory: Callable[[np.random.Generator], AdversaryInstance] = field(repr=False)

    def __post_init__(self):
        if self.identity not in ("external-eve", "dishonest-bob"):
            raise ContractError(f"unknown identity {self.identity!r}")
        for target in self.targets:
            if target not in CHANNELS:
                raise ContractError(f"unknown channel {target!r}")

    def spawn(self, rng: np.random.Generator) -> AdversaryInstance:
        return self.factory(rng)


def _announced_directions(visible_log, sender: str) -> dict[int, str]:
    """Rounds whose direction the given party has announced so far."""
    found: dict[int, str] = {}
    for msg in visible_log:
        if msg.sender == sender and msg.kind == "direction" and msg.round is not None:
            found[msg.round] = msg.payload["direction"]
    return found


class _InterceptResend(AdversaryInstance):
    """Guess a direction per flying qudit, measure, forward the eigenstate."""

    def __init__(self, rng: np.random.Generator, label: str):
        self._rng = rng
        self._label = label
        self.records: list[tuple[int, str, str, int]] = []
        self._matches: list[list] = []

    def on_qudit_in_transit(self, round_index, channel, tap):
        guess = random_direction(self._rng)
        value = tap.measure(guess)
        self.records.append((round_index, channel, guess, value))

    def finalize(self, visible_log):
        # A guess that matched the victim's later announcement handed the
        # attacker that party's digit outright; tally those rounds.
        announced = {
            "bob-channel": _announced_directions(visible_log, "bob"),
            "charlie-channel": _announced_directions(visible_log, "charlie"),
        }
        self._matches = [
            [r, channel, value]
            for (r, channel, guess, value) in self.records
            if announced[channel].get(r) == guess
        ]

    def notes(self):
        return {
            "strategy": self._label,
            "tapped": len(self.records),
            "records": [[r, c, g, v] for (r, c, g, v) in self.records],
            "direction_matches": self._matches,
        }


class _BobEntangle(AdversaryInstance):
    """Swap the colleague's qudit for half an entangled pair and keep the original.

    Announcements stay honest; once the colleague's direction for a
    round becomes public the stored original is measured in it, which is
    the insider's whole payoff.  Nothing here depends on messages that
    are not yet in the visible log.
    """

    def __init__(self, rng: np.random.Generator, d: int):
        self._rng = rng
        self._d = d
        self._stored: dict[int, object] = {}
        self._kept: dict[int, object] = {}
        self.learned: list[list] = []
        self._done: set[int] = set()

    def on_qudit_in_transit(self, round_index, channel, tap):
        if channel != "charlie-channel":
            return
        stored, kept = tap.replace(maximally_entangled(self._d))
        self._stored[round_index] = stored
        self._kept[round_index] = kept

    def _harvest(self, visible_log):
        announced = _announced_directions(visible_log, "charlie")
        for r, wire in self._stored.items():
            if r in self._done or r not in announced:
                continue
            direction = announced[r]
            self.learned.append([r, direction, wire.measure(direction)])
            self._done.add(r)

    def on_announcement(self, step, kind, round_index, visible_log, honest_payload):
        self._harvest(visible_log)
        return honest_payload

    def finalize(self, visible_log):
        self._harvest(visible_log)

    def notes(self):
        return {
            "strategy": "bob-entangle",
            "pairs_injected": len(self._stored),
            "learned": sorted(self.learned),
        }


def bob_intercept_resend(d: int) -> AdversaryStrategy:
    """Dishonest insider measures the colleague's flying qudit on a guessed direction."""
    require_dim(d)
    return AdversaryStrategy(
        name="bob-ir",
        identity="dishonest-bob",
        targets=("charlie-channel",),
        factory=lambda rng: _InterceptResend(rng, "bob-intercept-resend"),
    )


def eve_intercept_resend(d: int, target: str = "both") -> AdversaryStrategy:
    """Outside eavesdropper measures flying qudits on the chosen channel(s)."""
    require_dim(d)
    if target not in _TARGET_CHOICES:
        raise ContractError(f"target must be one of {sorted(_TARGET_CHOICES)}, got {target!r}")
    return AdversaryStrategy(
        name="eve-ir",
        identity="external-eve",
        targets=_TARGET_CHOICES[target],
        factory=lambda rng: _InterceptResend(rng, "eve-intercept-resend"),
    )


def bob_entangle_attack(d: int) -> AdversaryStrategy:
    """Insider swaps entangled-pair halves for the colleague's qudits.

    The round register grows to five d-level slots, so d is capped by
    the tensor size limit.
    """
    require_dim(d)
    if d**5 > MAX_TENSOR_DIM:
        raise ResourceLimitError(f"d={d} needs a {d}^5 register, over the {MAX_TENSOR_DIM} limit")
    return AdversaryStrategy(
        name="bob-entangle",
        identity="dishonest-bob",
        targets=("charlie-channel",),
        factory=lambda rng: _BobEntangle(rng, d),
    )


STRATEGY_BUILDERS = {
    "bob-ir": bob_intercept_resend,
    "eve-ir": eve_intercept_resend,
    "bob-entangle": bob_entangle_attack,
}


def detection_analytic(d: int, n: int) -> float:
    """Probability at least one of n test rounds catches the uniform-guess
    intercept-and-resend attack: 1 - ((d+1)/(2d))^n."""
    require_dim(d)
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ContractError(f"n must be a nonnegative integer, got {n!r}")
    return 1.0 - ((d + 1) / (2 * d)) ** n


@dataclass(frozen=True)
class DetectionEstimate:
    """Monte Carlo abort-rate estimate with its binomial standard error."""

    trials: int
    detected: int
    rate: float
    std_error: float
    analytic: float | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ContractError(f"trials must be positive, got {self.trials}")
        if not 0 <= self.detected <= self.trials:
            raise ContractError(f"detected {self.detected} outside 0..{self.trials}")

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "detected": self.detected,
            "rate": self.rate,
            "std_error": self.std_error,
            "analytic": self.analytic,
        }


def estimate_detection(
    config: ProtocolConfig, strategy: AdversaryStrategy | None, trials: int
) -> DetectionEstimate:
    """Abort frequency of the strategy over independent seeded trials.

    Trial i runs with a seed drawn from the stream labelled "trial-i",
    so estimates are replayable and order-independent.  `strategy` may
    be None for the honest baseline, whose rate is zero.  The analytic
    reference is attached for the calibrated insider intercept-resend
    attack, whose test-round count is the configured n.
    """
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise ContractError(f"trials must be a positive integer, got {trials!r}")
    detected = 0
    for i in range(trials):
        trial_seed = int(rng_stream(config.seed, f"trial-{i}").integers(2**63))
        report = run_protocol(replace(config, seed=trial_seed), strategy)
        detected += int(report.aborted)
    rate = detected / trials
    std_error = math.sqrt(rate * (1.0 - rate) / trials)
    analytic = None
    if strategy is not None and strategy.name == "bob-ir":
        analytic = detection_analytic(config.d, config.n)
    return DetectionEstimate(trials, detected, rate, std_error, analytic)
