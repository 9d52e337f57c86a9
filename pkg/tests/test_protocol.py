"""Full protocol runs, key reconstruction, and the broadcast-log audit."""

import dataclasses

import numpy as np
import pytest

from triqss import (
    ContractError,
    MeasOutcome,
    Message,
    ProtocolConfig,
    announcement_order,
    bob_intercept_resend,
    draw_sift_mask,
    parse_transcript_line,
    reconstruct_key,
    report_to_json,
    rng_stream,
    run_protocol,
    transcript_audit,
    transcript_lines,
)
from triqss.adversary import AdversaryInstance, AdversaryStrategy
from triqss.protocol import ORDER_TEMPLATES


class TestConfigValidation:
    def test_defaults_are_valid(self):
        cfg = ProtocolConfig(d=3, n=4)
        assert cfg.alpha_mode == "fixed" and cfg.test_fraction == 0.5

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(d=1, n=4),
            dict(d=3, n=0),
            dict(d=3, n=True),
            dict(d=3, n=4, alpha=3),
            dict(d=3, n=4, alpha=-1),
            dict(d=3, n=4, alpha_mode="random"),
            dict(d=3, n=4, order_mode="fixed-C"),
            dict(d=3, n=4, mask_mode="half"),
            dict(d=3, n=4, test_fraction=1.5),
            dict(d=3, n=4, seed="zero"),
        ],
    )
    def test_rejections(self, kwargs):
        with pytest.raises(ContractError):
            ProtocolConfig(**kwargs)


class TestHonestRuns:
    def test_qubit_run(self):
        report = run_protocol(ProtocolConfig(d=2, n=8, seed=11))
        assert not report.aborted
        assert not report.invalid
        assert report.first_failed_round is None
        assert report.key_agreement
        assert len(report.alice_key) == 8
        assert report.alice_key == report.reconstructed_key
        assert len(report.rounds) == 16
        assert sum(rec.is_test for rec in report.rounds) == 8
        assert all(rec.passed for rec in report.rounds if rec.is_test)
        assert report.adversary is None

    def test_string_mode_run(self):
        cfg = ProtocolConfig(d=7, n=32, alpha_mode="string", seed=5)
        report = run_protocol(cfg)
        assert not report.aborted
        assert report.key_agreement
        assert len(report.alice_key) == 32
        alphas = {rec.alpha for rec in report.rounds}
        assert len(alphas) > 1
        assert all(0 <= a < 7 for a in alphas)

    def test_replay_is_byte_identical(self):
        cfg = ProtocolConfig(d=5, n=6, alpha=2, seed=99)
        assert report_to_json(run_protocol(cfg)) == report_to_json(run_protocol(cfg))

    def test_distinct_seeds_differ(self):
        a = run_protocol(ProtocolConfig(d=3, n=8, seed=1))
        b = run_protocol(ProtocolConfig(d=3, n=8, seed=2))
        assert a.alice_key != b.alice_key

    def test_all_test_rounds_pass(self):
        report = run_protocol(ProtocolConfig(d=4, n=12, alpha=3, seed=7))
        for rec in report.rounds:
            if rec.is_test:
                assert (rec.alice_outcome + rec.bob_outcome + rec.charlie_outcome) % 4 == 3

    def test_key_rounds_have_no_outcome_messages(self):
        report = run_protocol(ProtocolConfig(d=2, n=6, seed=3))
        key_rounds = {rec.index for rec in report.rounds if not rec.is_test}
        for msg in report.messages:
            if msg.kind == "outcome":
                assert msg.round not in key_rounds

    def test_step_labels(self):
        report = run_protocol(ProtocolConfig(d=2, n=4, seed=3))
        steps_by_kind = {}
        for msg in report.messages:
            steps_by_kind.setdefault(msg.kind, set()).add(msg.step)
        assert steps_by_kind["receipt"] == {"2"}
        assert steps_by_kind["sift-mask"] == {"3"}
        assert steps_by_kind["order-choice"] == {"3"}
        assert steps_by_kind["outcome"] == {"3"}
        assert steps_by_kind["direction"] == {"3", "6"}
        assert steps_by_kind["check-result"] == {"5"}
        assert steps_by_kind["alpha-reveal"] == {"7"}

    def test_receipts_precede_mask(self):
        report = run_protocol(ProtocolConfig(d=2, n=4, seed=3))
        mask_seq = next(m.seq for m in report.messages if m.kind == "sift-mask")
        receipt_seqs = [m.seq for m in report.messages if m.kind == "receipt"]
        assert len(receipt_seqs) == 2
        assert max(receipt_seqs) < mask_seq

    def test_alpha_reveal_matches_schedule(self):
        cfg = ProtocolConfig(d=5, n=8, alpha_mode="string", seed=17)
        report = run_protocol(cfg)
        reveal = [m for m in report.messages if m.kind == "alpha-reveal"]
        assert len(reveal) == 1
        assert reveal[0].payload["alphas"] == [rec.alpha for rec in report.rounds]

    @pytest.mark.parametrize("mode,template", [("fixed-A", "A"), ("fixed-B", "B")])
    def test_fixed_order_modes(self, mode, template):
        report = run_protocol(ProtocolConfig(d=3, n=6, order_mode=mode, seed=2))
        assert {rec.order_template for rec in report.rounds if rec.is_test} == {template}
        assert transcript_audit(report) == []

    def test_bernoulli_mask_mode(self):
        report = run_protocol(ProtocolConfig(d=2, n=20, mask_mode="bernoulli", seed=8))
        assert not report.aborted
        assert report.key_agreement
        n_test = sum(rec.is_test for rec in report.rounds)
        assert 0 < n_test < 40


class TestAnnouncementOrder:
    def test_uniform(self):
        sampler = rng_stream(6, "order-balance")
        draws = [announcement_order(r, sampler) for r in range(10_000)]
        frac_a = draws.count("A") / len(draws)
        assert abs(frac_a - 0.5) < 5 * 0.005

    def test_negative_round_rejected(self):
        with pytest.raises(ContractError):
            announcement_order(-1, rng_stream(0, "x"))

    def test_templates_swap_speaker_roles(self):
        first_a = ORDER_TEMPLATES["A"][0]
        first_b = ORDER_TEMPLATES["B"][0]
        assert first_a == ("bob", "outcome")
        assert first_b == ("charlie", "outcome")


class TestSiftMask:
    def test_exact_mode_count(self):
        for total, fraction, expect in [(16, 0.5, 8), (10, 0.3, 3), (7, 0.5, 4)]:
            mask = draw_sift_mask(rng_stream(1, "m"), total, fraction, "exact")
            assert mask.sum() == expect
            assert set(np.unique(mask)) <= {0, 1}

    def test_bernoulli_mode_mean(self):
        mask = draw_sift_mask(rng_stream(2, "m"), 100_000, 0.5, "bernoulli")
        assert abs(mask.mean() - 0.5) < 5 * 0.5 / np.sqrt(100_000)


class TestReconstructKey:
    def test_frozen_examples(self):
        assert reconstruct_key([1], [1], [2], d=3) == (0,)
        assert reconstruct_key([1], [1], [0], d=2) == (0,)
        assert reconstruct_key([2, 0], [2, 1], [0, 1], d=5) == (1, 0)

    def test_accepts_outcome_objects(self):
        t = [MeasOutcome(1, "Y", "bob", 3)]
        u = [MeasOutcome(2, "Y", "charlie", 3)]
        assert reconstruct_key(t, u, [0]) == (0,)

    def test_honest_reconstruction_matches(self):
        report = run_protocol(ProtocolConfig(d=5, n=10, alpha=4, seed=13))
        key_recs = [rec for rec in report.rounds if not rec.is_test]
        rebuilt = reconstruct_key(
            [rec.bob_outcome for rec in key_recs],
            [rec.charlie_outcome for rec in key_recs],
            [rec.alpha for rec in key_recs],
            d=5,
        )
        assert rebuilt == report.alice_key

    def test_candidate_alphas_give_distinct_keys(self):
        # Before the alpha reveal every residue is consistent with the
        # players' data and each candidate yields a different key.
        d = 5
        report = run_protocol(ProtocolConfig(d=d, n=6, alpha=2, seed=21))
        key_recs = [rec for rec in report.rounds if not rec.is_test]
        t = [rec.bob_outcome for rec in key_recs]
        u = [rec.charlie_outcome for rec in key_recs]
        candidates = {reconstruct_key(t, u, [a] * len(t), d=d) for a in range(d)}
        assert len(candidates) == d
        assert report.alice_key in candidates

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            reconstruct_key([1, 2], [1], [0, 0], d=3)

    def test_dimension_required_for_plain_ints(self):
        with pytest.raises(ContractError, match="ambiguous"):
            reconstruct_key([1], [1], [0])

    def test_inconsistent_dimensions(self):
        with pytest.raises(ContractError):
            reconstruct_key([MeasOutcome(1, "Y", "bob", 3)], [MeasOutcome(1, "Y", "c", 4)], [0])


class TestAbortedRuns:
    @staticmethod
    def _aborting_report():
        strategy = bob_intercept_resend(2)
        for seed in range(64):
            report = run_protocol(ProtocolConfig(d=2, n=4, seed=seed), strategy)
            if report.aborted:
                return report
        raise AssertionError("no aborting seed found in 64 tries")

    def test_abort_semantics(self):
        report = self._aborting_report()
        assert isinstance(report.first_failed_round, int)
        assert report.alice_key == ()
        assert report.reconstructed_key == ()
        assert not report.key_agreement
        failed = next(rec for rec in report.rounds if rec.index == report.first_failed_round)
        assert failed.is_test and failed.passed is False

    def test_first_failure_is_earliest(self):
        report = self._aborting_report()
        failures = [rec.index for rec in report.rounds if rec.is_test and rec.passed is False]
        assert report.first_failed_round == min(failures)

    def test_abort_message_logged(self):
        report = self._aborting_report()
        aborts = [m for m in report.messages if m.kind == "abort"]
        assert len(aborts) == 1
        assert aborts[0].round == report.first_failed_round

    def test_no_key_round_messages_after_abort(self):
        report = self._aborting_report()
        assert all(m.step != "6" for m in report.messages)
        assert all(m.kind != "alpha-reveal" for m in report.messages)


class TestHookFaults:
    def test_faulting_hook_invalidates_but_completes(self):
        class _Faulty(AdversaryInstance):
            def on_qudit_in_transit(self, round_index, channel, tap):
                raise RuntimeError("boom")

        strategy = AdversaryStrategy(
            name="faulty", identity="external-eve", targets=("bob-channel",),
            factory=lambda rng: _Faulty(),
        )
        report = run_protocol(ProtocolConfig(d=2, n=4, seed=1), strategy)
        assert report.invalid
        assert not report.aborted
        assert report.key_agreement
        assert report.adversary == {"name": "faulty", "identity": "external-eve", "notes": {}}

    def test_dishonest_garbage_announcement_is_replaced(self):
        class _Garbage(AdversaryInstance):
            def on_announcement(self, step, kind, round_index, visible_log, honest_payload):
                return {"value": "not-an-int"}

        strategy = AdversaryStrategy(
            name="garbage", identity="dishonest-bob", targets=(),
            factory=lambda rng: _Garbage(),
        )
        report = run_protocol(ProtocolConfig(d=2, n=4, seed=1), strategy)
        assert report.invalid
        assert not report.aborted
        assert report.key_agreement


class TestTranscript:
    def test_line_format_round_trip(self):
        report = run_protocol(ProtocolConfig(d=3, n=4, seed=9))
        lines = transcript_lines(report)
        assert len(lines) == len(report.messages)
        for line, msg in zip(lines, report.messages):
            round_index, step, sender, kind, payload = parse_transcript_line(line)
            assert round_index == msg.round
            assert (step, sender, kind) == (msg.step, msg.sender, msg.kind)
            assert payload == msg.payload

    def test_global_messages_use_dash(self):
        report = run_protocol(ProtocolConfig(d=2, n=2, seed=0))
        assert transcript_lines(report)[0].startswith("-, 2, bob, receipt, ")

    def test_malformed_line_rejected(self):
        with pytest.raises(ContractError):
            parse_transcript_line("not a transcript line")


def _tamper(report, messages):
    return dataclasses.replace(report, messages=tuple(messages))


@pytest.fixture(scope="module")
def honest():
    return run_protocol(ProtocolConfig(d=3, n=6, seed=14))


class TestAudit:
    def test_honest_log_is_clean(self, honest):
        assert transcript_audit(honest) == []

    def test_adversarial_logs_are_clean(self):
        strategy = bob_intercept_resend(2)
        for seed in range(8):
            report = run_protocol(ProtocolConfig(d=2, n=4, seed=seed), strategy)
            assert transcript_audit(report) == []

    def test_forward_citation_flagged(self, honest):
        messages = list(honest.messages)
        target = next(i for i, m in enumerate(messages) if m.kind == "order-choice")
        messages[target] = dataclasses.replace(messages[target], cites=(messages[target].seq + 1,))
        violations = transcript_audit(_tamper(honest, messages))
        assert len(violations) == 1
        assert "not strictly earlier" in violations[0]

    def test_template_swap_flagged(self, honest):
        messages = list(honest.messages)
        first = next(
            i
            for i, m in enumerate(messages)
            if m.step == "3" and m.kind in ("outcome", "direction")
        )
        a, b = messages[first], messages[first + 1]
        messages[first] = dataclasses.replace(b, seq=a.seq)
        messages[first + 1] = dataclasses.replace(a, seq=b.seq)
        violations = transcript_audit(_tamper(honest, messages))
        assert len(violations) == 1
        assert "template" in violations[0]

    def test_key_round_outcome_flagged(self, honest):
        key_round = next(rec.index for rec in honest.rounds if not rec.is_test)
        messages = list(honest.messages)
        messages.append(
            Message(len(messages), key_round, "6", "bob", "outcome", {"value": 0})
        )
        violations = transcript_audit(_tamper(honest, messages))
        assert len(violations) == 1
        assert f"key round {key_round}" in violations[0]

    def test_receipt_after_mask_flagged(self, honest):
        messages = list(honest.messages)
        receipt = next(i for i, m in enumerate(messages) if m.kind == "receipt" and m.sender == "charlie")
        mask = next(i for i, m in enumerate(messages) if m.kind == "sift-mask")
        a, b = messages[receipt], messages[mask]
        messages[receipt] = dataclasses.replace(b, seq=a.seq)
        messages[mask] = dataclasses.replace(a, seq=b.seq)
        violations = transcript_audit(_tamper(honest, messages))
        assert len(violations) == 1
        assert "receipt" in violations[0]

    def test_non_dense_seq_flagged(self, honest):
        messages = list(honest.messages)
        messages[3] = dataclasses.replace(messages[3], seq=99)
        violations = transcript_audit(_tamper(honest, messages))
        assert any("append-only" in v for v in violations)
