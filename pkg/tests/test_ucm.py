import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vlnstack.conformal import ConformalModel, PredictionSet
from vlnstack.core import ActionDistribution, InvalidArgument
from vlnstack.ucm import (
    ALPHA_CAP,
    ReasonerUnavailable,
    ReasonerVerdict,
    UcmConfig,
    decide,
    fuse,
    sparse_reasoner_distribution,
    uncertainty_weight,
)

OVERRIDE_CASE = ActionDistribution((0.56, 0.43, 0.01))  # g10, g8, other


def fixed(chosen, c=0.9):
    calls = []

    def reasoner(pset, ctx):
        calls.append(pset)
        return ReasonerVerdict(chosen, c, "")

    reasoner.calls = calls
    return reasoner


class TestWeight:
    @pytest.mark.parametrize("card, alpha", [(2, 0.2), (20, 0.9), (9, 0.9), (1, 0.1), (5, 0.5)])
    def test_values(self, card, alpha):
        assert uncertainty_weight(card) == pytest.approx(alpha, abs=1e-15)

    def test_zero_rejected(self):
        with pytest.raises(InvalidArgument):
            uncertainty_weight(0)

    def test_l_max(self):
        assert uncertainty_weight(2, l_max=4) == 0.5
        with pytest.raises(InvalidArgument):
            uncertainty_weight(2, l_max=0)

    @given(st.integers(1, 1000), st.integers(1, 50))
    def test_capped(self, card, l_max):
        assert 0 < uncertainty_weight(card, l_max) <= ALPHA_CAP


class TestSparse:
    def test_definitional(self):
        assert sparse_reasoner_distribution(ReasonerVerdict(1, 0.9), 3).tolist() == [0, 0.9, 0]

    def test_zero_confidence(self):
        assert not sparse_reasoner_distribution(ReasonerVerdict(2, 0.0), 4).any()

    def test_singleton(self):
        assert sparse_reasoner_distribution(ReasonerVerdict(0, 1.0), 1).tolist() == [1.0]

    def test_out_of_range(self):
        with pytest.raises(InvalidArgument):
            sparse_reasoner_distribution(ReasonerVerdict(3, 0.5), 3)

    def test_confidence_validated(self):
        with pytest.raises(InvalidArgument):
            ReasonerVerdict(0, 1.5)


class TestFuse:
    def test_override_case_arithmetic(self):
        q = sparse_reasoner_distribution(ReasonerVerdict(1, 0.9), 3)
        f = fuse(OVERRIDE_CASE, q, 0.2)
        assert f[1] == pytest.approx(0.524, abs=1e-12)
        assert f[0] == pytest.approx(0.448, abs=1e-12)
        assert int(np.argmax(f)) == 1

    def test_alpha_zero_identity(self):
        assert fuse(OVERRIDE_CASE, np.array([0, 0.9, 0]), 0.0).tolist() == list(OVERRIDE_CASE.probs)

    def test_worst_case_bound(self):
        for p in ([0.98, 0.01, 0.01], [0.1, 0.1, 0.8]):
            f = fuse(np.array(p), np.array([0.0, 1.0, 0.0]), 0.9)
            assert f[1] >= 0.9 and int(np.argmax(f)) == 1

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgument):
            fuse(OVERRIDE_CASE, np.zeros(2), 0.2)

    def test_alpha_range(self):
        with pytest.raises(InvalidArgument):
            fuse(OVERRIDE_CASE, np.zeros(3), 0.95)

    @given(st.lists(st.floats(0, 1), min_size=2, max_size=8), st.floats(0, 0.9), st.floats(0, 1), st.data())
    def test_sum_identity(self, raw, alpha, c, data):
        if sum(raw) == 0:
            raw = [1.0] + raw[1:]
        p = np.asarray(raw) / sum(raw)
        j = data.draw(st.integers(0, len(p) - 1))
        f = fuse(p, sparse_reasoner_distribution(ReasonerVerdict(j, c), len(p)), alpha)
        assert abs(f.sum() - ((1 - alpha) + alpha * c)) <= 1e-9


# dyadic grid: every product and sum below is exact in binary floating point
DYADIC = [Fraction(i, 16) for i in range(17)]
ALPHAS = [a for a in DYADIC if a <= Fraction(9, 10)]


def test_override_threshold_exhaustive_dyadic():
    checked = 0
    for p1, p2, alpha, c in itertools.product(DYADIC, DYADIC, ALPHAS, DYADIC):
        if not (p1 > p2 and p1 + p2 <= 1):
            continue
        rest = 1 - p1 - p2
        p = np.array([float(p1), float(p2), float(rest / 2), float(rest / 2)])
        if p[2] > p2:
            continue
        f = fuse(p, sparse_reasoner_distribution(ReasonerVerdict(1, float(c)), 4), float(alpha))
        flips = int(np.argmax(f)) == 1
        # exact rational oracle: alpha*c > (1-alpha)(p1-p2)
        assert flips == (alpha * c > (1 - alpha) * (p1 - p2))
        if alpha > 0:
            assert flips == (c > (1 - alpha) * (p1 - p2) / alpha)
        checked += 1
    assert checked > 5_000


def test_override_threshold_through_decide():
    # alpha comes from the set size: |C| = 2 with several L_max
    grid = np.round(np.linspace(0.0, 1.0, 41), 6)
    checked = 0
    for l_max in (3, 4, 5, 8, 10, 16):
        for p1, p2 in itertools.product(grid, grid):
            if not (p1 > p2 and p1 + p2 <= 1.0):
                continue
            probs = ActionDistribution((p1, p2, max(1.0 - p1 - p2, 0.0)))
            if probs.probs[2] >= p2 or p2 == 0:
                continue
            tau = 1.0 - p2  # exactly the top two are in the set
            for c in grid:
                out = decide(probs, ConformalModel.fixed(tau), fixed(1, float(c)), config=UcmConfig(l_max=l_max))
                if out.prediction_set.member_indices != (0, 1):
                    # third score rounds onto the threshold; alpha would differ
                    continue
                assert out.reasoner_invoked
                a = out.alpha
                assert a == min(2 / l_max, 0.9)
                expected = (1 - a) * p2 + a * c > (1 - a) * p1
                assert (out.selected == 1) == expected
                checked += 1
    assert checked > 10_000


def test_agreement_stability_exhaustive():
    for p1, p2, alpha, c in itertools.product(DYADIC, DYADIC, ALPHAS, DYADIC):
        if not (p1 >= p2 and p1 + p2 <= 1):
            continue
        p = np.array([float(p1), float(p2), float(1 - p1 - p2)])
        j = int(np.argmax(p))
        f = fuse(p, sparse_reasoner_distribution(ReasonerVerdict(j, float(c)), 3), float(alpha))
        assert int(np.argmax(f)) == j


class TestDecide:
    def test_singleton_skips_reasoner(self):
        r = fixed(1)
        out = decide(ActionDistribution((1.0, 0.0, 0.0)), ConformalModel.fixed(0.5), r)
        assert out.selected == 0 and not out.reasoner_invoked and out.alpha is None
        assert r.calls == []

    def test_override_case_replay_selects_runner_up(self):
        r = fixed(1, 0.9)
        out = decide(OVERRIDE_CASE, ConformalModel.fixed(0.97), r)
        assert out.reasoner_invoked and out.alpha == pytest.approx(0.2)
        assert out.prediction_set.member_indices == (0, 1)
        assert out.selected == 1
        assert out.fused[1] == pytest.approx(0.524) and out.fused[0] == pytest.approx(0.448)
        assert r.calls[0].member_indices == (0, 1)

    @given(st.floats(0, 1))
    def test_agreement(self, c):
        out = decide(OVERRIDE_CASE, ConformalModel.fixed(1.0), fixed(0, c), config=UcmConfig(l_max=1))
        assert out.selected == 0

    def test_gate_soundness(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            p = rng.dirichlet(np.ones(5))
            d = ActionDistribution(tuple(p))
            r = fixed(d.argmax())
            tau = float(rng.random())
            out = decide(d, ConformalModel.fixed(tau), r)
            assert out.reasoner_invoked == (out.prediction_set.cardinality > 1)
            assert len(r.calls) == int(out.reasoner_invoked)

    def test_outside_set_retried_then_fallback(self):
        r = fixed(2)
        out = decide(OVERRIDE_CASE, ConformalModel.fixed(0.97), r)
        assert len(r.calls) == 2
        assert out.reasoner_failed and out.selected == 0 and "outside" in out.error

    def test_retry_recovers(self):
        answers = iter([ReasonerVerdict(2, 0.9), ReasonerVerdict(1, 0.9)])
        out = decide(OVERRIDE_CASE, ConformalModel.fixed(0.97), lambda ps, ctx: next(answers))
        assert not out.reasoner_failed and out.selected == 1

    def test_exception_fallback_and_strict(self):
        def broken(ps, ctx):
            raise TimeoutError("no answer")

        out = decide(OVERRIDE_CASE, ConformalModel.fixed(0.97), broken)
        assert out.reasoner_failed and out.selected == OVERRIDE_CASE.argmax() and "TimeoutError" in out.error
        with pytest.raises(ReasonerUnavailable):
            decide(OVERRIDE_CASE, ConformalModel.fixed(0.97), broken, config=UcmConfig(strict=True))

    def test_zero_confidence_literal(self):
        out = decide(OVERRIDE_CASE, ConformalModel.fixed(0.97), fixed(1, 0.0))
        assert out.fused == pytest.approx(tuple(0.8 * p for p in OVERRIDE_CASE.probs))
        assert out.selected == 0

    def test_audit_record(self):
        out = decide(OVERRIDE_CASE, ConformalModel.fixed(0.97), fixed(1))
        rec = out.audit(OVERRIDE_CASE, 0.97)
        assert {"planner_probs", "tau", "set", "alpha", "verdict", "fused", "selected"} <= set(rec)
        assert rec["set"] == [0, 1] and rec["selected"] == 1

    def test_context_passed_through(self):
        seen = []

        def r(ps, ctx):
            seen.append(ctx)
            return ReasonerVerdict(0, 0.5)

        decide(OVERRIDE_CASE, ConformalModel.fixed(0.97), r, context="ctx")
        assert seen == ["ctx"]

    def test_prediction_set_passed(self):
        out = decide(OVERRIDE_CASE, ConformalModel.fixed(0.995), fixed(0))
        assert isinstance(out.prediction_set, PredictionSet) and out.prediction_set.cardinality == 3
