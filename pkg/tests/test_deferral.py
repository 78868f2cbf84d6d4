import numpy as np
import pytest

from deferkit import deferral
from deferkit.core import PredictionRecord
from deferkit.deferral import AccuracyRejectionCurve
from deferkit.errors import BudgetRange, MissingSource, UnlabeledRecords
from oracles import naive_trapezoid


def record(i, t=None, e=None, mu=None, label=None):
    return PredictionRecord(
        id=f"c{i:04d}", report_text="r", label=label,
        t_hat=t, epsilon_hat=e, mu_hat=mu,
    )


class TestRanking:
    def test_transform_boundaries(self):
        assert deferral.relative_confidence(0.5) == 0.0
        assert deferral.relative_confidence(0.0) == 1.0
        assert deferral.relative_confidence(1.0) == 1.0

    def test_worked_ordering(self):
        records = [record(0, t=0.75), record(1, t=0.5), record(2, t=0.1)]
        ranking = deferral.rank_for_deferral(records, deferral.VERBALISED)
        got = [(e.p_hat, e.p_tilde) for e in ranking.entries]
        assert got == [(0.5, 0.0), (0.75, 0.5), (0.1, pytest.approx(0.8))]

    def test_missing_source(self):
        with pytest.raises(MissingSource):
            deferral.rank_for_deferral([record(0, t=0.5)], deferral.HIDDEN_STATE)

    def test_ties_sorted_by_id(self):
        records = [record(3, t=0.6), record(1, t=0.4), record(2, t=0.6)]
        ranking = deferral.rank_for_deferral(records, deferral.VERBALISED)
        assert [e.id for e in ranking.entries] == ["c0001", "c0002", "c0003"]

    def test_invariant_under_probability_flip(self):
        rng = np.random.default_rng(0)
        probs = rng.random(50)
        a = deferral.rank_for_deferral(
            [record(i, t=float(p)) for i, p in enumerate(probs)], deferral.VERBALISED)
        b = deferral.rank_for_deferral(
            [record(i, t=float(1 - p)) for i, p in enumerate(probs)], deferral.VERBALISED)
        assert [e.id for e in a.entries] == [e.id for e in b.entries]
        for x, y in zip(a.entries, b.entries):
            assert x.p_tilde == pytest.approx(y.p_tilde, abs=1e-12)


class TestPartition:
    def ranking(self, probs):
        return deferral.rank_for_deferral(
            [record(i, t=float(p)) for i, p in enumerate(probs)], deferral.VERBALISED
        )

    def test_theta_zero_defers_nothing(self):
        deferred, autonomous = deferral.partition(self.ranking([0.5, 0.1, 0.9]), 0.0)
        assert deferred == []
        assert len(autonomous) == 3

    def test_theta_one_defers_all_but_certain(self):
        deferred, autonomous = deferral.partition(self.ranking([0.5, 0.3, 1.0]), 1.0)
        assert len(deferred) == 2
        assert len(autonomous) == 1

    def test_partition_laws_random(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            ranking = self.ranking(rng.random(30))
            for theta in rng.random(10):
                deferred, autonomous = deferral.partition(ranking, float(theta))
                assert set(deferred) | set(autonomous) == {e.id for e in ranking.entries}
                assert set(deferred) & set(autonomous) == set()


class TestBudget:
    def distinct_ranking(self, n, seed=0):
        rng = np.random.default_rng(seed)
        while True:
            probs = rng.random(n)
            p_tilde = 2 * np.abs(probs - 0.5)
            if len(set(p_tilde.tolist())) == n:
                return deferral.rank_for_deferral(
                    [record(i, t=float(p)) for i, p in enumerate(probs)],
                    deferral.VERBALISED,
                )

    def test_budget_zero(self):
        ranking = self.distinct_ranking(10)
        result = deferral.threshold_for_budget(ranking, 0)
        assert result.theta == ranking.entries[0].p_tilde
        assert result.deferred_count == 0
        assert not result.boundary_tie

    def test_budget_thirty_of_six_hundred(self):
        ranking = self.distinct_ranking(600, seed=2)
        result = deferral.threshold_for_budget(ranking, 30)
        assert result.deferred_count == 30
        assert not result.boundary_tie
        deferred, _ = deferral.partition(ranking, result.theta)
        assert len(deferred) == 30
        # theta is the 31st smallest relative confidence
        assert result.theta == ranking.entries[30].p_tilde

    def test_all_ties_defer_none_with_warning(self):
        records = [record(i, t=0.5) for i in range(5)]
        ranking = deferral.rank_for_deferral(records, deferral.VERBALISED)
        result = deferral.threshold_for_budget(ranking, 3)
        assert result.deferred_count == 0
        assert result.boundary_tie

    def test_budget_range(self):
        ranking = self.distinct_ranking(5)
        with pytest.raises(BudgetRange):
            deferral.threshold_for_budget(ranking, 5)
        with pytest.raises(BudgetRange):
            deferral.threshold_for_budget(ranking, -1)


class TestCurve:
    def test_all_correct(self):
        records = [record(i, t=0.9, label=1) for i in range(4)]
        curve = deferral.accuracy_rejection_curve(
            records, deferral.VERBALISED, deferral.VERBALISED)
        assert all(a == 1.0 for _, a in curve.points)

    def test_worked_four_case_curve(self):
        # One wrong case with the smallest relative confidence leaves first.
        records = [
            record(0, t=0.55, label=0),   # wrong, p_tilde 0.1
            record(1, t=0.8, label=1),    # right, 0.6
            record(2, t=0.1, label=0),    # right, 0.8
            record(3, t=0.95, label=1),   # right, 0.9
        ]
        curve = deferral.accuracy_rejection_curve(
            records, deferral.VERBALISED, deferral.VERBALISED)
        rates = [r for r, _ in curve.points]
        accs = [a for _, a in curve.points]
        assert rates == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert accs == [0.75, 1.0, 1.0, 1.0, 1.0]
        assert deferral.auarc(curve) == pytest.approx(0.96875, abs=1e-12)
        assert naive_trapezoid(curve.points) == pytest.approx(0.96875, abs=1e-12)

    def test_separate_rank_and_classification_sources(self):
        records = [
            record(0, t=0.6, e=0.9, mu=0.75, label=1),
            record(1, t=0.4, e=0.2, mu=0.3, label=0),
        ]
        curve = deferral.accuracy_rejection_curve(
            records, deferral.HIDDEN_STATE, deferral.COMBINED)
        assert curve.rank_source == deferral.HIDDEN_STATE
        assert curve.classification_source == deferral.COMBINED

    def test_unlabeled_rejected(self):
        with pytest.raises(UnlabeledRecords):
            deferral.accuracy_rejection_curve(
                [record(0, t=0.5)], deferral.VERBALISED, deferral.VERBALISED)

    def test_ideal_ranker_monotone(self):
        # Misclassified cases all ranked first: accuracy non-decreasing.
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(5, 40))
            records = []
            for i in range(n):
                correct = rng.random() < 0.7
                if correct:
                    p = float(rng.uniform(0.75, 1.0))
                    records.append(record(i, t=p, label=1))
                else:
                    p = float(rng.uniform(0.5, 0.7))
                    records.append(record(i, t=p, label=0))
            curve = deferral.accuracy_rejection_curve(
                records, deferral.VERBALISED, deferral.VERBALISED)
            accs = [a for _, a in curve.points]
            assert all(b >= a - 1e-12 for a, b in zip(accs, accs[1:]))
            # Monotone curves keep the area at or above the starting accuracy.
            assert accs[0] - 1e-12 <= deferral.auarc(curve) <= 1.0 + 1e-12


class TestAuarc:
    def test_constant_accuracy(self):
        for a in (1.0, 0.62, 0.0):
            curve = AccuracyRejectionCurve(
                points=tuple((i / 10, a) for i in range(11)),
                rank_source=deferral.VERBALISED,
                classification_source=deferral.VERBALISED,
            )
            assert deferral.auarc(curve) == pytest.approx(a, abs=1e-12)

    def test_bounds(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            n = int(rng.integers(3, 30))
            records = [
                record(i, t=float(rng.random()), label=int(rng.integers(0, 2)))
                for i in range(n)
            ]
            curve = deferral.accuracy_rejection_curve(
                records, deferral.VERBALISED, deferral.VERBALISED)
            value = deferral.auarc(curve)
            assert curve.points[0][1] - 1e-12 <= 1.0
            assert value <= 1.0 + 1e-12
