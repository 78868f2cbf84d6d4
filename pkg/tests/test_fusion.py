import pytest
from hypothesis import given
from hypothesis import strategies as st

from deferkit import fusion
from deferkit.errors import EmptyInput, MissingSource, SingleClassError

probs = st.floats(0.0, 1.0)


def test_even_blend_worked_value():
    assert fusion.combine(0.6, 0.8, 0.5) == pytest.approx(0.7, abs=1e-12)


def test_boundary_alphas():
    assert fusion.combine(0.3, 0.9, 0.0) == 0.3
    assert fusion.combine(0.3, 0.9, 1.0) == 0.9


def test_missing_source():
    with pytest.raises(MissingSource):
        fusion.combine(None, 0.5, 0.5)
    with pytest.raises(MissingSource):
        fusion.combine(0.5, None, 0.5)


@given(probs, probs, probs)
def test_combine_within_input_range(t, e, alpha):
    mu = fusion.combine(t, e, alpha)
    assert min(t, e) - 1e-12 <= mu <= max(t, e) + 1e-12


@given(probs, probs, probs, probs)
def test_combine_monotone_in_each_input(t, e, delta, alpha):
    assert fusion.combine(min(t + delta, 1.0), e, alpha) >= fusion.combine(t, e, alpha) - 1e-12
    assert fusion.combine(t, min(e + delta, 1.0), alpha) >= fusion.combine(t, e, alpha) - 1e-12


@given(probs, probs, probs)
def test_combine_symmetry(t, e, alpha):
    assert fusion.combine(t, e, alpha) == pytest.approx(
        fusion.combine(e, t, 1.0 - alpha), abs=1e-12
    )


class TestFitAlpha:
    def separating_fixture(self, adversarial_t):
        rows = []
        for i in range(20):
            label = i % 2
            eps = 0.9 if label else 0.1
            t = (1.0 - label) if adversarial_t else 0.5
            rows.append((t, eps, label))
        return rows

    def test_hidden_source_perfect_t_constant(self):
        # Exhaustive grid oracle: every alpha with combined >= 0.5 matching
        # labels ties at F1 = 1; fitted alpha must be among the maximizers.
        rows = self.separating_fixture(adversarial_t=False)
        alpha = fusion.fit_alpha(rows, grid_step=0.01)
        mu_ok = all(
            (fusion.combine(t, e, alpha) >= 0.5) == bool(y) for t, e, y in rows
        )
        assert mu_ok

    def test_adversarial_t_pushes_alpha_above_half(self):
        rows = self.separating_fixture(adversarial_t=True)
        alpha = fusion.fit_alpha(rows, grid_step=0.01)
        assert alpha > 0.5

    def test_identical_sources_tie_break_to_half(self):
        rows = [(0.8, 0.8, 1), (0.2, 0.2, 0), (0.7, 0.7, 1), (0.1, 0.1, 0)]
        assert fusion.fit_alpha(rows, grid_step=0.01) == pytest.approx(0.5)

    def test_single_class_error(self):
        with pytest.raises(SingleClassError):
            fusion.fit_alpha([(0.5, 0.5, 1), (0.4, 0.6, 1)])

    def test_empty_error(self):
        with pytest.raises(EmptyInput):
            fusion.fit_alpha([])

    def test_permutation_invariance(self):
        rows = self.separating_fixture(adversarial_t=True)
        assert fusion.fit_alpha(rows) == fusion.fit_alpha(list(reversed(rows)))
