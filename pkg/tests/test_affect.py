import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from affectnego.affect import (
    AffectError,
    AffectFrame,
    ArousalValence,
    Offer,
    PersonalityConfig,
    TimePerception,
    cosine_distance,
    euclidean_sq,
    mean_av,
)

unit = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
reals = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestArousalValence:
    def test_clamps_on_construction(self):
        p = ArousalValence(3.0, -2.5)
        assert p.arousal == 1.0 and p.valence == -1.0

    @given(unit, unit)
    def test_clamping_already_valid_is_identity(self, a, v):
        p = ArousalValence(a, v)
        assert (p.arousal, p.valence) == (a, v)

    def test_scaled_stays_in_square(self):
        assert ArousalValence(0.5, 0.5).scaled(4.0) == ArousalValence(1.0, 1.0)


class TestOffer:
    def test_conservation_enforced(self):
        with pytest.raises(AffectError):
            Offer(robot_points=60.0, human_points=50.0)

    def test_from_human_points_clamps(self):
        o = Offer.from_human_points(130.0)
        assert o.human_points == 100.0 and o.robot_points == 0.0

    @given(st.floats(min_value=-50.0, max_value=150.0, allow_nan=False))
    def test_conservation_property(self, h):
        o = Offer.from_human_points(h)
        assert abs(o.robot_points + o.human_points - 100.0) <= 1e-9

    def test_rounded_for_display(self):
        assert Offer.from_human_points(43.7).rounded() == (56, 44)


class TestAffectFrame:
    def test_two_dim_features_must_match_av(self):
        f = AffectFrame.from_av(0, ArousalValence(0.3, -0.2))
        assert f.features == (0.3, -0.2)

    def test_negative_step_rejected(self):
        with pytest.raises(AffectError):
            AffectFrame.from_av(-1, ArousalValence(0, 0))


class TestPersonalityConfig:
    def test_custom_requires_positive_tau(self):
        with pytest.raises(AffectError):
            PersonalityConfig(time_perception=TimePerception.CUSTOM, custom_tau=0.0)

    def test_named_taus(self):
        assert PersonalityConfig(time_perception=TimePerception.PATIENT).tau == 0.01
        assert PersonalityConfig(time_perception=TimePerception.IMPATIENT).tau == 0.08
        assert PersonalityConfig().tau is None


class TestEuclideanSq:
    def test_identity(self):
        assert euclidean_sq((0, 0), (0, 0)) == 0.0

    def test_unit_displacement(self):
        assert euclidean_sq((1, 0), (0, 0)) == 1.0

    def test_hand_example(self):
        assert euclidean_sq((0.3, -0.4), (0, 0)) == pytest.approx(0.25)

    def test_dimension_mismatch(self):
        with pytest.raises(AffectError):
            euclidean_sq((1, 2), (1, 2, 3))

    @given(st.lists(reals, min_size=1, max_size=6), st.data())
    def test_symmetry_and_nonnegativity(self, a, data):
        b = data.draw(st.lists(reals, min_size=len(a), max_size=len(a)))
        assert euclidean_sq(a, b) >= 0.0
        assert euclidean_sq(a, b) == euclidean_sq(b, a)


class TestCosineDistance:
    def test_identity(self):
        assert cosine_distance((1, 0), (1, 0)) == 0.0

    def test_orthogonal(self):
        assert cosine_distance((1, 0), (0, 1)) == pytest.approx(1.0)

    def test_hand_example(self):
        assert cosine_distance((1, 0), (1, 1)) == pytest.approx(1.0 - 1.0 / math.sqrt(2))

    def test_zero_norm_rejected(self):
        with pytest.raises(AffectError):
            cosine_distance((0, 0), (1, 0))

    @given(st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False),
                    min_size=2, max_size=4),
           st.data())
    def test_range(self, a, data):
        b = data.draw(st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False),
                               min_size=len(a), max_size=len(a)))
        # guard against underflow-to-zero norms, which are a contract error
        if sum(x * x for x in a) == 0.0 or sum(y * y for y in b) == 0.0:
            return
        assert 0.0 <= cosine_distance(a, b) <= 2.0


class TestMeanAv:
    def test_singleton(self):
        assert mean_av([ArousalValence(0.5, 0.5)]) == ArousalValence(0.5, 0.5)

    def test_symmetry(self):
        assert mean_av([ArousalValence(1, 1), ArousalValence(-1, -1)]) == ArousalValence(0, 0)

    def test_hand_average(self):
        m = mean_av([ArousalValence(0.2, 0.4), ArousalValence(0.6, 0.0)])
        assert m.arousal == pytest.approx(0.4)
        assert m.valence == pytest.approx(0.2)

    def test_empty_rejected(self):
        with pytest.raises(AffectError):
            mean_av([])
