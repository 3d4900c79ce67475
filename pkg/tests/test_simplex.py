import numpy as np
import pytest

from equivboot.errors import DimensionMismatch, DimensionTooSmall, InvalidCounts, NegativeEntry, SumNotOne
from equivboot.simplex import CountVector, NormKind, ProbVector, as_counts, theta, validate_prob


class TestProbVector:
    def test_valid_vector_is_kept(self):
        p = ProbVector([0.2, 0.3, 0.5])
        assert p.k == 3
        np.testing.assert_allclose(p.entries, [0.2, 0.3, 0.5])

    def test_renormalises_within_tolerance(self):
        p = ProbVector([0.1, 0.2, 0.7 + 5e-13])
        assert abs(p.entries.sum() - 1.0) <= 1e-15

    def test_sum_off_by_more_than_tolerance(self):
        with pytest.raises(SumNotOne):
            ProbVector([0.2, 0.3, 0.6])

    def test_negative_entry(self):
        with pytest.raises(NegativeEntry):
            ProbVector([1.1, -0.1])

    def test_too_short(self):
        with pytest.raises(DimensionTooSmall):
            ProbVector([1.0])

    def test_non_finite(self):
        with pytest.raises(SumNotOne):
            ProbVector([np.nan, 1.0])

    def test_entries_are_read_only(self):
        p = ProbVector([0.5, 0.5])
        with pytest.raises(ValueError):
            p.entries[0] = 1.0

    def test_equality_and_array_protocol(self):
        assert ProbVector([0.5, 0.5]) == validate_prob([0.5, 0.5])
        assert np.asarray(ProbVector([0.25, 0.75])).tolist() == [0.25, 0.75]


class TestCountVector:
    def test_total(self):
        c = CountVector([3, 7, 0])
        assert c.total == 10
        assert c.counts.dtype == np.int64

    def test_integral_floats_accepted(self):
        assert as_counts(np.array([2.0, 3.0])).total == 5

    @pytest.mark.parametrize("bad", [[1.5, 2], [-1, 3], [0, 0], ["a", "b"]])
    def test_rejects_invalid(self, bad):
        with pytest.raises(InvalidCounts):
            CountVector(np.array(bad))


class TestHelpers:
    def test_theta(self):
        np.testing.assert_allclose(theta([0.6, 0.4], [0.4, 0.6]), [0.2, -0.2])

    def test_theta_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            theta([0.5, 0.5], [0.2, 0.3, 0.5])

    @pytest.mark.parametrize("text,kind", [("l1", NormKind.L1), ("LINF", NormKind.LINF), ("l2", NormKind.L2),
                                           ("inf", NormKind.LINF)])
    def test_norm_parse(self, text, kind):
        assert NormKind.parse(text) is kind

    def test_norm_parse_unknown(self):
        with pytest.raises(ValueError):
            NormKind.parse("l3")
