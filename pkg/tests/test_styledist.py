"""Grassmann/texture distance matrices, blending, and CSV round-trip."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stylesym.errors import ConfigError, DataError, NumericError
from stylesym.styledist import (
    DistanceMatrix,
    combine,
    grassmann_distance,
    normalize_offdiag,
    pairwise_distances,
    read_distance_csv,
    symmetry_distances,
    write_distance_csv,
)


def _random_stack(rng, k, d):
    return rng.standard_normal((k, d))


class TestGrassmannDistance:
    def test_identical_is_exactly_zero(self):
        a = np.random.default_rng(0).standard_normal((3, 6))
        assert grassmann_distance(a, a) == 0.0

    def test_quarter_turn_line(self):
        a = np.array([[1.0, 0.0]])
        b = np.array([[1.0, 1.0]]) / np.sqrt(2.0)
        assert grassmann_distance(a, b) == pytest.approx(np.pi / 4, abs=1e-12)

    def test_orthogonal_planes(self):
        a = np.eye(4)[:2]
        b = np.eye(4)[2:]
        assert grassmann_distance(a, b) == pytest.approx(np.pi / np.sqrt(2), abs=1e-12)

    def test_exchange_symmetry_is_exact(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = _random_stack(rng, 3, 7)
            b = _random_stack(rng, 3, 7)
            assert grassmann_distance(a, b) == grassmann_distance(b, a)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_basis_mixing_invariance(self, seed):
        rng = np.random.default_rng(seed)
        a = _random_stack(rng, 2, 5)
        mix = rng.standard_normal((2, 2))
        while abs(np.linalg.det(mix)) < 0.1:
            mix = rng.standard_normal((2, 2))
        assert grassmann_distance(a, mix @ a) < 1e-7

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (_random_stack(rng, 2, 6) for _ in range(3))
        dab = grassmann_distance(a, b)
        dbc = grassmann_distance(b, c)
        dac = grassmann_distance(a, c)
        assert dac <= dab + dbc + 1e-9

    def test_ambient_mismatch(self):
        with pytest.raises(DataError, match="ambient"):
            grassmann_distance(np.eye(3), np.eye(4))


class TestDistanceMatrix:
    def test_validation(self):
        with pytest.raises(DataError, match="square"):
            DistanceMatrix(labels=("a",), values=np.zeros((1, 2)))
        with pytest.raises(DataError, match="labels"):
            DistanceMatrix(labels=("a",), values=np.zeros((2, 2)))
        with pytest.raises(DataError, match="unique"):
            DistanceMatrix(labels=("a", "a"), values=np.zeros((2, 2)))
        with pytest.raises(DataError, match="symmetric"):
            DistanceMatrix(labels=("a", "b"), values=np.array([[0, 1], [2, 0.0]]))
        with pytest.raises(DataError, match="diagonal"):
            DistanceMatrix(labels=("a", "b"), values=np.array([[1, 0], [0, 1.0]]))
        with pytest.raises(DataError, match="negative"):
            DistanceMatrix(labels=("a", "b"), values=np.array([[0, -1], [-1, 0.0]]))

    def test_pairwise_builds_symmetric_zero_diag(self):
        labels = ("x", "y", "z")
        items = [1.0, 4.0, 6.0]
        dm = pairwise_distances(labels, items, lambda a, b: abs(a - b))
        assert dm.values[0, 1] == 3.0 and dm.values[1, 0] == 3.0
        assert np.all(np.diag(dm.values) == 0.0)
        assert dm.offdiag().tolist() == [3.0, 5.0, 2.0]

    def test_symmetry_distances_orders_pairs(self):
        stacks = [np.eye(4)[:2], np.eye(4)[2:], np.eye(4)[:2]]
        dm = symmetry_distances(("a", "b", "c"), stacks)
        assert dm.values[0, 2] == 0.0
        assert dm.values[0, 1] == pytest.approx(np.pi / np.sqrt(2))


class TestNormalizeCombine:
    def _toy(self, scale):
        values = scale * np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 4.0], [2.0, 4.0, 0.0]])
        return DistanceMatrix(labels=("a", "b", "c"), values=values)

    def test_normalize_peak_is_one(self):
        dm = normalize_offdiag(self._toy(3.5))
        assert dm.offdiag().max() == 1.0
        assert dm.values[0, 1] == pytest.approx(0.25)

    def test_normalize_all_zero_raises(self):
        dm = DistanceMatrix(labels=("a", "b"), values=np.zeros((2, 2)))
        with pytest.raises(NumericError, match="normalize"):
            normalize_offdiag(dm)

    def test_combine_endpoints_bitwise(self):
        sym = self._toy(2.0)
        tex = DistanceMatrix(
            labels=("a", "b", "c"),
            values=np.array([[0.0, 7.0, 1.0], [7.0, 0.0, 3.0], [1.0, 3.0, 0.0]]),
        )
        only_tex = combine(sym, tex, lam=0.0)
        only_sym = combine(sym, tex, lam=1.0)
        np.testing.assert_array_equal(only_tex.values, normalize_offdiag(tex).values)
        np.testing.assert_array_equal(only_sym.values, normalize_offdiag(sym).values)

    def test_combine_midpoint_hand_value(self):
        sym = self._toy(1.0)
        tex = self._toy(10.0)  # same shape after normalization
        mid = combine(sym, tex, lam=0.5)
        np.testing.assert_allclose(mid.values, normalize_offdiag(sym).values)

    def test_combine_bad_lambda(self):
        sym = self._toy(1.0)
        with pytest.raises(ConfigError, match="blend weight"):
            combine(sym, sym, lam=1.5)

    def test_combine_label_mismatch(self):
        sym = self._toy(1.0)
        tex = DistanceMatrix(labels=("a", "b", "zz"), values=sym.values)
        with pytest.raises(DataError, match="label"):
            combine(sym, tex, lam=0.5)


class TestCsv:
    def test_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(8)
        raw = rng.random((4, 4))
        values = raw + raw.T
        np.fill_diagonal(values, 0.0)
        dm = DistanceMatrix(labels=("w", "x", "y", "z"), values=values)
        path = tmp_path / "d.csv"
        write_distance_csv(path, dm)
        back = read_distance_csv(path)
        assert back.labels == dm.labels
        np.testing.assert_array_equal(back.values, dm.values)

    def test_write_is_deterministic(self, tmp_path):
        dm = DistanceMatrix(labels=("a", "b"), values=np.array([[0.0, 0.3], [0.3, 0.0]]))
        write_distance_csv(tmp_path / "1.csv", dm)
        write_distance_csv(tmp_path / "2.csv", dm)
        assert (tmp_path / "1.csv").read_bytes() == (tmp_path / "2.csv").read_bytes()

    def test_read_errors(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            read_distance_csv(tmp_path / "absent.csv")
        bad = tmp_path / "bad.csv"
        bad.write_text("label,a,b\na,0.0,1.0\nOOPS,1.0,0.0\n")
        with pytest.raises(DataError, match="row label"):
            read_distance_csv(bad)
        bad.write_text("label,a,b\na,0.0,1.0\n")
        with pytest.raises(DataError, match="data rows"):
            read_distance_csv(bad)
        bad.write_text("nope,a\na,0.0\n")
        with pytest.raises(DataError, match="header"):
            read_distance_csv(bad)
