from fractions import Fraction
import itertools

import numpy as np
import pytest

from edapprox.errors import DependencyError, InvalidInputError
from edapprox.oracles import (
    BitString,
    MinProductPoint,
    PointSet,
    as_bitstring,
    edit_distance_bfs,
    exact_edit_distance,
    ideal_distance_exact,
    ideal_distance_sets,
    min_product_distance,
    sum_product_distance,
    temd_bruteforce,
    temd_exact,
)

from .conftest import random_bits


class TestBitString:
    def test_alphabet_enforced(self):
        with pytest.raises(InvalidInputError):
            BitString(np.array([0, 2]))
        with pytest.raises(InvalidInputError):
            BitString.from_text("0120")

    def test_substring_is_one_based(self):
        x = BitString.from_text("0011010")
        assert x.substring(3, 3).to_text() == "110"
        assert x.substring(1, 7) == x
        assert len(x.substring(8, 0)) == 0
        for i, m in [(0, 1), (7, 2), (1, 8)]:
            with pytest.raises(InvalidInputError):
                x.substring(i, m)

    def test_bytes_and_concat(self):
        x = BitString.from_bytes(b"ab")
        assert x.alphabet == 256 and list(x.symbols) == [97, 98]
        assert len(as_bitstring("01") + as_bitstring("1")) == 3
        assert hash(as_bitstring("0101")) == hash(BitString.from_text("0101"))


class TestEditDistance:
    @pytest.mark.parametrize("a,b,want", [("", "10110", 5), ("0110", "0110", 0), ("0101", "1010", 2),
                                          ("10110", "", 5), ("1", "0", 1), ("0000", "1111", 4),
                                          ("01010101", "10101010", 2), ("110", "011", 2)])
    def test_examples(self, a, b, want):
        assert exact_edit_distance(a, b) == want
        assert edit_distance_bfs(a, b) == want

    def test_matches_exhaustive_search(self, rng):
        for _ in range(60):
            a = random_bits(rng, int(rng.integers(0, 7)))
            b = random_bits(rng, int(rng.integers(0, 7)))
            assert exact_edit_distance(a, b) == edit_distance_bfs(a, b)

    def test_metric_properties(self, rng):
        for _ in range(40):
            a, b, c = (random_bits(rng, int(rng.integers(0, 12))) for _ in range(3))
            ab, bc, ac = exact_edit_distance(a, b), exact_edit_distance(b, c), exact_edit_distance(a, c)
            assert ab == exact_edit_distance(b, a)
            assert ac <= ab + bc
            assert (ab == 0) == (a == b)
            assert ab <= max(len(a), len(b))
            assert ab >= abs(len(a) - len(b))


class TestTEMD:
    def test_examples(self):
        A = PointSet([[0], [3]])
        assert temd_exact(A, A) == 0
        assert temd_exact(PointSet([[0]]), PointSet([[5]])) == 1
        assert temd_exact(A, PointSet([[1], [2]])) == 1
        # threshold and unit scaling
        assert temd_exact(PointSet([[0], [0]]), PointSet([[1], [9]]), unit=Fraction(1, 2)) == Fraction(5, 4)
        assert temd_exact(PointSet([[0, 0]]), PointSet([[1, 1]]), threshold=5) == 2

    def test_errors(self):
        with pytest.raises(InvalidInputError):
            temd_exact(PointSet([[0], [1]]), PointSet([[0]]))
        with pytest.raises(InvalidInputError):
            temd_exact(PointSet([[0, 1]]), PointSet([[0]]))
        with pytest.raises(InvalidInputError):
            PointSet(np.zeros((0, 2)))

    def test_returns_fraction_within_cap(self, rng):
        for _ in range(30):
            s = int(rng.integers(1, 6))
            A = PointSet(rng.integers(-5, 6, (s, 2)))
            B = PointSet(rng.integers(-5, 6, (s, 2)))
            val = temd_exact(A, B)
            assert isinstance(val, Fraction)
            assert 0 <= val <= s
            assert val == temd_bruteforce(A, B)

    def test_metric_on_multisets(self, rng):
        for _ in range(30):
            s = int(rng.integers(1, 5))
            A, B, C = (PointSet(rng.integers(-4, 5, (s, 2))) for _ in range(3))
            assert temd_exact(A, B) == temd_exact(B, A)
            assert temd_exact(A, C) <= temd_exact(A, B) + temd_exact(B, C)
            perm = PointSet(A.points[rng.permutation(s)])
            assert temd_exact(A, perm) == 0


class TestProducts:
    def test_min_product(self):
        assert min_product_distance(MinProductPoint([[0, 0], [10, 10]]), MinProductPoint([[3, 4], [10, 10]])) == 0
        assert min_product_distance(MinProductPoint([[1, 1], [5, 0]]), MinProductPoint([[0, 0], [0, 0]])) == 2
        X = np.arange(6.0).reshape(2, 3)
        assert min_product_distance(X, X) == 0
        with pytest.raises(InvalidInputError):
            min_product_distance(np.zeros((2, 3)), np.zeros((3, 3)))

    def test_min_product_is_row_minimum(self, rng):
        for _ in range(20):
            X, Y = rng.normal(size=(4, 5)), rng.normal(size=(4, 5))
            rows = [np.abs(X[i] - Y[i]).sum() for i in range(4)]
            assert min_product_distance(X, Y) == pytest.approx(min(rows), rel=0, abs=1e-12)
            assert all(min_product_distance(X, Y) <= r for r in rows)

    def test_sum_product(self):
        assert sum_product_distance([1, 2], [1, 2], lambda a, b: abs(a - b)) == 0
        assert sum_product_distance([0, 0], [3, 4], lambda a, b: abs(a - b)) == 7
        sets = [(PointSet([[0], [3]]), PointSet([[1], [2]])), (PointSet([[0]]), PointSet([[5]]))]
        total = sum_product_distance([a for a, _ in sets], [b for _, b in sets], temd_exact)
        assert total == 2
        with pytest.raises(InvalidInputError):
            sum_product_distance([1], [1, 2], lambda a, b: 0)


class _Level:
    def __init__(self, vectors, scale=1):
        self.vectors = np.asarray(vectors)
        self.scale = Fraction(scale)


class TestIdealDistance:
    def _lower(self):
        # integer "substring vectors" for lengths 4, 3 and 1 over 12 positions
        rng = np.random.default_rng(5)
        return {L: _Level(rng.integers(0, 4, (12, 1)), 1) for L in (4, 3, 1)}

    def test_hand_enumeration(self):
        # m = 8, b = 2, l = 4: s in {1, 2, 4} uses lower lengths 4, 3, 1
        lower = self._lower()
        i, j = 1, 4
        want = Fraction(0)
        for jb in (1, 2):
            for s, L in ((1, 4), (2, 3), (4, 1)):
                a = i - 1 + (jb - 1) * 4
                b = j - 1 + (jb - 1) * 4
                A = lower[L].vectors[a:a + s]
                B = lower[L].vectors[b:b + s]
                want += temd_bruteforce(PointSet(A), PointSet(B))
        x = BitString(np.zeros(12, dtype=int))
        assert ideal_distance_exact(x, 8, i, j, lower, b=2, c=12) == 12 * want

    def test_identity_and_symmetry(self):
        lower = self._lower()
        x = BitString(np.zeros(12, dtype=int))
        assert ideal_distance_exact(x, 8, 3, 3, lower, b=2) == 0
        assert ideal_distance_exact(x, 8, 2, 5, lower, b=2) == ideal_distance_exact(x, 8, 5, 2, lower, b=2)

    def test_missing_level(self):
        lower = self._lower()
        del lower[3]
        x = BitString(np.zeros(12, dtype=int))
        with pytest.raises(DependencyError):
            ideal_distance_exact(x, 8, 1, 2, lower, b=2)
        with pytest.raises(InvalidInputError):
            ideal_distance_exact(x, 8, 1, 6, self._lower(), b=2)

    def test_sets_layout(self):
        lower = self._lower()
        got = [(jb, s, len(pts)) for jb, s, pts, _ in ideal_distance_sets(lower, 8, 1, 2)]
        assert got == [(1, 1, 1), (2, 1, 1), (1, 2, 2), (2, 2, 2), (1, 4, 4), (2, 4, 4)]
        assert len(list(ideal_distance_sets(lower, 8, 1, 2, s_min_exp=1))) == 4


def test_bfs_is_exhaustive_on_tiny_alphabet():
    # every pair of length-3 strings: BFS agrees with the DP
    words = ["".join(p) for k in range(4) for p in itertools.product("01", repeat=k)]
    for a in words:
        for b in words:
            assert edit_distance_bfs(a, b) == exact_edit_distance(a, b)
