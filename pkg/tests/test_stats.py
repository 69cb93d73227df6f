import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from convergence_de import stats
from convergence_de.core import RngStream
from convergence_de.stats import (
    SampleGroup,
    better_group,
    holm_adjust,
    kruskal_wallis,
    mann_whitney_u,
    rank_with_ties,
    render_significance,
)


def oracle_ranks(values):
    ranks = []
    for v in values:
        below = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        ranks.append(below + (equal + 1) / 2)
    return ranks


def oracle_tie_term(values):
    total = 0
    for v in set(values):
        t = values.count(v)
        total += t**3 - t
    return total


def oracle_kruskal(groups):
    """H with tie correction; p from the chi-square survival function for 1 or 2 degrees of freedom."""
    pooled = [v for g in groups for v in g]
    ranks = oracle_ranks(pooled)
    n = len(pooled)
    h, start = 0.0, 0
    for g in groups:
        rank_sum = sum(ranks[start:start + len(g)])
        h += rank_sum**2 / len(g)
        start += len(g)
    h = 12.0 / (n * (n + 1)) * h - 3 * (n + 1)
    h /= 1 - oracle_tie_term(pooled) / (n**3 - n)
    df = len(groups) - 1
    if df == 1:
        p = math.erfc(math.sqrt(h / 2))
    else:
        p = math.exp(-h / 2)
    return h, p


def oracle_mann_whitney(a, b):
    """U of a from pairwise counts; two-sided normal approximation with tie and continuity corrections."""
    u = 0.0
    for x in a:
        for y in b:
            u += 1.0 if x > y else 0.5 if x == y else 0.0
    na, nb = len(a), len(b)
    n = na + nb
    mean = na * nb / 2
    variance = na * nb / 12 * ((n + 1) - oracle_tie_term(list(a) + list(b)) / (n * (n - 1)))
    z = (abs(u - mean) - 0.5) / math.sqrt(variance)
    return u, min(1.0, math.erfc(z / math.sqrt(2)))


def datasets():
    """Twenty fixed small datasets, some with ties, with 2 or 3 groups."""
    rng = RngStream(31)
    cases = []
    for i in range(20):
        group_count = 2 + i % 2
        sizes = [int(rng.integers(8, 14)) for _ in range(group_count)]
        if i % 3 == 0:
            groups = [rng.integers(0, 6, size=s).astype(float).tolist() for s in sizes]
        else:
            groups = [(rng.normal(size=s) + 0.4 * j).round(6).tolist() for j, s in enumerate(sizes)]
        cases.append(groups)
    return cases


def group(label, values):
    return SampleGroup(label=label, values=list(values))


class TestRanks:
    @pytest.mark.parametrize("values, expected", [
        ([10, 20, 30], [1, 2, 3]),
        ([5, 5], [1.5, 1.5]),
        ([1, 2, 2, 3], [1, 2.5, 2.5, 4]),
    ])
    def test_examples(self, values, expected):
        assert_array_equal(rank_with_ties(values), expected)

    def test_rank_sum(self):
        values = RngStream(0).integers(0, 5, size=37).tolist()
        assert rank_with_ties(values).sum() == 37 * 38 / 2


class TestKruskalWallis:
    def test_identical_multisets(self):
        result = kruskal_wallis([group("a", [1, 2, 3]), group("b", [3, 2, 1]), group("c", [2, 1, 3])])
        assert result.statistic == pytest.approx(0.0, abs=1e-12)
        assert result.p_value == pytest.approx(1.0)

    def test_all_identical(self):
        result = kruskal_wallis([group("a", [4, 4]), group("b", [4, 4, 4])])
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_separated_groups(self):
        groups = [[1, 2, 3], [4, 5, 6], [7, 8, 9]]
        h, p = oracle_kruskal(groups)
        result = kruskal_wallis([group(str(i), g) for i, g in enumerate(groups)])
        assert h == pytest.approx(7.2)
        assert abs(result.statistic - h) < 1e-9
        assert abs(result.p_value - p) < 1e-6

    @pytest.mark.parametrize("index", range(20))
    def test_oracle(self, index):
        groups = datasets()[index]
        h, p = oracle_kruskal(groups)
        result = kruskal_wallis([group(str(i), g) for i, g in enumerate(groups)])
        assert abs(result.statistic - h) < 1e-9
        assert abs(result.p_value - p) < 1e-6

    def test_monotone_transform_invariance(self):
        rng = RngStream(4)
        groups = [rng.normal(size=10) for _ in range(3)]
        plain = kruskal_wallis([group(str(i), g) for i, g in enumerate(groups)])
        transformed = kruskal_wallis([group(str(i), np.exp(g) * 3 + 1) for i, g in enumerate(groups)])
        assert abs(plain.statistic - transformed.statistic) < 1e-12

    def test_far_apart_gaussians(self):
        rng = RngStream(5)
        result = kruskal_wallis([group("a", rng.normal(0, 1, 30)), group("b", rng.normal(10, 1, 30))])
        assert result.p_value < 1e-6

    def test_needs_two_groups(self):
        with pytest.raises(ValueError):
            kruskal_wallis([group("a", [1, 2])])


class TestMannWhitney:
    def test_identical_samples(self):
        result = mann_whitney_u(group("a", [1, 2, 3, 4]), group("b", [4, 3, 2, 1]))
        assert result.statistic == 8.0
        assert result.p_value == pytest.approx(1.0)

    def test_all_tied(self):
        result = mann_whitney_u(group("a", [2, 2, 2]), group("b", [2, 2]))
        assert result.statistic == 3.0
        assert result.p_value == 1.0

    def test_separated(self):
        assert mann_whitney_u(group("a", [1, 2, 3]), group("b", [4, 5, 6])).statistic == 0.0
        assert mann_whitney_u(group("b", [4, 5, 6]), group("a", [1, 2, 3])).statistic == 9.0

    def test_complementary(self):
        rng = RngStream(6)
        a, b = rng.integers(0, 4, size=9).tolist(), rng.integers(0, 4, size=12).tolist()
        forward = mann_whitney_u(group("a", a), group("b", b)).statistic
        backward = mann_whitney_u(group("b", b), group("a", a)).statistic
        assert forward + backward == 9 * 12

    def test_extreme_separation(self):
        rng = RngStream(7)
        a = rng.uniform(0, 1, size=30)
        b = rng.uniform(2, 3, size=30)
        assert mann_whitney_u(group("a", a), group("b", b)).p_value < 1e-6

    @pytest.mark.parametrize("index", range(20))
    def test_oracle(self, index):
        a, b = datasets()[index][:2]
        u, p = oracle_mann_whitney(a, b)
        result = mann_whitney_u(group("a", a), group("b", b))
        assert abs(result.statistic - u) < 1e-9
        assert abs(result.p_value - p) < 1e-6


class TestHolm:
    def test_single(self):
        assert holm_adjust([0.2]) == [0.2]

    def test_step_down(self):
        assert holm_adjust([0.01, 0.04, 0.03]) == pytest.approx([0.03, 0.06, 0.06], abs=1e-15)

    def test_cap(self):
        assert holm_adjust([1.0, 1.0, 1.0]) == [1.0, 1.0, 1.0]

    def test_empty(self):
        assert holm_adjust([]) == []

    def test_permutation_equivariant_and_never_below_raw(self):
        p = RngStream(8).uniform(size=7)
        order = RngStream(9).choice(7, size=7, replace=False)
        adjusted = np.array(holm_adjust(p))
        assert np.all(adjusted >= p)
        assert_array_equal(np.array(holm_adjust(p[order])), adjusted[order])

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            holm_adjust([0.5, 1.5])


class TestSignificance:
    @pytest.mark.parametrize("p, symbol, ascii_symbol", [
        (0.005, "≫", ">>"),
        (0.03, ">", ">"),
        (0.5, "≈", "~"),
        (0.01, ">", ">"),
        (0.05, "≈", "~"),
    ])
    def test_thresholds(self, p, symbol, ascii_symbol):
        rendered = render_significance(p, "P1")
        assert rendered.symbol == symbol
        assert rendered.ascii == ascii_symbol
        assert rendered.better == "P1"

    def test_better_by_median_then_mean(self):
        assert better_group(group("a", [1, 2, 3]), group("b", [2, 3, 4])) == "a"
        assert better_group(group("a", [0, 2, 9]), group("b", [1, 2, 3])) == "b"
        assert better_group(group("a", [1, 2]), group("b", [2, 1])) is None

    def test_symbols_table(self):
        assert set(stats.SYMBOLS.values()) == {"≫", ">", "≈"}

    def test_group_rejects_non_finite(self):
        with pytest.raises(ValueError):
            SampleGroup(label="a", values=[1.0, float("nan")])
