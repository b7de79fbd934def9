import math

import pytest
from hypothesis import given, strategies as st

from metric_scorecard.stats import (
    PairedSamples,
    UndefinedCorrelationError,
    average_ranks,
    kendall_tau_b,
    pearson,
    spearman,
)


def ps(xs, ys):
    return PairedSamples.from_sequences(xs, ys)


# --- independent oracle: tau-b by brute-force pair categorization -----------

def tau_b_brute_force(xs, ys):
    """(C - D) / sqrt((C + D + Ty_only) (C + D + Tx_only)); None when undefined."""
    n = len(xs)
    concordant = discordant = tied_x_only = tied_y_only = tied_both = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (xs[i] > xs[j]) - (xs[i] < xs[j])
            dy = (ys[i] > ys[j]) - (ys[i] < ys[j])
            if dx == 0 and dy == 0:
                tied_both += 1
            elif dx == 0:
                tied_x_only += 1
            elif dy == 0:
                tied_y_only += 1
            elif dx == dy:
                concordant += 1
            else:
                discordant += 1
    den_x = concordant + discordant + tied_y_only
    den_y = concordant + discordant + tied_x_only
    if den_x == 0 or den_y == 0:
        return None
    return (concordant - discordant) / math.sqrt(den_x * den_y)


int_samples = st.lists(st.integers(min_value=0, max_value=4), min_size=2, max_size=30)
float_values = st.floats(min_value=-100, max_value=100, allow_nan=False)


# --- worked examples ---------------------------------------------------------

def test_pearson_exact_examples():
    assert pearson(ps([1, 2, 3], [1, 2, 3])) == 1.0
    assert pearson(ps([1, 2, 3], [-1, -2, -3])) == -1.0
    assert abs(pearson(ps([1, 2, 3, 4], [2, 1, 4, 3])) - 0.6) < 1e-12


def test_spearman_exact_examples():
    assert spearman(ps([1, 2, 5], [2, 4, 9])) == 1.0
    assert spearman(ps([1, 2, 3], [9, 5, 1])) == -1.0
    assert abs(spearman(ps([1, 2, 3, 4], [2, 1, 4, 3])) - 0.6) < 1e-12


def test_kendall_exact_examples():
    assert kendall_tau_b(ps([1, 2, 3], [4, 8, 9])) == 1.0
    assert kendall_tau_b(ps([1, 2, 3], [3, 2, 1])) == -1.0
    assert abs(kendall_tau_b(ps([1, 2, 3], [2, 1, 3])) - 1 / 3) < 1e-12


def test_kendall_with_ties_matches_oracle():
    xs, ys = [1, 1, 2], [1, 2, 3]
    tau = kendall_tau_b(ps(xs, ys))
    assert tau > 0
    assert tau == pytest.approx(tau_b_brute_force(xs, ys), abs=1e-12)


def test_average_ranks_with_ties():
    assert average_ranks([10, 20, 20, 30]) == [1.0, 2.5, 2.5, 4.0]
    assert average_ranks([5, 5, 5]) == [2.0, 2.0, 2.0]


# --- error contracts ---------------------------------------------------------

def test_paired_samples_validation():
    with pytest.raises(ValueError, match="length"):
        ps([1, 2], [1, 2, 3])
    with pytest.raises(ValueError, match="at least 2"):
        ps([1], [1])
    with pytest.raises(ValueError, match="finite"):
        ps([1, float("nan")], [1, 2])


@pytest.mark.parametrize("fn", [pearson, spearman, kendall_tau_b])
def test_constant_side_raises_typed_error(fn):
    with pytest.raises(UndefinedCorrelationError) as excinfo:
        fn(ps([1, 1, 1], [1, 2, 3]))
    assert excinfo.value.side == "x"
    with pytest.raises(UndefinedCorrelationError) as excinfo:
        fn(ps([1, 2, 3], [7, 7, 7]))
    assert excinfo.value.side == "y"
    with pytest.raises(UndefinedCorrelationError) as excinfo:
        fn(ps([1, 1], [7, 7]))
    assert excinfo.value.side == "both"


# --- oracle agreement and cross-path consistency ------------------------------

@given(int_samples, int_samples)
def test_kendall_matches_brute_force(xs, ys):
    n = min(len(xs), len(ys))
    xs, ys = xs[:n], ys[:n]
    if n < 2:
        return
    expected = tau_b_brute_force(xs, ys)
    if expected is None:
        with pytest.raises(UndefinedCorrelationError):
            kendall_tau_b(ps(xs, ys))
    else:
        assert kendall_tau_b(ps(xs, ys)) == pytest.approx(expected, abs=1e-12)


def test_kendall_numpy_path_agrees_with_loop_path():
    # 200 samples forces the chunked numpy path; the oracle stays quadratic.
    rnd_xs = [(i * 7919) % 23 for i in range(200)]
    rnd_ys = [((i + 3) * 104729) % 17 for i in range(200)]
    tau = kendall_tau_b(ps(rnd_xs, rnd_ys))
    assert tau == pytest.approx(tau_b_brute_force(rnd_xs, rnd_ys), abs=1e-12)


def test_spearman_equals_pearson_on_ranks():
    xs = [3, 1, 4, 1, 5, 9, 2, 6]
    ys = [2, 7, 1, 8, 2, 8, 1, 8]
    assert spearman(ps(xs, ys)) == pearson(ps(average_ranks(xs), average_ranks(ys)))


# --- invariance properties -----------------------------------------------------

@given(st.lists(st.tuples(float_values, float_values), min_size=2, max_size=20))
def test_antisymmetry(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    for fn in (pearson, spearman, kendall_tau_b):
        try:
            forward = fn(ps(xs, ys))
        except UndefinedCorrelationError:
            continue
        assert fn(ps(xs, [-y for y in ys])) == pytest.approx(-forward, abs=1e-12)


@given(int_samples)
def test_rank_stats_invariant_under_increasing_transform(xs):
    ys = [(x * 31 + 7) % 11 for x in xs]
    transformed = [y**3 + 2 * y for y in ys]  # strictly increasing in y
    for fn in (spearman, kendall_tau_b):
        try:
            base = fn(ps(xs, ys))
        except UndefinedCorrelationError:
            with pytest.raises(UndefinedCorrelationError):
                fn(ps(xs, transformed))
            continue
        assert fn(ps(xs, transformed)) == base


@given(int_samples)
def test_pearson_invariant_under_positive_affine_transform(xs):
    ys = [(x * 13 + 5) % 7 for x in xs]
    try:
        base = pearson(ps(xs, ys))
    except UndefinedCorrelationError:
        return
    assert pearson(ps(xs, [2.5 * y + 3 for y in ys])) == pytest.approx(base, abs=1e-9)
