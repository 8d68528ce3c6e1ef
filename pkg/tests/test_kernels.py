"""Split kernel: brute-force oracle agreement and backend bit-equality."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbtilab._kernels import BACKEND, split_py

try:
    from mbtilab._kernels import _split as compiled
except ImportError:
    compiled = None

BACKENDS = [split_py.best_split] + ([compiled.best_split] if compiled else [])


def oracle_best_split(cols, wy, w, min_leaf):
    """Direct enumeration from the definitions, no shared code with the kernel.

    Returns (j, threshold, score, margin) where margin is the gap to the next
    best boundary anywhere; a tiny margin means tie-breaking may legitimately
    differ between summation orders, so thresholds are only comparable when
    the margin is clearly positive.
    """
    f, n = cols.shape
    candidates = []
    if n >= 2 * min_leaf:
        for j in range(f):
            order = sorted(range(n), key=lambda i: (cols[j][i], i))  # stable
            xs = [cols[j][i] for i in order]
            ws = [w[i] for i in order]
            wys = [wy[i] for i in order]
            for i in range(min_leaf - 1, n - min_leaf):
                if xs[i] == xs[i + 1]:
                    continue
                wl = sum(ws[: i + 1])
                wr = sum(ws[i + 1 :])
                if wl <= 0 or wr <= 0:
                    continue
                pl = sum(wys[: i + 1])
                pr = sum(wys[i + 1 :])
                nl, nr = wl - pl, wr - pr
                score = (wl - (pl * pl + nl * nl) / wl) + (
                    wr - (pr * pr + nr * nr) / wr
                )
                candidates.append((score, j, 0.5 * (xs[i] + xs[i + 1])))
    if not candidates:
        return -1, float("nan"), math.inf, math.inf
    score, j, thr = min(candidates, key=lambda c: c[0])
    others = [c[0] for c in candidates if c[0] > score]
    margin = min(others) - score if others else math.inf
    return j, thr, score, margin


def random_case(rng, n, f, ties=True):
    cols = rng.normal(size=(f, n))
    if ties:
        cols = np.round(cols, 1)
    cols = np.ascontiguousarray(cols)
    w = rng.random(n) + 0.1
    y = (rng.random(n) < 0.5).astype(np.float64)
    return cols, np.ascontiguousarray(w * y), np.ascontiguousarray(w)


@pytest.mark.parametrize("fn", BACKENDS)
def test_matches_enumeration_oracle(fn):
    rng = np.random.default_rng(0)
    for trial in range(30):
        n = int(rng.integers(2, 40))
        f = int(rng.integers(1, 5))
        min_leaf = int(rng.integers(1, 3))
        cols, wy, w = random_case(rng, n, f)
        got = fn(cols, wy, w, min_leaf)
        j, thr, score, margin = oracle_best_split(cols, wy, w, min_leaf)
        if j < 0:
            assert got[0] == -1
            continue
        assert got[2] == pytest.approx(score, rel=1e-9, abs=1e-9)
        if margin > 1e-9:  # unique optimum: the location must agree too
            assert got[0] == j
            assert got[1] == pytest.approx(thr, abs=1e-12)


@pytest.mark.skipif(compiled is None, reason="compiled backend not built")
def test_backends_bit_identical():
    rng = np.random.default_rng(7)
    for trial in range(200):
        n = int(rng.integers(2, 120))
        f = int(rng.integers(1, 6))
        min_leaf = int(rng.integers(1, 4))
        cols, wy, w = random_case(rng, n, f, ties=bool(trial % 2))
        a = split_py.best_split(cols, wy, w, min_leaf)
        b = compiled.best_split(cols, wy, w, min_leaf)
        assert a[0] == b[0]
        # bit-for-bit, not approximate: repr round-trips every bit of a float
        assert repr(a[1]) == repr(b[1])
        assert repr(a[2]) == repr(b[2])


@pytest.mark.parametrize("fn", BACKENDS)
def test_no_valid_boundary(fn):
    # all values equal: nothing to split on
    cols = np.full((2, 10), 3.0)
    w = np.ones(10)
    assert fn(cols, w * 0, w, 1)[0] == -1
    # too few rows for min_leaf
    cols = np.ascontiguousarray(np.arange(4, dtype=np.float64).reshape(1, 4))
    assert fn(cols, np.ones(4), np.ones(4), 3)[0] == -1


@pytest.mark.parametrize("fn", BACKENDS)
def test_respects_min_leaf(fn):
    cols = np.ascontiguousarray(np.arange(10, dtype=np.float64).reshape(1, 10))
    y = np.array([0, 0, 0, 0, 0, 1, 1, 1, 1, 1], dtype=np.float64)
    w = np.ones(10)
    j, thr, _ = fn(cols, w * y, w, 3)
    # boundary must leave >= 3 rows per side: threshold within [2.5, 6.5]
    assert j == 0 and 2.5 <= thr <= 6.5


@pytest.mark.parametrize("fn", BACKENDS)
def test_prefers_clean_separation(fn):
    rng = np.random.default_rng(3)
    y = np.array([0.0] * 20 + [1.0] * 20)
    clean = np.concatenate([rng.random(20), rng.random(20) + 2.0])
    noise = rng.random(40)
    cols = np.ascontiguousarray(np.vstack([noise, clean]))
    w = np.ones(40)
    j, thr, score = fn(cols, w * y, w, 1)
    assert j == 1
    assert 1.0 < thr < 2.0
    assert score == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("fn", BACKENDS)
def test_first_minimum_wins_on_ties(fn):
    # two identical columns: the earlier feature index must win
    col = np.array([0.0, 0.0, 1.0, 1.0])
    cols = np.ascontiguousarray(np.vstack([col, col]))
    y = np.array([0.0, 0.0, 1.0, 1.0])
    w = np.ones(4)
    j, thr, _ = fn(cols, w * y, w, 1)
    assert j == 0 and thr == 0.5


@settings(max_examples=60, deadline=None)
@given(
    data=st.lists(
        st.tuples(
            st.integers(-3, 3),
            st.integers(0, 1),
            st.integers(1, 4),
        ),
        min_size=2,
        max_size=25,
    )
)
def test_oracle_property_integer_weights(data):
    """With integer-valued inputs both routes are exact, so equality is strict."""
    cols = np.ascontiguousarray(
        np.array([[float(x) for x, _, _ in data]], dtype=np.float64)
    )
    y = np.array([float(c) for _, c, _ in data])
    w = np.array([float(g) for _, _, g in data])
    got = split_py.best_split(cols, w * y, w, 1)
    j, _, score, _ = oracle_best_split(cols, w * y, w, 1)
    if j < 0:
        assert got[0] == -1
    else:
        assert got[2] == pytest.approx(score, abs=1e-9)


def test_backend_name_reported():
    assert BACKEND in ("python", "compiled")
