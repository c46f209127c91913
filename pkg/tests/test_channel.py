import numpy as np
import pytest
from hypothesis import given, strategies as st

from sicfree import ChannelRealization, InvalidParametersError, draw_channel, priority_from_order, successive_projection_order
from sicfree.channel import read_channel_csv, write_channel_csv


def _brute_order(H):
    """Independent oracle: residual energy via least squares instead of a projector."""
    remaining = list(range(H.shape[0]))
    picked = []
    while remaining:
        best, best_e = None, -1.0
        for i in remaining:
            if picked:
                B = H[picked].T
                coef, *_ = np.linalg.lstsq(B, H[i], rcond=None)
                e = float(np.linalg.norm(H[i] - B @ coef) ** 2)
            else:
                e = float(np.linalg.norm(H[i]) ** 2)
            if e > best_e + 1e-12:
                best, best_e = i, e
        picked.append(best)
        remaining.remove(best)
    return [i + 1 for i in picked]


def test_draw_reproducible():
    a = draw_channel(5, 4, seed=7)
    b = draw_channel(5, 4, seed=np.random.SeedSequence(7))
    assert np.array_equal(a.H, b.H)
    assert a.users == (1, 2, 3, 4, 5)
    assert a.H.shape == (5, 4)


def test_draw_statistics():
    H = draw_channel(2000, 4, seed=1).H
    assert np.mean(np.abs(H) ** 2) == pytest.approx(1.0, abs=0.05)
    assert abs(np.mean(H)) < 0.05


def test_invalid_channel():
    with pytest.raises(InvalidParametersError):
        ChannelRealization(np.array([[np.nan, 1.0]]), None)
    with pytest.raises(InvalidParametersError):
        ChannelRealization(np.ones((2, 2)), (1,))
    with pytest.raises(InvalidParametersError):
        draw_channel(0, 2)


def test_orthogonal_example():
    # strongest first; user 3 is orthogonal to user 1 and has the next largest residual
    H = np.array([[3, 0], [2, 0.1], [0, 1]], dtype=complex)
    o = successive_projection_order(ChannelRealization(H, None))
    assert o.order == (1, 3, 2)
    assert o.priority_for_sparse == (2, 3, 1)
    assert priority_from_order(o, reverse=False) == (1, 3, 2)
    assert o.residuals[0] == pytest.approx(9.0)


def test_ties_to_smallest_id():
    H = np.eye(3, dtype=complex)
    assert successive_projection_order(ChannelRealization(H, None)).order == (1, 2, 3)


def test_collinear_users():
    H = np.array([[1, 0], [2, 0], [0, 1]], dtype=complex)
    o = successive_projection_order(ChannelRealization(H, None))
    assert o.order[0] == 2
    assert o.residuals[-1] == pytest.approx(0.0, abs=1e-12)


@given(st.integers(2, 8), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_order_matches_oracle(K, L, seed):
    ch = draw_channel(K, L, seed=seed)
    o = successive_projection_order(ch)
    assert sorted(o.order) == list(range(1, K + 1))
    assert list(o.order) == _brute_order(ch.H)
    # residuals are non-increasing over the first L picks, zero afterwards
    r = np.array(o.residuals)
    assert np.all(np.diff(r[:L]) <= 1e-9)
    assert np.all(r[L:] < 1e-9)


def test_restrict_and_labels():
    ch = draw_channel(6, 3, seed=0)
    sub = ch.restrict((2, 5))
    assert sub.users == (2, 5)
    assert np.array_equal(sub.h(5), ch.H[4])
    o = successive_projection_order(sub)
    assert set(o.order) == {2, 5}


def test_channel_csv_round_trip(tmp_path):
    ch = draw_channel(5, 4, seed=2)
    p = tmp_path / "h.csv"
    write_channel_csv(ch, p)
    back = read_channel_csv(p)
    assert np.array_equal(back.H, ch.H)
    p.write_text("# bad\n1,2,3\n")
    with pytest.raises(InvalidParametersError):
        read_channel_csv(p)


def test_documented_examples():
    o = successive_projection_order(ChannelRealization(np.array([[2, 0], [0, 1]], dtype=complex), None))
    assert o.order == (1, 2) and o.residuals[1] == pytest.approx(1.0)
    o = successive_projection_order(ChannelRealization(np.array([[2, 0], [1, 0]], dtype=complex), None))
    assert o.order == (1, 2) and o.residuals[1] == pytest.approx(0.0, abs=1e-12)
    single = successive_projection_order(draw_channel(1, 3, seed=0))
    assert single.order == single.priority_for_sparse == (1,)


@given(st.integers(1, 6), st.integers(1, 4), st.floats(0.01, 100), st.integers(0, 2**32 - 1))
def test_scale_invariance_and_first_pick(K, L, c, seed):
    ch = draw_channel(K, L, seed=seed)
    o = successive_projection_order(ch)
    o2 = successive_projection_order(ChannelRealization(c * ch.H, None))
    assert o.order == o2.order
    norms = np.sum(np.abs(ch.H) ** 2, axis=1)
    assert o.order[0] == int(np.argmax(norms)) + 1
    for u, r in zip(o.order, o.residuals):
        assert r <= norms[u - 1] * (1 + 1e-12)
    assert tuple(reversed(o.priority_for_sparse)) == o.order


def test_strongest_user_gets_densest_submatrix():
    from sicfree import enumerate_multicast_groups, sparse_generate, user_submatrix

    idx = enumerate_multicast_groups(range(1, 6), 1)
    hits = 0
    for seed in range(50):
        ch = draw_channel(5, 4, seed=seed)
        o = successive_projection_order(ch)
        A = sparse_generate(idx, o.priority_for_sparse)
        nnz = {k: int(np.count_nonzero(user_submatrix(A, k))) for k in idx.serving_set}
        hits += nnz[o.order[0]] == max(nnz.values())
    assert hits == 50
