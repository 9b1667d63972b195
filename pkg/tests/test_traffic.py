import math

import numpy as np
import pytest

from capregion.traffic import (
    BindingCut,
    MulticastTraffic,
    UnicastTraffic,
    as_multicast,
    membership_mc,
    membership_uc,
    permute_traffic,
    random_sd_pairing,
    unicast_loads,
)


def permutation_traffic(n, rng):
    m = np.zeros((n, n))
    perm = rng.permutation(n)
    while (perm == np.arange(n)).any():
        perm = rng.permutation(n)
    m[np.arange(n), perm] = 1.0
    return UnicastTraffic(m)


def single_sink_traffic(n, sink):
    """Every other node sends rate 1/(n-1) to one common sink."""
    return UnicastTraffic.from_entries(
        n, [(u, sink, 1.0 / (n - 1)) for u in range(n) if u != sink]
    )


def test_unicast_loads_permutation():
    src, dst = unicast_loads(permutation_traffic(6, np.random.default_rng(0)))
    assert np.allclose(src, 1.0) and np.allclose(dst, 1.0)


def test_unicast_loads_single_sink_n5():
    src, dst = unicast_loads(single_sink_traffic(5, sink=4))
    assert np.allclose(src[:4], 0.25) and src[4] == 0.0
    assert dst[4] == pytest.approx(1.0, abs=1e-12)
    assert np.all(dst[:4] == 0.0)


def test_unicast_loads_zero_matrix():
    src, dst = unicast_loads(UnicastTraffic(np.zeros((3, 3))))
    assert not src.any() and not dst.any()


def test_unicast_loads_with_helper_node():
    # v1->v2 @1, v1->v3 @2, v2->v3 @3; v4 is a pure helper.
    t = UnicastTraffic.from_entries(4, [(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)])
    src, dst = unicast_loads(t)
    assert list(src) == [3.0, 3.0, 0.0, 0.0]
    assert list(dst) == [0.0, 1.0, 5.0, 0.0]
    assert membership_uc(t).rho_hat_star == pytest.approx(0.2)


def test_membership_uc_permutation():
    r = membership_uc(permutation_traffic(5, np.random.default_rng(1)))
    assert r.member and r.rho_hat_star == pytest.approx(1.0, abs=1e-12)


def test_membership_uc_single_sink_binding_cut():
    r = membership_uc(single_sink_traffic(7, sink=3))
    assert r.member
    assert r.rho_hat_star == pytest.approx(1.0, abs=1e-12)
    assert r.binding_cut == BindingCut("destination", 3)


def test_membership_zero_traffic_sentinel():
    r = membership_uc(UnicastTraffic(np.zeros((4, 4))))
    assert r.member and math.isinf(r.rho_hat_star) and r.binding_cut is None


def test_binding_cut_tie_breaking():
    # Equal source/destination peaks: source cut wins, lowest index first.
    t = UnicastTraffic.from_entries(3, [(0, 1, 1.0), (2, 1, 0.0)])
    r = membership_uc(t)
    assert r.binding_cut == BindingCut("source", 0)
    t = UnicastTraffic.from_entries(4, [(0, 2, 0.5), (1, 2, 0.5), (3, 2, 0.5)])
    assert membership_uc(t).binding_cut == BindingCut("destination", 2)


def test_membership_mc_singleton_is_unicast():
    r = membership_mc(MulticastTraffic(4, [(0, (1,), 1.0)]))
    assert r.member and r.rho_hat_star == pytest.approx(1.0)


def test_membership_mc_worked_example():
    # Two multicast groups plus a private message.
    t = MulticastTraffic(4, [(0, (2, 3), 1.0), (0, (2,), 2.0), (1, (2, 3), 3.0)])
    assert list(t.source_loads()) == [3.0, 3.0, 0.0, 0.0]
    assert list(t.destination_loads()) == [0.0, 0.0, 6.0, 4.0]
    r = membership_mc(t)
    assert not r.member
    assert r.rho_hat_star == pytest.approx(1.0 / 6.0, abs=1e-12)
    assert r.binding_cut == BindingCut("destination", 2)


def test_membership_mc_broadcast():
    n = 6
    t = MulticastTraffic(n, [(0, tuple(range(1, n)), 1.0)])
    r = membership_mc(t)
    assert r.member and r.rho_hat_star == pytest.approx(1.0, abs=1e-12)
    assert list(t.destination_loads()) == [0.0] + [1.0] * (n - 1)


def test_multicast_source_in_group_not_counted_as_destination():
    t = MulticastTraffic(4, [(1, (0, 1, 2), 0.5)])
    assert list(t.source_loads()) == [0.0, 0.5, 0.0, 0.0]
    assert list(t.destination_loads()) == [0.5, 0.0, 0.5, 0.0]


def test_multicast_rejects_self_only_group():
    with pytest.raises(ValueError):
        MulticastTraffic(3, [(1, (1,), 0.5)])
    with pytest.raises(ValueError):
        MulticastTraffic(3, [(1, (), 0.5)])


def test_multicast_merges_duplicate_keys():
    t = MulticastTraffic(4, [(0, (2, 1), 0.5), (0, (1, 2), 0.25)])
    assert len(t) == 1
    ((u, dests, rate),) = list(t.entries())
    assert (u, dests) == (0, (1, 2)) and rate == 0.75


def test_unicast_validation():
    with pytest.raises(ValueError):
        UnicastTraffic(np.array([[0.0, -0.1], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        UnicastTraffic.from_entries(3, [(0, 0, 1.0)])
    with pytest.raises(ValueError):
        UnicastTraffic.from_entries(3, [(0, 3, 1.0)])
    # dense diagonal is forced to zero
    t = UnicastTraffic(np.array([[0.7, 0.2], [0.3, 0.9]]))
    assert t.matrix[0, 0] == 0.0 and t.matrix[1, 1] == 0.0
    # duplicate triples merge
    t = UnicastTraffic.from_entries(3, [(0, 1, 0.2), (0, 1, 0.3)])
    assert t.matrix[0, 1] == pytest.approx(0.5)


def test_random_sd_pairing_structure():
    t = random_sd_pairing(40, seed=5)
    src, dst = unicast_loads(t)
    assert np.allclose(src, 1.0)
    assert dst.sum() == pytest.approx(40.0)
    for u, w, rate in t.entries():
        assert u != w and rate == 1.0
    assert np.array_equal(t.matrix, random_sd_pairing(40, seed=5).matrix)


def test_random_sd_pairing_column_sums_average_one():
    n = 30
    acc = np.zeros(n)
    for s in range(200):
        acc += random_sd_pairing(n, seed=s).destination_loads()
    assert np.all(np.abs(acc / 200 - 1.0) < 0.35)


def test_random_sd_pairing_n2():
    t = random_sd_pairing(2, seed=0)
    assert t.matrix[0, 1] == 1.0 and t.matrix[1, 0] == 1.0


def test_permute_identity_and_errors():
    t = UnicastTraffic.from_entries(4, [(0, 1, 1.0), (2, 3, 0.5)])
    same = permute_traffic(t, [0, 1, 2, 3])
    assert np.array_equal(same.matrix, t.matrix)
    with pytest.raises(ValueError):
        permute_traffic(t, [0, 1, 1, 3])
    with pytest.raises(TypeError):
        permute_traffic("nope", [0])


def test_permute_pullback_convention():
    t = UnicastTraffic.from_entries(3, [(1, 2, 0.7)])
    pi = [2, 0, 1]  # relabeled u takes the old entry at pi(u)
    out = permute_traffic(t, pi)
    # old entry (1, 2) appears at (pi^-1(1), pi^-1(2)) = (2, 0)
    assert out.matrix[2, 0] == pytest.approx(0.7)
    assert out.total() == pytest.approx(t.total())


def test_permute_multicast_group_image():
    t = MulticastTraffic(4, [(0, (1, 2), 1.0)])
    pi = [3, 2, 1, 0]  # an involution, so image and preimage coincide
    out = permute_traffic(t, pi)
    ((u, dests, rate),) = list(out.entries())
    assert u == 3 and dests == (1, 2) and rate == 1.0


def random_multicast(n, rng, entries=6):
    triples = []
    for _ in range(entries):
        u = int(rng.integers(0, n))
        size = int(rng.integers(1, min(n, 4)))
        group = rng.choice(n, size=size, replace=False)
        if set(group.tolist()) == {u}:
            group = [(u + 1) % n]
        triples.append((u, tuple(int(w) for w in group), float(rng.random())))
    return MulticastTraffic(n, triples)


@pytest.mark.parametrize("seed", range(5))
def test_rho_star_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 12))
    t = UnicastTraffic(rng.random((n, n)) * (rng.random((n, n)) < 0.4))
    mc = random_multicast(n, rng)
    pi = rng.permutation(n)
    if not math.isinf(membership_uc(t).rho_hat_star):
        assert membership_uc(permute_traffic(t, pi)).rho_hat_star == pytest.approx(
            membership_uc(t).rho_hat_star, abs=1e-12
        )
    assert membership_mc(permute_traffic(mc, pi)).rho_hat_star == pytest.approx(
        membership_mc(mc).rho_hat_star, abs=1e-12
    )


@pytest.mark.parametrize("seed", range(8))
def test_binding_cut_attains_peak_load(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 15))
    t = UnicastTraffic(rng.random((n, n)) * (rng.random((n, n)) < 0.6))
    r = membership_uc(t)
    if r.binding_cut is None:
        return
    src, dst = unicast_loads(t)
    peak = max(src.max(), dst.max())
    loads = src if r.binding_cut.kind == "source" else dst
    assert loads[r.binding_cut.node] == peak
    assert r.rho_hat_star == pytest.approx(1.0 / peak, rel=1e-15)


def test_rho_star_homogeneity_and_boundary():
    rng = np.random.default_rng(17)
    t = UnicastTraffic(rng.random((8, 8)))
    rho = membership_uc(t).rho_hat_star
    assert membership_uc(t.scaled(4.0)).rho_hat_star == pytest.approx(rho / 4.0, rel=1e-12)
    boundary = t.scaled(rho)
    src, dst = unicast_loads(boundary)
    assert max(src.max(), dst.max()) == pytest.approx(1.0, abs=1e-12)


def test_unicast_as_multicast_preserves_rho():
    rng = np.random.default_rng(23)
    for _ in range(10):
        n = int(rng.integers(2, 10))
        t = UnicastTraffic(rng.random((n, n)) * (rng.random((n, n)) < 0.5))
        if t.total() == 0:
            continue
        assert membership_mc(as_multicast(t)).rho_hat_star == membership_uc(t).rho_hat_star
