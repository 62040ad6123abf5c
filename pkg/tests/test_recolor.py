import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distcolor import (
    RMAT_GOOD,
    FirstFit,
    Mode,
    Ordering,
    ProtocolConfig,
    RandomX,
    RmatParams,
    block_partition,
    build_rank_views,
    check_validity,
    generate_rmat,
    greedy_color,
    order_vertices,
)
from distcolor import _kernels as K
from distcolor.coloring import class_sizes
from distcolor.errors import InvalidColoringError
from distcolor.partition import Partition
from distcolor.recolor import (
    ColorClassPermutation,
    Permutation,
    PermutationSchedule,
    build_class_permutation,
    plan_piggyback,
    recolor_async,
    recolor_iterations,
    recolor_sync,
)
from helpers import two_rank_scenario, gnp, path

KINDS = list(Permutation)


def views_of(g, p):
    return build_rank_views(g, block_partition(g, p))


def perm_for(colors, kind, seed=0):
    return build_class_permutation(class_sizes(colors), kind, np.random.default_rng(seed))


# permutations and schedules

def test_class_permutation_examples():
    rng = np.random.default_rng(0)
    assert build_class_permutation({1: 5, 2: 3, 3: 9}, "nd", rng).order == (2, 1, 3)
    assert build_class_permutation({1: 5, 2: 3, 3: 9}, "ni", rng).order == (3, 1, 2)
    assert build_class_permutation({1: 1, 2: 1, 3: 1, 4: 1}, "rv", rng).order == (4, 3, 2, 1)
    assert build_class_permutation({1: 2, 2: 2}, "ni", rng).order == (1, 2)
    with pytest.raises(ValueError):
        build_class_permutation({1: 2, 3: 2}, "nd", rng)


def test_random_permutation_uses_rng():
    sizes = {c: 1 for c in range(1, 21)}
    a = build_class_permutation(sizes, "rand", np.random.default_rng(1)).order
    b = build_class_permutation(sizes, "rand", np.random.default_rng(1)).order
    c = build_class_permutation(sizes, "rand", np.random.default_rng(2)).order
    assert a == b != c and sorted(a) == list(range(1, 21))


def test_explicit_permutation_validated():
    assert ColorClassPermutation.explicit([2, 1]).positions().tolist()[1:] == [2, 1]
    with pytest.raises(ValueError):
        ColorClassPermutation.explicit([1, 1])


def test_schedule_injection_rules():
    every5 = PermutationSchedule.parse("nd-rand:5", 10)
    assert [i for i in range(1, 11) if every5.kind_at(i) is Permutation.RANDOM] == [5, 10]
    pow2 = PermutationSchedule.parse("nd-rand-pow2", 10)
    assert [i for i in range(1, 11) if pow2.kind_at(i) is Permutation.RANDOM] == [2, 4, 8]
    every1 = PermutationSchedule.parse("nd-rand:1", 4)
    assert all(every1.kind_at(i) is Permutation.RANDOM for i in range(1, 5))
    assert PermutationSchedule.parse("rv", 3).kind_at(2) is Permutation.REVERSE
    assert every5.label == "ND-RAND%5"
    for bad in ("nd-rand:0", "zz"):
        with pytest.raises(ValueError):
            PermutationSchedule.parse(bad, 1)


# synchronous recoloring

def test_recolor_p3_reverse():
    g = path(3)
    out, m = recolor_sync(views_of(g, 1), np.array([1, 2, 1]), perm_for(np.array([1, 2, 1]), "rv"))
    assert out.tolist() == [2, 1, 2] and m.num_colors == 2


def test_identity_permutation_is_a_fixed_point():
    for seed in range(10):
        g = gnp(60, 0.1, seed)
        colors = greedy_color(g, order_vertices(g, Ordering.SMALLEST_LAST))
        # replaying classes 1..k in order reproduces first-fit colors exactly
        out, _ = recolor_sync(views_of(g, 3), colors, ColorClassPermutation.explicit(range(1, colors.max() + 1)))
        assert out.max() == colors.max()


def test_empty_class_is_a_pure_barrier():
    g = path(3)
    colors = np.array([1, 3, 1])
    out, m = recolor_sync(views_of(g, 2), colors, ColorClassPermutation.explicit([1, 2, 3]))
    assert out.tolist() == [1, 2, 1]
    assert m.supersteps == 3


def test_invalid_input_rejected_without_mutation():
    g = path(3)
    views = views_of(g, 2)
    snapshot = [v.colors.copy() for v in views]
    with pytest.raises(InvalidColoringError):
        recolor_sync(views, np.array([1, 1, 2]), ColorClassPermutation.explicit([1, 2]))
    assert all(np.array_equal(v.colors, s) for v, s in zip(views, snapshot))
    with pytest.raises(ValueError):
        recolor_sync(views, np.array([1, 2, 1]), ColorClassPermutation.explicit([1, 2, 3]))


def test_step_check_in_kernel():
    # vertex 1 at step 2 with an uncolored neighbor scheduled at step 1
    g = path(2)
    colors = np.zeros(2, dtype=np.int64)
    steps = np.array([1, 2], dtype=np.int64)
    scratch = np.zeros(4, dtype=np.int64)
    bad = K.color_vertices(g.indptr, g.indices, colors, np.array([1]), K.FIRST_FIT, 0, 1,
                           np.zeros(1), scratch.copy(), scratch.copy(), steps, 2)
    assert bad == 1


@given(st.integers(5, 60), st.floats(0.05, 0.5), st.integers(0, 10**6), st.sampled_from(KINDS),
       st.sampled_from([1, 2, 3, 4, 8]))
@settings(max_examples=60, deadline=None)
def test_recolor_never_adds_colors_and_is_distribution_invariant(n, p, seed, kind, ranks):
    g = gnp(n, p, seed)
    colors = greedy_color(g, np.random.default_rng(seed).permutation(n))
    perm = perm_for(colors, kind, seed)
    ref, _ = recolor_sync(views_of(g, 1), colors, perm)
    out, m = recolor_sync(views_of(g, min(ranks, n)), colors, perm)
    assert check_validity(g, out) == []
    assert out.max() <= colors.max()
    assert np.array_equal(out, ref)
    assert m.conflicts == 0 and m.rounds == 0


@given(st.integers(5, 60), st.floats(0.05, 0.5), st.integers(0, 10**6), st.sampled_from(KINDS),
       st.sampled_from([2, 3, 4, 8]))
@settings(max_examples=60, deadline=None)
def test_piggyback_is_transparent(n, p, seed, kind, ranks):
    g = gnp(n, p, seed)
    views = views_of(g, min(ranks, n))
    colors = greedy_color(g, np.random.default_rng(seed).permutation(n), RandomX(3), seed)
    perm = perm_for(colors, kind, seed)
    base, mb = recolor_sync(views, colors, perm, piggyback=False)
    pig, mp = recolor_sync(views, colors, perm, piggyback=True)
    assert np.array_equal(base, pig)
    assert mp.empty_msgs == 0
    assert mp.nonempty_msgs <= mb.nonempty_msgs
    assert mp.pairs == mb.pairs
    plan = plan_piggyback(views, perm, colors)
    assert mp.msgs == plan.messages and mp.precomm_msgs == plan.precomm_messages
    assert mb.nonempty_msgs == plan.baseline_nonempty


@given(st.integers(5, 60), st.floats(0.05, 0.5), st.integers(0, 10**6), st.sampled_from(KINDS),
       st.sampled_from([2, 3, 4]))
@settings(max_examples=60, deadline=None)
def test_plan_meets_every_deadline(n, p, seed, kind, ranks):
    g = gnp(n, p, seed)
    part = block_partition(g, min(ranks, n))
    views = build_rank_views(g, part)
    colors = greedy_color(g)
    perm = perm_for(colors, kind, seed)
    step = perm.positions()[colors]
    plan = plan_piggyback(views, perm, colors)
    arrival = {}
    for (src, dst), flushes in plan.flushes.items():
        s = [f for f, _ in flushes]
        assert s == sorted(set(s)) and all(len(vs) for _, vs in flushes)
        for f, vs in flushes:
            for b in vs.tolist():
                assert (b, dst) not in arrival
                arrival[b, dst] = f
                assert f >= step[b]
    u, w = g.edges()
    for a, b in zip(u.tolist(), w.tolist()):
        if part.owner[a] == part.owner[b]:
            continue
        for x, y in ((a, b), (b, a)):
            f = arrival[x, part.owner[y]]
            if step[y] > step[x]:
                assert f < step[y]
            else:
                assert f <= plan.end_step


def test_two_rank_scenario_plan():
    g, part, colors = two_rank_scenario()
    views = build_rank_views(g, part)
    perm = ColorClassPermutation.explicit(range(1, 14))
    plan = plan_piggyback(views, perm, colors)
    got = {ch: [(s, vs.tolist()) for s, vs in fl] for ch, fl in plan.flushes.items()}
    assert got == {(0, 1): [(4, [1, 2]), (14, [0])], (1, 0): [(11, [3]), (14, [4, 5])]}
    assert plan.baseline_nonempty == 6 and plan.messages == 4
    assert plan.expected(0) == {11: [1], 14: [1]}


def test_channel_without_cross_edges_is_absent():
    g = path(6)
    views = build_rank_views(g, Partition(np.array([0, 0, 1, 1, 2, 2]), 3))
    colors = greedy_color(g)
    plan = plan_piggyback(views, perm_for(colors, "nd"), colors)
    assert (0, 2) not in plan.flushes and (2, 0) not in plan.flushes
    assert set(plan.flushes) == {(0, 1), (1, 0), (1, 2), (2, 1)}


def test_single_cross_edge_plan():
    g = path(2)
    views = build_rank_views(g, Partition(np.array([0, 1]), 2))
    colors = np.array([1, 2])
    plan = plan_piggyback(views, ColorClassPermutation.explicit([1, 2]), colors)
    got = {ch: [(s, vs.tolist()) for s, vs in fl] for ch, fl in plan.flushes.items()}
    assert got == {(0, 1): [(1, [0])], (1, 0): [(3, [1])]}


# iterations

def test_zero_iterations_is_identity():
    g = gnp(30, 0.2, 1)
    colors = greedy_color(g)
    out, traj, m = recolor_iterations(views_of(g, 2), colors, PermutationSchedule.parse("nd", 0))
    assert np.array_equal(out, colors) and traj == [colors.max()] and m.msgs == 0


def test_iterations_trajectory_and_reduction_messages():
    g = generate_rmat(RmatParams(10, 8, RMAT_GOOD, seed=2))
    colors = greedy_color(g)
    out, traj, m = recolor_iterations(views_of(g, 4), colors, PermutationSchedule.parse("nd-rand:2", 4), seed=3)
    assert len(traj) == 5 and traj[0] == colors.max() and traj[-1] == out.max()
    assert all(a >= b for a, b in zip(traj, traj[1:]))
    # ND iterations 1 and 3 gather global class sizes: reduce plus broadcast
    assert m.reduction_msgs == 2 * 2 * (4 - 1)
    assert m.trajectory == traj


def test_threaded_recolor_matches():
    g = generate_rmat(RmatParams(9, 8, RMAT_GOOD, seed=4))
    colors = greedy_color(g)
    perm = perm_for(colors, "nd")
    views = views_of(g, 4)
    for pig in (False, True):
        a, ma = recolor_sync(views, colors, perm, piggyback=pig)
        b, mb = recolor_sync(views, colors, perm, piggyback=pig, backend="threaded")
        assert np.array_equal(a, b) and ma.msgs == mb.msgs


# asynchronous recoloring

def test_async_single_rank_matches_sync():
    for seed in range(5):
        g = gnp(50, 0.15, seed)
        colors = greedy_color(g)
        for kind in KINDS:
            perm = perm_for(colors, kind, seed)
            a, _ = recolor_async(views_of(g, 1), colors, perm)
            b, _ = recolor_sync(views_of(g, 1), colors, perm)
            assert np.array_equal(a, b)


def test_async_p3_split():
    g = path(3)
    views = build_rank_views(g, Partition(np.array([0, 0, 1]), 2))
    colors = np.array([1, 2, 1])
    for kind in KINDS:
        out, _ = recolor_async(views, colors, perm_for(colors, kind))
        assert check_validity(g, out) == [] and out.max() <= 3


@pytest.mark.parametrize("mode", list(Mode))
def test_async_recolor_deterministic(mode):
    g = generate_rmat(RmatParams(10, 8, RMAT_GOOD, seed=5))
    colors = greedy_color(g)
    perm = perm_for(colors, "nd")
    cfg = ProtocolConfig(superstep=50, mode=mode, seed=3)
    a, ma = recolor_async(views_of(g, 8), colors, perm, cfg)
    b, mb = recolor_async(views_of(g, 8), colors, perm, cfg)
    assert np.array_equal(a, b) and ma.row() == mb.row()
    assert check_validity(g, a) == []


def test_recolor_selection_is_configurable():
    g = gnp(60, 0.2, 3)
    colors = greedy_color(g)
    out, _ = recolor_sync(views_of(g, 2), colors, perm_for(colors, "nd"), selection=RandomX(3), seed=1)
    assert check_validity(g, out) == []
    ff, _ = recolor_sync(views_of(g, 2), colors, perm_for(colors, "nd"), selection=FirstFit())
    assert ff.max() <= colors.max()
