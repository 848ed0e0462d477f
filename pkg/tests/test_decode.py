import dataclasses
import itertools
import random
from fractions import Fraction

import pytest

from cache_lab.core import FileLibrary, SystemConfig, concat, random_library, zero_library
from cache_lab.decode import (
    DecodeError,
    decode_all,
    decode_user,
    verify_all_demands,
    worst_case_profile,
)
from cache_lab.delivery import Piece, Segment, SegmentLabel, deliver
from cache_lab.placement import place_caches

from oracle import oracle_decodes, solve_user


def setup(n, k, seed=0, mult=1):
    cfg = SystemConfig.minimal(n, k, mult)
    lib = random_library(cfg, seed)
    return cfg, lib, place_caches(lib, cfg)


def test_golden_3x5_all_users(golden_3x5):
    cfg, lib, caches = golden_3x5
    t = deliver(lib, caches, (1, 1, 1, 2, 3))
    rep = decode_all(lib, caches, t)
    assert rep.all_ok
    assert rep.measured_rate == Fraction(21, 10)
    assert [r.requested_file for r in rep.per_user] == [1, 1, 1, 2, 3]


def test_golden_3x5_user1_from_part1_pair(golden_3x5):
    cfg, lib, caches = golden_3x5
    t = deliver(lib, caches, (1, 1, 1, 2, 3))
    partial = dataclasses.replace(t, part1=t.part1[:2], part2=(), part3=())
    known = solve_user(1, caches.user(1), partial, 3, 5, 2)
    for f in (1, 2, 3):
        for l in (1, 2):
            assert known[(f, 1, l)] == lib.subfile(f, 1, 5).slice(l - 1, l).value


def test_golden_3x5_user4_from_part3_chain(golden_3x5):
    cfg, lib, caches = golden_3x5
    t = deliver(lib, caches, (1, 1, 1, 2, 3))
    partial = dataclasses.replace(t, part2=(), part3=t.part3[:3])
    known = solve_user(4, caches.user(4), partial, 3, 5, 2)
    for s in (1, 2, 3):
        assert known[(2, s, 2)] == lib.subfile(2, s, 5).slice(1, 2).value


def test_zero_library():
    cfg = SystemConfig.minimal(3, 4)
    lib = zero_library(cfg)
    caches = place_caches(lib, cfg)
    t = deliver(lib, caches, (1, 2, 3, 3))
    for u in range(1, 5):
        assert decode_user(u, caches.user(u), t).value == 0


@pytest.mark.parametrize("n,k", [(3, 4), (4, 5), (4, 6), (5, 7), (6, 4), (3, 3)])
def test_matches_linear_algebra_oracle(n, k):
    cfg, lib, caches = setup(n, k, seed=n + k)
    rng = random.Random(n * k)
    for _ in range(25):
        d = tuple(rng.randint(1, n) for _ in range(k))
        t = deliver(lib, caches, d)
        rep = decode_all(lib, caches, t)
        assert rep.all_ok
        for u, want in enumerate(d, start=1):
            assert oracle_decodes(u, want, lib, caches, t)


def test_missing_segment_reported():
    cfg, lib, caches = setup(3, 5, seed=3)
    t = deliver(lib, caches, (1, 1, 1, 2, 3))
    broken = dataclasses.replace(t, part3=t.part3[1:])
    with pytest.raises(DecodeError) as exc:
        decode_user(1, caches.user(1), broken)
    assert exc.value.missing[0] == 1
    rep = decode_all(lib, caches, broken)
    assert not rep.all_ok
    assert {r.user for r in rep.per_user if not r.success} == {1, 4}


def test_decoder_ignores_segment_order():
    cfg, lib, caches = setup(4, 6, seed=9)
    t = deliver(lib, caches, (2, 4, 1, 1, 3, 2))
    shuffled = dataclasses.replace(
        t, part1=tuple(reversed(t.part1)), part3=tuple(random.Random(1).sample(t.part3, len(t.part3)))
    )
    assert decode_all(lib, caches, shuffled).all_ok


@pytest.mark.parametrize("d", [(2, 2, 2, 2), (1, 1, 1, 1), (3, 3, 3, 3)])
def test_fallback_decodes(d):
    cfg, lib, caches = setup(3, 4, seed=2)
    t = deliver(lib, caches, d)
    rep = decode_all(lib, caches, t)
    assert rep.all_ok and rep.measured_rate == 1
    for u in range(1, 5):
        assert oracle_decodes(u, d[0], lib, caches, t)


def test_seed_from_other_file_is_not_enough():
    # only user 1 can start the chain when the clear seed belongs to another file
    cfg, lib, caches = setup(3, 4, seed=4)
    t = deliver(lib, caches, (2, 2, 2, 2))
    other = Piece(1, 1, None)
    seg = Segment(SegmentLabel(1, "fallback_seed", (other,)), lib.subfile(1, 1, 4))
    variant = dataclasses.replace(t, part1=(seg,))
    assert variant.total_bits == cfg.file_bits
    ok = [oracle_decodes(u, 2, lib, caches, variant) for u in range(1, 5)]
    assert ok == [True, False, False, False]


def test_relabeling_consistency():
    # same instance seen through the canonical relabeling decodes to the same files
    cfg, lib, caches = setup(3, 4, seed=8)
    d = (3, 1, 3, 2)
    t = deliver(lib, caches, d)
    p = t.profile
    decoded = {u: decode_user(u, caches.user(u), t) for u in range(1, 5)}

    subs = [[lib.subfile(p.orig_file(c), p.orig_user(q), 4) for q in range(1, 5)] for c in range(1, 4)]
    canon_lib = FileLibrary(tuple(concat(row) for row in subs))
    canon_caches = place_caches(canon_lib, cfg)
    ct = deliver(canon_lib, canon_caches, p.canonical_demands())
    assert ct.profile.user_order == (1, 2, 3, 4)
    for q in range(1, 5):
        got = decode_user(q, canon_caches.user(q), ct)
        want_orig = decoded[p.orig_user(q)]
        # canonical subfile order is a permutation of the original one
        size = cfg.subfile_bits
        back = [None] * 4
        for pos in range(1, 5):
            back[p.orig_user(pos) - 1] = got.slice((pos - 1) * size, pos * size)
        assert concat(back) == want_orig


@pytest.mark.parametrize(
    "n,k,max_rate",
    [(3, 5, Fraction(21, 10)), (2, 3, Fraction(4, 3)), (4, 4, Fraction(2))],
)
def test_verify_all(n, k, max_rate):
    cfg, lib, _ = setup(n, k, seed=5)
    s = verify_all_demands(cfg, lib)
    assert s.all_ok and not s.partial
    assert len(s.outcomes) == n ** k
    assert s.max_rate == max_rate


def test_verify_over_budget_is_partial():
    cfg, lib, _ = setup(3, 5, seed=5)
    s = verify_all_demands(cfg, lib, budget=100, seed=3)
    assert s.partial and s.all_ok
    assert any(len(set(o.demands)) == 3 for o in s.outcomes)
    assert s.max_rate == Fraction(21, 10)


def test_verify_with_workers_matches_serial():
    cfg, lib, _ = setup(3, 4, seed=5)
    a = verify_all_demands(cfg, lib)
    b = verify_all_demands(cfg, lib, workers=2)
    assert a.outcomes == b.outcomes


def test_worst_case_profile():
    assert worst_case_profile(SystemConfig.minimal(3, 5)).description == "all 3 files requested"
    wc = worst_case_profile(SystemConfig.minimal(4, 4))
    assert wc.description == "all users distinct" and wc.n_prime == 4
    wc = worst_case_profile(SystemConfig.minimal(2, 3))
    cfg, lib, _ = setup(2, 3)
    s = verify_all_demands(cfg, lib)
    assert set(s.argmax) == {d for d in itertools.product((1, 2), repeat=3) if wc.contains(d)}
