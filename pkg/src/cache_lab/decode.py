"""Per-user decoders and exhaustive decodability checks."""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import BitBlock, FileLibrary, SystemConfig, concat, split_block, xor_blocks
from .delivery import (
    DeliveryTranscript,
    GroupingProfile,
    PiOrder,
    Piece,
    deliver,
    expected_rate,
)
from .placement import CacheContents, place_caches, unlock_chain

Key = tuple[int, int, int]  # (file, subfile, level), original indices


class DecodeError(RuntimeError):
    def __init__(self, user: int, missing: Key):
        self.user = user
        self.missing = missing
        f, s, l = missing
        super().__init__(f"user {user}: cannot resolve W_{{{f},{s}}}^({l})")


def _index(transcript: DeliveryTranscript, levels: int):
    """Split the transcript into clear pieces and two-term XOR links, per level."""
    clear: dict[Key, BitBlock] = {}
    links: dict[frozenset[Key], BitBlock] = {}
    seeds = []
    for seg in transcript.segments:
        terms = seg.label.terms
        if seg.label.role == "cross_seed":
            seeds.append(seg)
            continue
        if terms[0].level is None:
            chunks = split_block(seg.payload, levels)
            keyed = [([(t.file, t.subfile, l) for t in terms], chunks[l - 1]) for l in range(1, levels + 1)]
        else:
            keyed = [([(t.file, t.subfile, t.level) for t in terms], seg.payload)]
        for keys, blk in keyed:
            if len(keys) == 1:
                clear[keys[0]] = blk
            elif len(keys) == 2:
                links[frozenset(keys)] = blk
            else:
                raise ValueError(f"unexpected {len(keys)}-term segment {seg.label}")
    return clear, links, seeds


def _walk(know: dict[Key, BitBlock], links, f: int, level: int, users: Sequence[int]) -> None:
    """Propagate known pieces of file ``f`` along a chain over ``users``."""
    keys = [(f, u, level) for u in users]
    for order in (range(len(keys) - 1), range(len(keys) - 1, 0, -1)):
        for a in order:
            b = a + 1 if order.step == 1 else a - 1
            if keys[a] in know and keys[b] not in know:
                link = links.get(frozenset((keys[a], keys[b])))
                if link is not None:
                    know[keys[b]] = xor_blocks(know[keys[a]], link)


def decode_user(
    k: int,
    cache: Sequence[BitBlock],
    transcript: DeliveryTranscript,
    profile: GroupingProfile | None = None,
    _indexed=None,
) -> BitBlock:
    """Reconstruct the file requested by original user ``k``.

    Uses only the user's cache, the segment labels/payloads and the demand
    vector (through ``profile``). Raises DecodeError naming the first piece
    it could not resolve.
    """
    profile = profile or transcript.profile
    config = transcript.config
    L = profile.levels
    p = profile.position(k)
    i = profile.group_of(p)
    my_file = profile.orig_file(i)
    group_users = [profile.orig_user(q) for q in profile.group_range(i)]

    clear, links, seeds = _indexed or _index(transcript, L)
    know = dict(clear)

    # own subfiles: one clear piece per level unlocks the whole cache chain
    sliced = [split_block(entry, L) for entry in cache]
    for level in range(1, L + 1):
        hit = next(((f, blk) for (f, s, l), blk in clear.items() if s == k and l == level), None)
        if hit is None:
            continue
        record = tuple(chunks[level - 1] for chunks in sliced)
        for f, blk in enumerate(unlock_chain(record, hit[0], hit[1]), start=1):
            know.setdefault((f, k, level), blk)

    for level in range(1, L + 1):
        _walk(know, links, my_file, level, group_users)

    for seed in seeds:
        loop = seed.label.loop_dict()
        if i not in (loop["i"], loop["j"]):
            continue
        g = loop["j"] if loop["i"] == i else loop["i"]
        mine, other = seed.label.terms
        if mine.file != my_file:
            mine, other = other, mine
        _walk(know, links, other.file, other.level, group_users)
        other_key = (other.file, other.subfile, other.level)
        if other_key not in know:
            continue
        know[(mine.file, mine.subfile, mine.level)] = xor_blocks(seed.payload, know[other_key])
        _walk(know, links, my_file, mine.level, [profile.orig_user(q) for q in profile.group_range(g)])

    pieces = []
    for s in range(1, config.n_users + 1):
        for level in range(1, L + 1):
            key = (my_file, s, level)
            if key not in know:
                raise DecodeError(k, key)
            pieces.append(know[key])
    return concat(pieces)


@dataclass(frozen=True)
class UserResult:
    user: int
    requested_file: int
    success: bool
    mismatched_bits: int
    error: str | None = None


@dataclass(frozen=True)
class DecodeReport:
    per_user: tuple[UserResult, ...]
    measured_rate: Fraction

    @property
    def all_ok(self) -> bool:
        return all(r.success and r.mismatched_bits == 0 for r in self.per_user)

    def to_dict(self) -> dict:
        return {
            "all_ok": self.all_ok,
            "measured_rate": str(self.measured_rate),
            "per_user": [
                {
                    "user": r.user,
                    "requested_file": r.requested_file,
                    "success": r.success,
                    "mismatched_bits": r.mismatched_bits,
                    "error": r.error,
                }
                for r in self.per_user
            ],
        }


def decode_all(library: FileLibrary, caches: CacheContents, transcript: DeliveryTranscript) -> DecodeReport:
    results = []
    indexed = _index(transcript, transcript.profile.levels)
    for u, want in enumerate(transcript.demands, start=1):
        target = library.file(want)
        try:
            got = decode_user(u, caches.user(u), transcript, _indexed=indexed)
        except DecodeError as exc:
            results.append(UserResult(u, want, False, target.length, str(exc)))
            continue
        bad = xor_blocks(got, target).popcount()
        results.append(UserResult(u, want, bad == 0, bad))
    return DecodeReport(tuple(results), transcript.rate)


@dataclass(frozen=True)
class DemandOutcome:
    demands: tuple[int, ...]
    n_prime: int
    rate: Fraction
    ok: bool

    @property
    def rate_matches(self) -> bool:
        return self.rate == expected_rate(self.n_prime, len(self.demands))


@dataclass
class VerifySummary:
    config: SystemConfig
    outcomes: list[DemandOutcome]
    partial: bool = False
    pi_order: str = "ascending"
    failures: list[DemandOutcome] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.failures = [o for o in self.outcomes if not (o.ok and o.rate_matches)]

    @property
    def all_ok(self) -> bool:
        return not self.failures

    @property
    def max_rate(self) -> Fraction:
        return max(o.rate for o in self.outcomes)

    @property
    def argmax(self) -> list[tuple[int, ...]]:
        top = self.max_rate
        return [o.demands for o in self.outcomes if o.rate == top]

    def to_dict(self) -> dict:
        return {
            "n_files": self.config.n_files,
            "n_users": self.config.n_users,
            "file_bits": self.config.file_bits,
            "pi_order": self.pi_order,
            "vectors_checked": len(self.outcomes),
            "partial": self.partial,
            "all_ok": self.all_ok,
            "max_rate": str(self.max_rate),
            "argmax_count": len(self.argmax),
            "failures": [
                {"demands": list(o.demands), "rate": str(o.rate), "decoded": o.ok}
                for o in self.failures
            ],
        }


def check_demand(
    library: FileLibrary, caches: CacheContents, demands: Sequence[int], pi_order: PiOrder = "ascending"
) -> DemandOutcome:
    t = deliver(library, caches, demands, pi_order)
    report = decode_all(library, caches, t)
    return DemandOutcome(tuple(demands), t.profile.n_prime, t.rate, report.all_ok)


def _check_chunk(library, caches, chunk, pi_order):
    return [check_demand(library, caches, d, pi_order) for d in chunk]


def _sample_vectors(config: SystemConfig, seed: int, n_random: int = 1000, n_worst: int = 1000):
    rng = random.Random(seed)
    n, k = config.n_files, config.n_users
    wc = worst_case_profile(config)
    seen: set[tuple[int, ...]] = set()
    for _ in range(n_worst):
        # put the target number of distinct files in random positions, fill the rest
        files = rng.sample(range(1, n + 1), wc.n_prime)
        d = files + [rng.choice(files) for _ in range(k - wc.n_prime)]
        rng.shuffle(d)
        seen.add(tuple(d))
    for _ in range(n_random):
        seen.add(tuple(rng.randint(1, n) for _ in range(k)))
    return sorted(seen)


def verify_all_demands(
    config: SystemConfig,
    library: FileLibrary,
    budget: int = 60_000,
    pi_order: PiOrder = "ascending",
    workers: int = 1,
    seed: int = 0,
) -> VerifySummary:
    """Place, deliver and decode every demand vector in [N]^K.

    Above ``budget`` vectors, checks sampled worst-case vectors plus seeded
    random ones instead, and flags the summary as partial.
    """
    caches = place_caches(library, config)
    total = config.n_files ** config.n_users
    if total <= budget:
        vectors = list(itertools.product(range(1, config.n_files + 1), repeat=config.n_users))
        partial = False
    else:
        vectors = _sample_vectors(config, seed)
        partial = True
    if workers <= 1 or len(vectors) < 64:
        outcomes = _check_chunk(library, caches, vectors, pi_order)
    else:
        size = -(-len(vectors) // (workers * 4))
        chunks = [vectors[a:a + size] for a in range(0, len(vectors), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_check_chunk, *zip(*[(library, caches, c, pi_order) for c in chunks]))
            outcomes = [o for chunk in results for o in chunk]
    return VerifySummary(config, outcomes, partial, pi_order)


@dataclass(frozen=True)
class WorstCaseClass:
    description: str
    n_prime: int

    def contains(self, demands: Sequence[int]) -> bool:
        return len(set(demands)) == self.n_prime


def worst_case_profile(config: SystemConfig) -> WorstCaseClass:
    n, k = config.n_files, config.n_users
    if n < k:
        return WorstCaseClass(f"all {n} files requested", n)
    return WorstCaseClass("all users distinct", k)
