"""Demand canonicalization and the three-part broadcast.

Everything is computed in canonical coordinates (groups of users sharing a
demand, demanded files relabeled 1..N') and emitted with labels in original
coordinates, so a decoder only needs the labels and its own cache.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, NamedTuple, Sequence

from .core import BitBlock, ConfigError, FileLibrary, SystemConfig, split_block, xor_blocks
from .placement import CacheContents

PiOrder = Literal["ascending", "descending"]


@dataclass(frozen=True)
class DemandVector:
    demands: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "demands", tuple(int(x) for x in self.demands))
        if not self.demands:
            raise ConfigError("empty demand vector")
        if min(self.demands) < 1:
            raise ConfigError(f"file indices are 1-based: {self.demands}")

    def __len__(self) -> int:
        return len(self.demands)

    def check(self, config: SystemConfig) -> None:
        if len(self.demands) != config.n_users:
            raise ConfigError(f"{len(self.demands)} demands for {config.n_users} users")
        if max(self.demands) > config.n_files:
            raise ConfigError(f"demand exceeds N={config.n_files}: {self.demands}")


@dataclass(frozen=True)
class GroupingProfile:
    """Canonical form of a demand vector.

    ``user_order[p-1]`` is the original user at canonical position ``p``;
    ``file_order[c-1]`` is the original file with canonical index ``c``.
    """

    n_prime: int
    group_sizes: tuple[int, ...]
    prefix_sums: tuple[int, ...]
    user_order: tuple[int, ...]
    file_order: tuple[int, ...]

    @property
    def n_users(self) -> int:
        return self.prefix_sums[-1]

    @property
    def levels(self) -> int:
        """Pieces per subfile: N'-1, or 1 for the single-demand fallback."""
        return max(self.n_prime - 1, 1)

    def group_range(self, i: int) -> range:
        return range(self.prefix_sums[i - 1] + 1, self.prefix_sums[i] + 1)

    def last(self, i: int) -> int:
        """S_i, the last canonical position of group ``i``."""
        return self.prefix_sums[i]

    def orig_user(self, p: int) -> int:
        return self.user_order[p - 1]

    def orig_file(self, c: int) -> int:
        return self.file_order[c - 1]

    def position(self, user: int) -> int:
        return self.user_order.index(user) + 1

    def group_of(self, p: int) -> int:
        for i in range(1, self.n_prime + 1):
            if p <= self.prefix_sums[i]:
                return i
        raise IndexError(p)

    def canonical_demands(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.n_prime + 1) for _ in self.group_range(i))


def canonicalize_demands(d: DemandVector | Sequence[int]) -> GroupingProfile:
    demands = d.demands if isinstance(d, DemandVector) else tuple(d)
    files = tuple(sorted(set(demands)))
    rank = {f: c for c, f in enumerate(files, start=1)}
    users = tuple(sorted(range(1, len(demands) + 1), key=lambda u: (rank[demands[u - 1]], u)))
    sizes = tuple(demands.count(f) for f in files)
    prefix = [0]
    for s in sizes:
        prefix.append(prefix[-1] + s)
    return GroupingProfile(len(files), sizes, tuple(prefix), users, files)


def piece_index(j: int, i: int) -> int:
    """Level of file ``j``'s piece sent in the clear to a user of group ``i``."""
    if j == i:
        raise ValueError("a user is not sent a clear piece of its own file")
    return j if j < i else j - 1


class Piece(NamedTuple):
    """Constituent of a segment, in original indices.

    ``level`` is None when the segment carries the whole subfile.
    """

    file: int
    subfile: int
    level: int | None


@dataclass(frozen=True)
class SegmentLabel:
    part: int
    role: str
    terms: tuple[Piece, ...]
    loop: tuple[tuple[str, int], ...] = ()

    def loop_dict(self) -> dict[str, int]:
        return dict(self.loop)


@dataclass(frozen=True)
class Segment:
    label: SegmentLabel
    payload: BitBlock


@dataclass(frozen=True)
class DeliveryTranscript:
    config: SystemConfig
    demands: tuple[int, ...]
    profile: GroupingProfile
    part1: tuple[Segment, ...]
    part2: tuple[Segment, ...]
    part3: tuple[Segment, ...]

    @property
    def fallback(self) -> bool:
        return self.profile.n_prime == 1

    @property
    def parts(self) -> tuple[tuple[Segment, ...], ...]:
        return self.part1, self.part2, self.part3

    @property
    def segments(self) -> tuple[Segment, ...]:
        return self.part1 + self.part2 + self.part3

    @property
    def part_bits(self) -> tuple[int, int, int]:
        return tuple(sum(s.payload.length for s in part) for part in self.parts)  # type: ignore[return-value]

    @property
    def total_bits(self) -> int:
        return sum(self.part_bits)

    @property
    def part_rates(self) -> tuple[Fraction, Fraction, Fraction]:
        f = self.config.file_bits
        return tuple(Fraction(b, f) for b in self.part_bits)  # type: ignore[return-value]

    @property
    def rate(self) -> Fraction:
        return Fraction(self.total_bits, self.config.file_bits)


class _Slicer:
    """Memoized subfile/piece extraction for one (library, levels) pair."""

    def __init__(self, library: FileLibrary, n_users: int, levels: int):
        self.library = library
        self.n_users = n_users
        self.levels = levels
        self._cache: dict[tuple[int, int], list[BitBlock]] = {}

    def subfile(self, n: int, j: int) -> BitBlock:
        return self.library.subfile(n, j, self.n_users)

    def piece(self, n: int, j: int, level: int) -> BitBlock:
        key = (n, j)
        if key not in self._cache:
            self._cache[key] = split_block(self.subfile(n, j), self.levels)
        return self._cache[key][level - 1]

    def block(self, p: Piece) -> BitBlock:
        if p.level is None:
            return self.subfile(p.file, p.subfile)
        return self.piece(p.file, p.subfile, p.level)

    def segment(self, part: int, role: str, terms: Sequence[Piece], **loop: int) -> Segment:
        payload = self.block(terms[0])
        for t in terms[1:]:
            payload = xor_blocks(payload, self.block(t))
        return Segment(SegmentLabel(part, role, tuple(terms), tuple(loop.items())), payload)


def deliver_part1(library: FileLibrary, profile: GroupingProfile) -> tuple[Segment, ...]:
    """Per-user clear pieces: one of every other demanded file, at distinct levels."""
    if profile.n_prime < 2:
        raise ValueError("part 1 needs at least two distinct demands")
    sl = _Slicer(library, profile.n_users, profile.levels)
    out = []
    for i in range(1, profile.n_prime + 1):
        for k in profile.group_range(i):
            for j in range(1, profile.n_prime + 1):
                if j == i:
                    continue
                m = piece_index(j, i)
                term = Piece(profile.orig_file(j), profile.orig_user(k), m)
                out.append(sl.segment(1, "uncoded", [term], i=i, k=k, j=j, m=m))
    return tuple(out)


def deliver_part2(library: FileLibrary, profile: GroupingProfile) -> tuple[Segment, ...]:
    """Within each group, the chain of consecutive demanded subfiles."""
    sl = _Slicer(library, profile.n_users, profile.levels)
    out = []
    for i in range(1, profile.n_prime + 1):
        f = profile.orig_file(i)
        for k in profile.group_range(i)[:-1]:
            terms = [Piece(f, profile.orig_user(k), None), Piece(f, profile.orig_user(k + 1), None)]
            out.append(sl.segment(2, "group_chain", terms, i=i, k=k))
    return tuple(out)


def part3_levels(profile: GroupingProfile, i: int, j: int, pi_order: PiOrder = "ascending"):
    """Paired levels (m1, m2) exchanged between groups i < j."""
    full = range(1, profile.levels + 1)
    first = [m for m in full if m != piece_index(i, j)]
    second = [m for m in full if m != piece_index(j, i)]
    if pi_order == "descending":
        first.reverse()
        second.reverse()
    elif pi_order != "ascending":
        raise ValueError(f"unknown permutation order {pi_order!r}")
    return list(zip(first, second))


def deliver_part3(
    library: FileLibrary, profile: GroupingProfile, pi_order: PiOrder = "ascending"
) -> tuple[Segment, ...]:
    """Pairwise group exchange of the remaining N'-2 levels."""
    if profile.n_prime < 2:
        raise ValueError("part 3 needs at least two distinct demands")
    sl = _Slicer(library, profile.n_users, profile.levels)
    out = []
    n_prime = profile.n_prime
    for i in range(1, n_prime):
        for j in range(i + 1, n_prime + 1):
            fi, fj = profile.orig_file(i), profile.orig_file(j)
            for l, (m1, m2) in enumerate(part3_levels(profile, i, j, pi_order), start=1):
                for k in profile.group_range(j)[:-1]:
                    terms = [Piece(fi, profile.orig_user(k), m1), Piece(fi, profile.orig_user(k + 1), m1)]
                    out.append(sl.segment(3, "cross_chain", terms, i=i, j=j, l=l, m1=m1, m2=m2, k=k))
                for k in profile.group_range(i)[:-1]:
                    terms = [Piece(fj, profile.orig_user(k), m2), Piece(fj, profile.orig_user(k + 1), m2)]
                    out.append(sl.segment(3, "cross_chain", terms, i=i, j=j, l=l, m1=m1, m2=m2, k=k))
                seed = [
                    Piece(fi, profile.orig_user(profile.last(j)), m1),
                    Piece(fj, profile.orig_user(profile.last(i)), m2),
                ]
                out.append(sl.segment(3, "cross_seed", seed, i=i, j=j, l=l, m1=m1, m2=m2))
    return tuple(out)


def deliver_single_demand(library: FileLibrary, profile: GroupingProfile):
    """All users want one file c: send W_{c,1} in the clear, then the chain.

    Returns (part1, part2); F bits in total.
    """
    sl = _Slicer(library, profile.n_users, 1)
    c = profile.orig_file(1)
    seed = sl.segment(1, "fallback_seed", [Piece(c, profile.orig_user(1), None)], k=1)
    return (seed,), deliver_part2(library, profile)


def deliver(
    library: FileLibrary,
    caches: CacheContents,
    d: DemandVector | Sequence[int],
    pi_order: PiOrder = "ascending",
) -> DeliveryTranscript:
    config = caches.config
    library.check(config)
    if not isinstance(d, DemandVector):
        d = DemandVector(tuple(d))
    d.check(config)
    profile = canonicalize_demands(d)
    if profile.n_prime == 1:
        p1, p2 = deliver_single_demand(library, profile)
        p3: tuple[Segment, ...] = ()
    else:
        p1 = deliver_part1(library, profile)
        p2 = deliver_part2(library, profile)
        p3 = deliver_part3(library, profile, pi_order)
    return DeliveryTranscript(config, d.demands, profile, p1, p2, p3)


def expected_rate(n_prime: int, n_users: int) -> Fraction:
    """Broadcast size in files for N' distinct demands (1 for N' = 1)."""
    if n_prime == 1:
        return Fraction(1)
    return n_prime * (1 - Fraction(n_prime, 2 * n_users))


def expected_part_rates(n_prime: int, n_users: int) -> tuple[Fraction, Fraction, Fraction]:
    if n_prime == 1:
        return Fraction(1, n_users), 1 - Fraction(1, n_users), Fraction(0)
    k = n_users
    return Fraction(1), 1 - Fraction(n_prime, k), (n_prime - 2) * (1 - Fraction(n_prime, 2 * k))
