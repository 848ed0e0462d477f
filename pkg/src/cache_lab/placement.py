"""Coded placement: each user caches adjacent-file XORs of its own subfiles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import BitBlock, ConfigError, FileLibrary, SystemConfig, xor_blocks


@dataclass(frozen=True)
class CacheContents:
    """Per-user caches.

    ``per_user[k-1][i-1]`` holds ``W_{i,k} xor W_{i+1,k}`` for i in 1..N-1.
    """

    config: SystemConfig
    per_user: tuple[tuple[BitBlock, ...], ...]

    def user(self, k: int) -> tuple[BitBlock, ...]:
        return self.per_user[k - 1]

    @property
    def normalized_capacity(self) -> Fraction:
        return Fraction(self.config.n_files - 1, self.config.n_users)


def place_caches(library: FileLibrary, config: SystemConfig) -> CacheContents:
    library.check(config)
    n, k_users = config.n_files, config.n_users
    per_user = []
    for k in range(1, k_users + 1):
        subs = [library.subfile(i, k, k_users) for i in range(1, n + 1)]
        per_user.append(tuple(xor_blocks(subs[i], subs[i + 1]) for i in range(n - 1)))
    return CacheContents(config, tuple(per_user))


def cached_bits_per_user(caches: CacheContents) -> int:
    counts = {sum(b.length for b in record) for record in caches.per_user}
    if len(counts) != 1:
        raise ConfigError(f"users hold different cache sizes: {sorted(counts)}")
    return counts.pop()


def unlock_chain(record: tuple[BitBlock, ...], known_file: int, known: BitBlock) -> list[BitBlock]:
    """Recover every file's block from one file's block in the clear.

    ``record`` is a user's chain (or a same-level slice of it); returns the
    N blocks indexed by file - 1.
    """
    n = len(record) + 1
    out: list[BitBlock | None] = [None] * n
    out[known_file - 1] = known
    for i in range(known_file, n):
        out[i] = xor_blocks(out[i - 1], record[i - 1])
    for i in range(known_file - 2, -1, -1):
        out[i] = xor_blocks(out[i + 1], record[i])
    return out  # type: ignore[return-value]
