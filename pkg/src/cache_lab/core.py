"""Instance configuration, bit blocks and file partitioning."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence


class ShapeError(ValueError):
    """Raised when block lengths or split sizes do not line up."""


class ConfigError(ValueError):
    """Raised for an inadmissible instance or an inconsistent input."""


def lcm_upto(n: int) -> int:
    """lcm(1, 2, ..., n); 1 for n < 1."""
    return reduce(math.lcm, range(1, n + 1), 1)


def min_file_bits(n_files: int, n_users: int) -> int:
    """Smallest F that keeps every subfile/piece split exact for any demand vector."""
    return n_users * lcm_upto(min(n_files, n_users) - 1)


@dataclass(frozen=True)
class SystemConfig:
    n_files: int
    n_users: int
    file_bits: int

    def __post_init__(self) -> None:
        if self.n_files < 2:
            raise ConfigError(f"need at least 2 files, got {self.n_files}")
        if self.n_users < 1:
            raise ConfigError(f"need at least 1 user, got {self.n_users}")
        unit = min_file_bits(self.n_files, self.n_users)
        if self.file_bits < 1 or self.file_bits % unit:
            raise ConfigError(
                f"file_bits={self.file_bits} must be a positive multiple of {unit}"
            )

    @classmethod
    def minimal(cls, n_files: int, n_users: int, multiplier: int = 1) -> SystemConfig:
        return cls(n_files, n_users, multiplier * min_file_bits(n_files, n_users))

    @property
    def subfile_bits(self) -> int:
        return self.file_bits // self.n_users


@dataclass(frozen=True)
class BitBlock:
    """Fixed-length bit string.

    Bits are held in an arbitrary-precision integer; bit 0 of the block is
    the most significant bit of ``value``, so concatenation is shift-and-or.
    """

    value: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ShapeError("negative length")
        if self.value < 0 or self.value >> self.length:
            raise ShapeError(f"value does not fit in {self.length} bits")

    @classmethod
    def zeros(cls, length: int) -> BitBlock:
        return cls(0, length)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitBlock:
        value = 0
        length = 0
        for b in bits:
            value = (value << 1) | (1 if b else 0)
            length += 1
        return cls(value, length)

    @classmethod
    def from_str(cls, s: str) -> BitBlock:
        return cls.from_bits(int(c) for c in s)

    @classmethod
    def from_hex(cls, text: str, length: int) -> BitBlock:
        return cls(int(text, 16) if text else 0, length)

    @classmethod
    def random(cls, length: int, rng: random.Random) -> BitBlock:
        return cls(rng.getrandbits(length) if length else 0, length)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not -self.length <= i < self.length:
            raise IndexError(i)
        i %= self.length
        return (self.value >> (self.length - 1 - i)) & 1

    def __xor__(self, other: BitBlock) -> BitBlock:
        return xor_blocks(self, other)

    def bits(self) -> list[int]:
        return [self[i] for i in range(self.length)]

    def hex(self) -> str:
        """Zero-padded hex of the value, ceil(length/4) digits."""
        width = (self.length + 3) // 4
        return format(self.value, f"0{width}x") if width else ""

    def slice(self, start: int, stop: int) -> BitBlock:
        if not 0 <= start <= stop <= self.length:
            raise ShapeError(f"slice [{start}:{stop}] outside block of {self.length}")
        width = stop - start
        return BitBlock((self.value >> (self.length - stop)) & ((1 << width) - 1), width)

    def popcount(self) -> int:
        return bin(self.value).count("1")

    def __str__(self) -> str:
        return "".join(map(str, self.bits()))


def xor_blocks(a: BitBlock, b: BitBlock) -> BitBlock:
    if a.length != b.length:
        raise ShapeError(f"cannot XOR blocks of length {a.length} and {b.length}")
    return BitBlock(a.value ^ b.value, a.length)


def concat(blocks: Sequence[BitBlock]) -> BitBlock:
    value = 0
    length = 0
    for blk in blocks:
        value = (value << blk.length) | blk.value
        length += blk.length
    return BitBlock(value, length)


def split_block(block: BitBlock, parts: int) -> list[BitBlock]:
    """Cut ``block`` into ``parts`` equal consecutive blocks."""
    if parts < 1:
        raise ShapeError(f"parts must be positive, got {parts}")
    if block.length % parts:
        raise ShapeError(f"length {block.length} not divisible by {parts}")
    size = block.length // parts
    return [block.slice(p * size, (p + 1) * size) for p in range(parts)]


def partition_file(w: BitBlock, k: int) -> list[BitBlock]:
    """Split a file into ``k`` subfiles; entry ``j-1`` is subfile ``j``."""
    return split_block(w, k)


def partition_subfile(s: BitBlock, parts: int) -> list[BitBlock]:
    """Split a subfile into pieces; entry ``l-1`` is piece level ``l``."""
    return split_block(s, parts)


@dataclass(frozen=True)
class FileLibrary:
    files: tuple[BitBlock, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "files", tuple(self.files))
        if not self.files:
            raise ConfigError("empty library")
        lengths = {f.length for f in self.files}
        if len(lengths) != 1:
            raise ConfigError(f"files have unequal lengths {sorted(lengths)}")

    @property
    def n_files(self) -> int:
        return len(self.files)

    @property
    def file_bits(self) -> int:
        return self.files[0].length

    def file(self, n: int) -> BitBlock:
        """File ``n`` (1-based)."""
        return self.files[n - 1]

    def check(self, config: SystemConfig) -> None:
        if self.n_files != config.n_files or self.file_bits != config.file_bits:
            raise ConfigError(
                f"library has {self.n_files} files of {self.file_bits} bits, "
                f"config expects {config.n_files} of {config.file_bits}"
            )

    def subfile(self, n: int, j: int, n_users: int) -> BitBlock:
        """W_{n,j}: subfile ``j`` (1-based) of file ``n``."""
        size = self.file_bits // n_users
        return self.files[n - 1].slice((j - 1) * size, j * size)


def random_library(config: SystemConfig, seed: int = 0) -> FileLibrary:
    rng = random.Random(seed)
    return FileLibrary(tuple(BitBlock.random(config.file_bits, rng) for _ in range(config.n_files)))


def zero_library(config: SystemConfig) -> FileLibrary:
    return FileLibrary(tuple(BitBlock.zeros(config.file_bits) for _ in range(config.n_files)))


def pattern_library(config: SystemConfig) -> FileLibrary:
    """Marker fill: subfile (n, j) repeats the 32-bit word 0x nnnn jjjj.

    A hex dump of any decoded subfile shows which (file, subfile) it came
    from. Subfiles shorter than 32 bits get a truncated marker, so tiny
    instances are not all-distinct; use ``random_library`` there.
    """
    size = config.subfile_bits
    files = []
    for n in range(1, config.n_files + 1):
        subs = []
        for j in range(1, config.n_users + 1):
            word = ((n & 0xFFFF) << 16) | (j & 0xFFFF)
            reps = -(-size // 32)
            full = BitBlock(int(format(word, "032b") * reps, 2), 32 * reps)
            subs.append(full.slice(0, size))
        files.append(concat(subs))
    return FileLibrary(tuple(files))
