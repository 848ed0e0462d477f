import pytest
from hypothesis import given, strategies as st

from cache_lab.core import (
    BitBlock,
    ConfigError,
    FileLibrary,
    ShapeError,
    SystemConfig,
    concat,
    lcm_upto,
    min_file_bits,
    partition_file,
    partition_subfile,
    pattern_library,
    xor_blocks,
)

def same_len_pair(n_max=64):
    return st.integers(0, n_max).flatmap(
        lambda n: st.tuples(*[st.integers(0, (1 << n) - 1).map(lambda v, n=n: BitBlock(v, n))] * 3)
    )


def test_xor_truth_table():
    assert str(xor_blocks(BitBlock.from_str("0101"), BitBlock.from_str("0011"))) == "0110"


def test_xor_length_mismatch():
    with pytest.raises(ShapeError):
        xor_blocks(BitBlock.zeros(3), BitBlock.zeros(4))


@given(same_len_pair())
def test_xor_group_laws(abc):
    a, b, c = abc
    z = BitBlock.zeros(a.length)
    assert (a ^ b) ^ c == a ^ (b ^ c)
    assert a ^ b == b ^ a
    assert a ^ a == z
    assert a ^ z == a


def test_bit_order_and_hex():
    b = BitBlock.from_str("1000000001")
    assert b[0] == 1 and b[1] == 0 and b[-1] == 1
    assert b.hex() == "201"
    assert BitBlock.from_hex("201", 10) == b
    assert BitBlock.zeros(0).hex() == ""


def test_value_must_fit():
    with pytest.raises(ShapeError):
        BitBlock(4, 2)


def test_partition_file_example():
    w = BitBlock.from_str("1101001110")
    parts = partition_file(w, 5)
    assert [p.length for p in parts] == [2] * 5
    assert [str(p) for p in parts] == ["11", "01", "00", "11", "10"]
    assert concat(parts) == w


def test_partition_identity_and_zero():
    w = BitBlock.from_str("10110")
    assert partition_file(w, 1) == [w]
    assert partition_subfile(w, 1) == [w]
    assert partition_file(BitBlock.zeros(12), 3) == [BitBlock.zeros(4)] * 3


def test_partition_rejects_uneven():
    with pytest.raises(ShapeError):
        partition_file(BitBlock.zeros(10), 3)
    with pytest.raises(ShapeError):
        partition_subfile(BitBlock.zeros(5), 2)


def test_partition_subfile_halves():
    s = BitBlock.from_str("10")
    assert [str(p) for p in partition_subfile(s, 2)] == ["1", "0"]


@given(st.sampled_from([2, 3, 4]), st.integers(0, 30), st.randoms(use_true_random=False))
def test_partition_subfile_round_trip(parts, size, rnd):
    s = BitBlock.random(parts * size, rnd)
    assert concat(partition_subfile(s, parts)) == s


def test_lcm_and_min_bits():
    assert lcm_upto(0) == 1
    assert lcm_upto(3) == 6
    assert lcm_upto(10) == 2520
    assert min_file_bits(3, 5) == 10
    assert min_file_bits(4, 6) == 36
    assert min_file_bits(4, 1) == 1


def test_config_invariants():
    SystemConfig(3, 5, 20)
    with pytest.raises(ConfigError):
        SystemConfig(1, 5, 10)
    with pytest.raises(ConfigError):
        SystemConfig(3, 5, 15)
    with pytest.raises(ConfigError):
        SystemConfig(4, 6, 18)  # 6 * lcm(1,2,3) = 36


def test_library_shape():
    with pytest.raises(ConfigError):
        FileLibrary((BitBlock.zeros(3), BitBlock.zeros(4)))
    cfg = SystemConfig(3, 5, 10)
    lib = FileLibrary((BitBlock.zeros(10),) * 2)
    with pytest.raises(ConfigError):
        lib.check(cfg)


def test_pattern_library_markers():
    cfg = SystemConfig.minimal(3, 4, multiplier=16)  # 4 * 2 * 16 = 128 bits, 32-bit subfiles
    lib = pattern_library(cfg)
    assert lib.subfile(2, 3, 4).hex() == "00020003"
    assert lib.subfile(3, 1, 4).hex() == "00030001"
