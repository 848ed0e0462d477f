"""Bit-level simulator and exact rate toolkit for XOR-placement coded caching."""

from .core import BitBlock, FileLibrary, SystemConfig, xor_blocks, partition_file, partition_subfile
from .placement import CacheContents, place_caches, cached_bits_per_user
from .delivery import (
    DemandVector,
    DeliveryTranscript,
    GroupingProfile,
    canonicalize_demands,
    deliver,
    piece_index,
)
from .decode import DecodeReport, decode_all, decode_user, verify_all_demands, worst_case_profile

__version__ = "0.1.0"
