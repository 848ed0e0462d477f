"""JSON-lines transcript format.

One ``header`` record, one ``segment`` record per broadcast segment (in
emission order), and a closing ``summary`` record. Payloads are hex with an
explicit bit count; all counts are integers.
"""

from __future__ import annotations

import json
from typing import IO, Iterable, Iterator

from .core import BitBlock, ConfigError, SystemConfig
from .delivery import (
    DeliveryTranscript,
    Piece,
    Segment,
    SegmentLabel,
    canonicalize_demands,
)

FORMAT = "cache-lab-transcript/1"


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def transcript_lines(t: DeliveryTranscript) -> Iterator[str]:
    yield _dump(
        {
            "record": "header",
            "format": FORMAT,
            "n_files": t.config.n_files,
            "n_users": t.config.n_users,
            "file_bits": t.config.file_bits,
            "demands": list(t.demands),
        }
    )
    for seg in t.segments:
        yield _dump(
            {
                "record": "segment",
                "part": seg.label.part,
                "role": seg.label.role,
                "loop": [list(kv) for kv in seg.label.loop],
                "terms": [list(p) for p in seg.label.terms],
                "bits": seg.payload.length,
                "payload": seg.payload.hex(),
            }
        )
    b1, b2, b3 = t.part_bits
    yield _dump(
        {
            "record": "summary",
            "part1_bits": b1,
            "part2_bits": b2,
            "part3_bits": b3,
            "total_bits": t.total_bits,
            "file_bits": t.config.file_bits,
        }
    )


def write_transcript(t: DeliveryTranscript, fh: IO[str]) -> None:
    for line in transcript_lines(t):
        fh.write(line + "\n")


def read_transcript(lines: Iterable[str]) -> DeliveryTranscript:
    header = None
    summary = None
    parts: dict[int, list[Segment]] = {1: [], 2: [], 3: []}
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        rec = json.loads(raw)
        kind = rec.get("record")
        if kind == "header":
            if rec.get("format") != FORMAT:
                raise ConfigError(f"unknown transcript format {rec.get('format')!r}")
            header = rec
        elif kind == "segment":
            label = SegmentLabel(
                part=rec["part"],
                role=rec["role"],
                terms=tuple(Piece(*t) for t in rec["terms"]),
                loop=tuple((k, v) for k, v in rec["loop"]),
            )
            parts[rec["part"]].append(Segment(label, BitBlock.from_hex(rec["payload"], rec["bits"])))
        elif kind == "summary":
            summary = rec
        else:
            raise ConfigError(f"unknown record type {kind!r}")
    if header is None or summary is None:
        raise ConfigError("transcript missing header or summary")
    config = SystemConfig(header["n_files"], header["n_users"], header["file_bits"])
    demands = tuple(header["demands"])
    t = DeliveryTranscript(
        config, demands, canonicalize_demands(demands),
        tuple(parts[1]), tuple(parts[2]), tuple(parts[3]),
    )
    if list(t.part_bits) != [summary["part1_bits"], summary["part2_bits"], summary["part3_bits"]]:
        raise ConfigError("summary bit counts disagree with segment records")
    return t
