"""Double-dummy trick tables and their JSONL dataset format.

One record per line: {"deal": ..., "dealer": ..., "vul": ..., "dds": [...]},
with the 20 trick counts in declarer-major order (N, E, S, W) crossed with
strain order (clubs, diamonds, hearts, spades, notrump). This field order is
part of the format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from ..deals import Deal, GameVariant, SEAT_NAMES, Vulnerability, format_deal, parse_deal
from ..errors import DataError


@dataclass(frozen=True)
class DdsTable:
    """Tricks the declaring side takes, per (declarer seat, strain)."""

    tricks: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.tricks) != 20:
            raise DataError(f"trick table needs 20 entries, got {len(self.tricks)}")
        if any(not isinstance(t, int) or t < 0 for t in self.tricks):
            raise DataError("trick table entries must be non-negative integers")

    def entry(self, declarer: int, strain: int) -> int:
        return self.tricks[declarer * 5 + strain]


@dataclass(frozen=True)
class DdsRecord:
    deal: Deal
    table: DdsTable

    def __post_init__(self) -> None:
        limit = self.deal.variant.ranks_per_suit
        if any(t > limit for t in self.table.tricks):
            raise DataError(
                f"trick count exceeds the {limit} tricks available in this deck"
            )


def record_to_json(record: DdsRecord) -> str:
    deal = record.deal
    return json.dumps(
        {
            "deal": format_deal(deal),
            "dealer": SEAT_NAMES[deal.dealer],
            "vul": deal.vulnerability.value,
            "dds": list(record.table.tricks),
        }
    )


def record_from_json(line: str, *, variant: GameVariant | None = None) -> DdsRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise DataError("record must be a JSON object")
    for key in ("deal", "dealer", "vul", "dds"):
        if key not in obj:
            raise DataError(f"record missing {key!r} field")
    deal = parse_deal(obj["deal"], variant=variant)
    dealer = SEAT_NAMES.find(str(obj["dealer"]))
    if dealer < 0:
        raise DataError(f"unknown dealer {obj['dealer']!r}")
    try:
        vul = Vulnerability(obj["vul"])
    except ValueError:
        raise DataError(f"unknown vulnerability {obj['vul']!r}") from None
    deal = replace(deal, dealer=dealer, vulnerability=vul)
    dds = obj["dds"]
    if not isinstance(dds, list) or not all(isinstance(t, int) for t in dds):
        raise DataError("'dds' must be a list of integers")
    return DdsRecord(deal=deal, table=DdsTable(tuple(dds)))


def store_dds_dataset(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record_to_json(record) + "\n")


def load_dds_dataset(path, *, variant: GameVariant | None = None) -> list[DdsRecord]:
    """Records in file order; a plain list, so position lookup is O(1)."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(record_from_json(line, variant=variant))
            except DataError as exc:
                raise DataError(f"line {lineno}: {exc}") from None
    return records
