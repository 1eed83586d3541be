"""IP database: performance/power/area coefficients for hardware blocks.

The database replaces external estimation tooling with a flat file of entries:
general-purpose processors keyed by frequency, per-task accelerators keyed by
(task, unroll), and NoC/memory entries keyed by (frequency, bus width).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import MissingDatabaseEntryError, MissingGppEntryError, SchemaError
from .workload import _check_number


@dataclass(frozen=True)
class GppEntry:
    freq_mhz: int
    p_peak_ops_s: float
    e_op_j: float
    leak_w: float
    area_mm2: float


@dataclass(frozen=True)
class AccEntry:
    task: str
    unroll: int
    a_peak: float
    e_op_j: float
    leak_w: float
    area_mm2: float


@dataclass(frozen=True)
class XferEntry:
    """One NoC or memory configuration point."""

    freq_mhz: int
    width_b: int
    e_byte_j: float
    leak_w: float
    area_mm2: float


_GPP_FIELDS = {"freq_mhz", "p_peak_ops_s", "e_op_j", "leak_w", "area_mm2"}
_ACC_FIELDS = {"task", "unroll", "a_peak", "e_op_j", "leak_w", "area_mm2"}
_NOC_FIELDS = {"freq_mhz", "width_b", "e_byte_j", "leak_w", "area_mm2"}
_MEM_FIELDS = _NOC_FIELDS | {"kind"}
MEM_KINDS = ("dram", "sram")


class IpDatabase:
    """Lookup tables resolving block knob settings to PPA coefficients."""

    def __init__(self, gpp=(), acc=(), noc=(), mem=()):
        self.gpp: dict[int, GppEntry] = {}
        for e in gpp:
            if e.freq_mhz in self.gpp:
                raise SchemaError(f"duplicate gpp entry for {e.freq_mhz} MHz")
            self.gpp[e.freq_mhz] = e
        self.acc: dict[tuple[str, int], AccEntry] = {}
        for e in acc:
            key = (e.task, e.unroll)
            if key in self.acc:
                raise SchemaError(f"duplicate acc entry for {key}")
            self.acc[key] = e
        self.noc: dict[tuple[int, int], XferEntry] = {}
        for e in noc:
            key = (e.freq_mhz, e.width_b)
            if key in self.noc:
                raise SchemaError(f"duplicate noc entry for {key}")
            self.noc[key] = e
        self.mem: dict[tuple[str, int, int], XferEntry] = {}
        for kind, e in mem:
            key = (kind, e.freq_mhz, e.width_b)
            if key in self.mem:
                raise SchemaError(f"duplicate mem entry for {key}")
            self.mem[key] = e
        self._check_monotone_speedup()

    def _check_monotone_speedup(self):
        # speedup must not shrink when a task is unrolled further
        by_task: dict[str, list[AccEntry]] = {}
        for e in self.acc.values():
            by_task.setdefault(e.task, []).append(e)
        for task, entries in by_task.items():
            entries.sort(key=lambda e: e.unroll)
            for prev, cur in zip(entries, entries[1:]):
                if cur.a_peak < prev.a_peak:
                    raise SchemaError(
                        f"acc speedup for task {task!r} decreases at unroll {cur.unroll}"
                    )

    # -- lookups ---------------------------------------------------------------

    def gpp_entry(self, freq_mhz: int) -> GppEntry:
        try:
            return self.gpp[freq_mhz]
        except KeyError:
            raise MissingGppEntryError(f"no gpp entry at {freq_mhz} MHz") from None

    def gpp_p_peak_at(self, freq_mhz: int) -> float:
        """Peak GPP rate at a frequency, scaling linearly from the nearest
        lower database entry when the exact point is absent."""
        if not self.gpp:
            raise MissingGppEntryError("database has no gpp entries")
        if freq_mhz in self.gpp:
            return self.gpp[freq_mhz].p_peak_ops_s
        below = [f for f in self.gpp if f <= freq_mhz]
        ref = max(below) if below else min(self.gpp)
        return self.gpp[ref].p_peak_ops_s * (freq_mhz / ref)

    def acc_entry(self, task: str, unroll: int) -> AccEntry:
        try:
            return self.acc[(task, unroll)]
        except KeyError:
            raise MissingDatabaseEntryError(
                f"no accelerator entry for task {task!r} at unroll {unroll}"
            ) from None

    def has_acc(self, task: str, unroll: int = 1) -> bool:
        return (task, unroll) in self.acc

    def acc_unrolls(self, task: str) -> tuple[int, ...]:
        return tuple(sorted(u for t, u in self.acc if t == task))

    def noc_entry(self, freq_mhz: int, width_b: int) -> XferEntry:
        try:
            return self.noc[(freq_mhz, width_b)]
        except KeyError:
            raise MissingDatabaseEntryError(
                f"no noc entry for {freq_mhz} MHz x {width_b} B"
            ) from None

    def mem_entry(self, kind: str, freq_mhz: int, width_b: int) -> XferEntry:
        try:
            return self.mem[(kind, freq_mhz, width_b)]
        except KeyError:
            raise MissingDatabaseEntryError(
                f"no {kind} entry for {freq_mhz} MHz x {width_b} B"
            ) from None

    # -- serialization ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "gpp": [vars(e) for _, e in sorted(self.gpp.items())],
            "acc": [vars(e) for _, e in sorted(self.acc.items())],
            "noc": [vars(e) for _, e in sorted(self.noc.items())],
            "mem": [{"kind": k, **vars(e)} for (k, _, _), e in sorted(self.mem.items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "IpDatabase":
        if not isinstance(doc, dict):
            raise SchemaError("database document must be a JSON object")
        unknown = set(doc) - {"gpp", "acc", "noc", "mem"}
        if unknown:
            raise SchemaError(f"unknown database sections: {sorted(unknown)}")

        def pull(section, fields, required=None):
            entries = doc.get(section, [])
            if not isinstance(entries, list):
                raise SchemaError(f"database section {section!r} must be an array")
            for entry in entries:
                if not isinstance(entry, dict):
                    raise SchemaError(f"{section} entry must be an object")
                bad = set(entry) - fields
                if bad:
                    raise SchemaError(f"unknown {section} fields: {sorted(bad)}")
                missing = (required or fields) - set(entry)
                if missing:
                    raise SchemaError(f"{section} entry missing: {sorted(missing)}")
                yield entry

        gpp = [GppEntry(
            freq_mhz=int(_check_number(e["freq_mhz"], "freq_mhz", 0, strict=True)),
            p_peak_ops_s=_check_number(e["p_peak_ops_s"], "p_peak_ops_s", 0, strict=True),
            e_op_j=_check_number(e["e_op_j"], "e_op_j", 0),
            leak_w=_check_number(e["leak_w"], "leak_w", 0),
            area_mm2=_check_number(e["area_mm2"], "area_mm2", 0),
        ) for e in pull("gpp", _GPP_FIELDS)]
        acc = [AccEntry(
            task=e["task"],
            unroll=int(_check_number(e["unroll"], "unroll", 1)),
            a_peak=_check_number(e["a_peak"], "a_peak", 1.0),
            e_op_j=_check_number(e["e_op_j"], "e_op_j", 0),
            leak_w=_check_number(e["leak_w"], "leak_w", 0),
            area_mm2=_check_number(e["area_mm2"], "area_mm2", 0),
        ) for e in pull("acc", _ACC_FIELDS)]
        noc = [XferEntry(
            freq_mhz=int(_check_number(e["freq_mhz"], "freq_mhz", 0, strict=True)),
            width_b=int(_check_number(e["width_b"], "width_b", 0, strict=True)),
            e_byte_j=_check_number(e["e_byte_j"], "e_byte_j", 0),
            leak_w=_check_number(e["leak_w"], "leak_w", 0),
            area_mm2=_check_number(e["area_mm2"], "area_mm2", 0),
        ) for e in pull("noc", _NOC_FIELDS)]
        mem = []
        for e in pull("mem", _MEM_FIELDS):
            if e["kind"] not in MEM_KINDS:
                raise SchemaError(f"mem kind must be one of {MEM_KINDS}, got {e['kind']!r}")
            mem.append((e["kind"], XferEntry(
                freq_mhz=int(_check_number(e["freq_mhz"], "freq_mhz", 0, strict=True)),
                width_b=int(_check_number(e["width_b"], "width_b", 0, strict=True)),
                e_byte_j=_check_number(e["e_byte_j"], "e_byte_j", 0),
                leak_w=_check_number(e["leak_w"], "leak_w", 0),
                area_mm2=_check_number(e["area_mm2"], "area_mm2", 0),
            )))
        return cls(gpp=gpp, acc=acc, noc=noc, mem=mem)

    @classmethod
    def from_json(cls, text: str) -> "IpDatabase":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"database document is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def build_grid_database(graphs, *, freqs=(100, 200, 400, 800),
                        widths=(4, 8, 16, 32, 64, 128, 256),
                        unrolls=(1, 2, 4), acc_base_speedup=8.0,
                        with_acc=True, with_sram=True,
                        acc_coverage=1.0) -> IpDatabase:
    """Populate a full knob grid with plausible desk-scale coefficients.

    Used to seed demos and tests; every swap step the explorer can take has a
    matching entry so move feasibility is limited by ladder bounds only.
    ``acc_coverage`` < 1 drops accelerator entries for a deterministic slice
    of the tasks, mimicking an IP library that cannot harden every kernel.
    """
    gpp = [GppEntry(
        freq_mhz=f,
        p_peak_ops_s=f * 1e6,
        e_op_j=1.0e-12,
        leak_w=4e-4 * (f / 100.0),
        area_mm2=1.0 + 0.2 * math.log2(f / 100.0),
    ) for f in freqs]

    acc = []
    if with_acc:
        seen = set()
        for g in graphs:
            ordered = sorted(g.tasks.items())
            n = len(ordered)
            keep = max(1, round(acc_coverage * n))
            for pos, (tid, task) in enumerate(ordered):
                covered = (pos + 1) * keep // n > pos * keep // n
                if tid in seen or not covered:
                    continue
                seen.add(tid)
                for u in unrolls:
                    speed = acc_base_speedup * min(u, max(1.0, task.llp)) ** 0.8
                    acc.append(AccEntry(
                        task=tid,
                        unroll=u,
                        a_peak=speed,
                        e_op_j=0.25e-12,
                        leak_w=1.5e-4 * u,
                        area_mm2=0.45 * u ** 0.5,
                    ))

    noc = [XferEntry(
        freq_mhz=f, width_b=w,
        e_byte_j=0.2e-12,
        leak_w=1.5e-5 * (f / 100.0) * (w / 4.0) ** 0.5,
        area_mm2=0.05 * (w / 4.0) ** 0.5,
    ) for f in freqs for w in widths]

    mem = []
    for f in freqs:
        for w in widths:
            mem.append(("dram", XferEntry(
                freq_mhz=f, width_b=w,
                e_byte_j=0.6e-12,
                leak_w=4e-5 * (w / 4.0) ** 0.5,
                area_mm2=0.4 * (w / 4.0) ** 0.5,
            )))
            if with_sram:
                mem.append(("sram", XferEntry(
                    freq_mhz=f, width_b=w,
                    e_byte_j=0.12e-12,
                    leak_w=8e-5 * (w / 4.0) ** 0.5,
                    area_mm2=0.9 * (w / 4.0) ** 0.5,
                )))

    return IpDatabase(gpp=gpp, acc=acc, noc=noc, mem=mem)
