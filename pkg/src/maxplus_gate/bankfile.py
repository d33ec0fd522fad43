"""Binary bank persistence.

Layout, all little-endian::

    magic       8 bytes   b"MPBANK1\\n"
    d, M        uint32 x 2
    tau         float64
    N, step     uint32 x 2
    eps         float64
    R           float64 x M
    descriptor  uint32 length + UTF-8 text (labels, signed flag, action list)
    H_1..H_M    float64 x (2 d^2) each, (re, im) interleaved, row-major
    n_atoms     uint64
    zero_chain  int64
    atoms       n_atoms x [run_cost float64, depth int32, A as 2 d^2 float64]
    n_levels    uint32
    levels      n_levels x [count uint64, parents int32 x count, actions int32 x count]
    n_snaps     uint32
    snapshots   n_snaps x [count uint64, count x [cost float64, A as 2 d^2 float64]]

``load`` followed by ``save`` reproduces the file byte for byte.
"""

from __future__ import annotations

import io
import struct

import numpy as np

from .dp import Bank
from .model import ControlSystem, control_set

__all__ = ["MAGIC", "BankFormatError", "save_bank", "load_bank", "dumps", "loads"]

MAGIC = b"MPBANK1\n"


class BankFormatError(ValueError):
    pass


def _descriptor(bank: Bank) -> str:
    return "labels={};signed={};actions={}".format(
        ",".join(bank.system.labels), int(bank.cset.signed), bank.cset.describe()
    )


def _parse_descriptor(text: str) -> dict:
    out = {}
    for part in text.split(";"):
        key, sep, value = part.partition("=")
        if not sep:
            raise BankFormatError(f"malformed descriptor field {part!r}")
        out[key] = value
    return out


def _complex_records(costs, mats, depth=None):
    n, d = len(costs), mats.shape[-1]
    fields = [("cost", "<f8")]
    if depth is not None:
        fields.append(("depth", "<i4"))
    fields.append(("A", "<f8", (2 * d * d,)))
    rec = np.empty(n, dtype=np.dtype(fields))
    rec["cost"] = costs
    if depth is not None:
        rec["depth"] = depth
    rec["A"] = np.ascontiguousarray(mats).reshape(n, -1).view("<f8")
    return rec


def dumps(bank: Bank) -> bytes:
    sys = bank.system
    d, M = sys.dim, sys.M
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<IIdIId", d, M, sys.tau, sys.n_steps, bank.step, sys.epsilon))
    buf.write(np.asarray(sys.R, dtype="<f8").tobytes())
    desc = _descriptor(bank).encode("utf-8")
    buf.write(struct.pack("<I", len(desc)))
    buf.write(desc)
    for h in sys.hamiltonians:
        buf.write(np.ascontiguousarray(h, dtype="<c16").tobytes())
    buf.write(struct.pack("<Qq", len(bank), bank.zero_chain))
    buf.write(_complex_records(bank.costs, bank.mats, np.full(len(bank), bank.step)).tobytes())
    buf.write(struct.pack("<I", len(bank.history)))
    for parents, actions in bank.history:
        buf.write(struct.pack("<Q", len(parents)))
        buf.write(np.asarray(parents, dtype="<i4").tobytes())
        buf.write(np.asarray(actions, dtype="<i4").tobytes())
    snaps = bank.snapshots or []
    buf.write(struct.pack("<I", len(snaps)))
    for costs, mats in snaps:
        buf.write(struct.pack("<Q", len(costs)))
        buf.write(_complex_records(costs, mats).tobytes())
    return buf.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise BankFormatError("truncated bank file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype, count):
        dtype = np.dtype(dtype)
        return np.frombuffer(self.take(dtype.itemsize * count), dtype=dtype, count=count)


def loads(data: bytes) -> Bank:
    """Inverse of :func:`dumps`; any malformed input raises :class:`BankFormatError`."""
    try:
        return _loads(data)
    except BankFormatError:
        raise
    except (ValueError, KeyError, IndexError) as exc:
        raise BankFormatError(f"corrupt bank file: {exc}") from exc


def _loads(data: bytes) -> Bank:
    r = _Reader(data)
    if r.take(len(MAGIC)) != MAGIC:
        raise BankFormatError("not a bank file (bad magic)")
    d, M, tau, N, step, eps = r.unpack("<IIdIId")
    R = r.array("<f8", M).astype(float)
    (dlen,) = r.unpack("<I")
    desc = _parse_descriptor(r.take(dlen).decode("utf-8"))
    hams = [r.array("<c16", d * d).reshape(d, d).astype(complex) for _ in range(M)]
    labels = desc["labels"].split(",")
    sys = ControlSystem(tuple(hams), tuple(labels), R, tau=tau, n_steps=N, epsilon=eps)
    cset = control_set(sys, signed=bool(int(desc["signed"])))
    if cset.describe() != desc["actions"]:
        raise BankFormatError(f"control set mismatch: file has {desc['actions']!r}")
    n, zero_chain = r.unpack("<Qq")
    rec_t = np.dtype([("cost", "<f8"), ("depth", "<i4"), ("A", "<f8", (2 * d * d,))])
    rec = r.array(rec_t, n)
    costs = rec["cost"].astype(float)
    mats = np.ascontiguousarray(rec["A"]).view("<c16").reshape(n, d, d).astype(complex)
    if n and np.any(rec["depth"] != step):
        raise BankFormatError("atom depth does not match bank step")
    (levels,) = r.unpack("<I")
    history = []
    for _ in range(levels):
        (count,) = r.unpack("<Q")
        parents = r.array("<i4", count).astype(np.int64)
        actions = r.array("<i4", count).astype(np.int64)
        history.append((parents, actions))
    (n_snaps,) = r.unpack("<I")
    snaps = None
    if n_snaps:
        snap_t = np.dtype([("cost", "<f8"), ("A", "<f8", (2 * d * d,))])
        snaps = []
        for _ in range(n_snaps):
            (count,) = r.unpack("<Q")
            srec = r.array(snap_t, count)
            snaps.append(
                (
                    srec["cost"].astype(float),
                    np.ascontiguousarray(srec["A"]).view("<c16").reshape(count, d, d).astype(complex),
                )
            )
    if r.pos != len(data):
        raise BankFormatError("trailing bytes after bank data")
    return Bank(sys, cset, costs, mats, step, history, int(zero_chain), [], snaps)


def save_bank(bank: Bank, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(bank))


def load_bank(path) -> Bank:
    with open(path, "rb") as fh:
        return loads(fh.read())
