"""Snapshot files, run configuration and figure-data export.

Snapshot layout: an ASCII header terminated by a line ``end``, then the
payload as little-endian float64, row-major with eta varying fastest: ``q`` as
interleaved (re, im) pairs, then ``U``, then ``V``.  Nothing time- or
host-dependent is written, so identical inputs give identical bytes.
"""

from __future__ import annotations

import configparser
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exact import DromionParams, FieldSnapshot, Grid, LineSolitonParams
from .model import NonisoCoefficients, SpectralMode

log = logging.getLogger(__name__)

MAGIC = "NIDS1"
VERSION = 1
FIELDS = (("q", "<c16"), ("U", "<f8"), ("V", "<f8"))


class SnapshotFormatError(ValueError):
    pass


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """Full-precision text form of a float (17 significant digits)."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# snapshot files


def encode_snapshot(snap: FieldSnapshot) -> bytes:
    L, N = snap.L, snap.N
    ref = Grid.square(L, N)
    if not (np.array_equal(ref.xi, snap.grid.xi) and np.array_equal(ref.eta, snap.grid.eta)):
        raise SnapshotFormatError("only square grids linspace(-L, L, N) can be stored")
    header = [
        MAGIC,
        f"version = {VERSION}",
        f"t = {fmt(snap.t)}",
        f"L = {fmt(L)}",
        f"N = {N}",
        "fields = " + " ".join(f"{name}:{dt}" for name, dt in FIELDS),
        "end",
        "",
    ]
    parts = [np.ascontiguousarray(getattr(snap, name), dtype=dt).tobytes() for name, dt in FIELDS]
    return "\n".join(header).encode("ascii") + b"".join(parts)


def decode_snapshot(data: bytes) -> FieldSnapshot:
    marker = b"\nend\n"
    cut = data.find(marker)
    if not data.startswith(MAGIC.encode() + b"\n") or cut < 0:
        raise SnapshotFormatError(f"not a {MAGIC} snapshot")
    lines = data[:cut].decode("ascii").splitlines()[1:]
    head = dict(line.split(" = ", 1) for line in lines)
    try:
        version = int(head["version"])
        t, L, N = float(head["t"]), float(head["L"]), int(head["N"])
        fields = [f.split(":") for f in head["fields"].split()]
    except (KeyError, ValueError) as err:
        raise SnapshotFormatError(f"bad snapshot header: {err}") from None
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    if [tuple(f) for f in fields] != list(FIELDS):
        raise SnapshotFormatError(f"unexpected field list {head['fields']!r}")
    if N < 2:
        raise SnapshotFormatError(f"empty grid (N = {N})")
    payload = memoryview(data)[cut + len(marker):]
    sizes = [N * N * np.dtype(dt).itemsize for _, dt in FIELDS]
    if len(payload) != sum(sizes):
        raise SnapshotFormatError(
            f"payload has {len(payload)} bytes, header declares {sum(sizes)}")
    arrays, pos = {}, 0
    for (name, dt), size in zip(FIELDS, sizes):
        arrays[name] = np.frombuffer(payload[pos:pos + size], dtype=dt).reshape(N, N).astype(
            dt[1:])
        pos += size
    return FieldSnapshot(Grid.square(L, N), t, arrays["q"], arrays["U"], arrays["V"])


def write_snapshot(path, snap: FieldSnapshot) -> Path:
    path = Path(path)
    path.write_bytes(encode_snapshot(snap))
    return path


def read_snapshot(path) -> FieldSnapshot:
    path = Path(path)
    snap = decode_snapshot(path.read_bytes())
    snap.meta["path"] = str(path)
    return snap


def snapshot_name(prefix: str, t: float) -> str:
    return f"{prefix}_t{t:+.6f}.nids"


# ---------------------------------------------------------------------------
# run configuration


def _times(text: str):
    text = text.strip()
    if not text:
        return ()
    return tuple(float(x) for x in text.replace(",", " ").split())


# key -> (parser, default)
SCHEMA = {
    "solution": (str, "dromion"),
    "alpha": (float, 1.0),
    "beta": (float, 1.0),
    "gamma": (float, 2.0),
    "delta": (float, 2.0),
    "kR0": (float, 1.0),
    "kI0": (float, 0.0),
    "lR0": (float, 1.0),
    "lI0": (float, 0.0),
    "omega0": (float, 0.0),
    "omega1": (float, 1.0),
    "a1": (float, 0.0),
    "a0": (float, 0.0),
    "L": (float, 10.0),
    "N": (int, 257),
    "times": (_times, (-0.5, 0.0, 0.2)),
    "dt": (float, 1e-4),
    "t_start": (float, -0.5),
    "t_end": (float, 0.2),
    "initial": (str, "dromion"),
    "initial_file": (str, ""),
    "boundary": (str, "limits"),
    "stability": (float, 0.2),
    "stencil_order": (int, 4),
    "rate_shift": (float, 0.0),
}

SOLUTIONS = ("dromion", "soliton", "zero")


@dataclass
class RunConfig:
    values: dict
    explicit: frozenset

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def is_set(self, key: str) -> bool:
        return key in self.explicit

    @property
    def coeffs(self) -> NonisoCoefficients:
        v = self.values
        return NonisoCoefficients(v["omega0"], v["omega1"], v["a1"], v["a0"])

    @property
    def mode(self) -> SpectralMode:
        v = self.values
        return SpectralMode(v["kR0"], v["kI0"], v["lR0"], v["lI0"], self.coeffs)

    def solution_params(self):
        """Closed-form parameters for the configured solution kind."""
        v = self.values
        if v["solution"] == "dromion":
            return DromionParams(v["alpha"], v["beta"], v["gamma"], v["delta"], self.mode)
        if v["solution"] == "soliton":
            return LineSolitonParams(self.mode)
        return None


def parse_config(text: str = "", overrides: dict | None = None) -> RunConfig:
    """Parse ``key = value`` lines (``#`` starts a comment).

    Unknown keys raise :class:`ConfigError`; missing keys take defaults, which
    are logged.
    """
    cp = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",), interpolation=None,
                                   empty_lines_in_values=False)
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as err:
        raise ConfigError(f"config syntax: {err}".splitlines()[0]) from None
    raw = dict(cp["run"])
    raw.update(overrides or {})
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    values = {}
    for key, (conv, default) in SCHEMA.items():
        if key in raw:
            try:
                values[key] = conv(raw[key]) if isinstance(raw[key], str) else raw[key]
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw[key]!r}") from None
        else:
            values[key] = default
    defaulted = [k for k in SCHEMA if k not in raw]
    if defaulted:
        log.info("config defaults used for: %s", ", ".join(defaulted))
    for key in ("alpha", "beta", "gamma", "delta", "kR0", "kI0", "lR0", "lI0", "omega0",
                "omega1", "a1", "a0", "L", "dt", "t_start", "t_end", "rate_shift"):
        if not math.isfinite(values[key]):
            raise ConfigError(f"{key} must be finite")
    if values["solution"] not in SOLUTIONS:
        raise ConfigError(f"solution must be one of {', '.join(SOLUTIONS)}")
    return RunConfig(values, frozenset(raw))


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from None
    return parse_config(text, overrides)


# ---------------------------------------------------------------------------
# figure data


def write_figure(path, snap: FieldSnapshot) -> Path:
    """``|q|`` as gridded three-column text, blank line between xi rows."""
    absq = np.abs(snap.q)
    xi, eta = snap.grid.xi, snap.grid.eta
    lines = [
        f"# |q| surface at t = {fmt(snap.t)} on [-L, L]^2, L = {fmt(snap.L)}, N = {snap.N}",
        "# columns: xi eta |q|  (dimensionless characteristic coordinates, modulus)",
    ]
    for i, x in enumerate(xi):
        sx = fmt(x)
        lines.extend(f"{sx} {fmt(y)} {fmt(a)}" for y, a in zip(eta, absq[i]))
        lines.append("")
    path = Path(path)
    path.write_text("\n".join(lines), encoding="ascii")
    return path


def read_figure(path):
    """Return ``(xi, eta, |q|)`` arrays from :func:`write_figure` output."""
    data = np.loadtxt(path, comments="#")
    xi = np.unique(data[:, 0])
    eta = np.unique(data[:, 1])
    return xi, eta, data[:, 2].reshape(xi.size, eta.size)


def write_series(path, times, values, label="max|q|") -> Path:
    lines = [f"# t {label}"] + [f"{fmt(t)} {fmt(v)}" for t, v in zip(times, values)]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def diagonal_tail_slope(xi, eta, absq, floor=1e-12, skip=3.0):
    """Decay rate of ``log |q|`` along the diagonal ``xi = eta`` (the physical
    x-axis), per unit ``x = (xi + eta) / 2``.

    Both tails are fitted, starting ``skip`` units from the maximum and
    stopping where ``|q|`` falls below ``floor`` times the peak.  Returns the
    mean of the two fitted rates.
    """
    if xi.size != eta.size or not np.allclose(xi, eta):
        raise ValueError("diagonal slope needs identical xi and eta axes")
    d = np.diagonal(absq)
    k = int(np.argmax(d))
    peak = d[k]
    rates = []
    for side in (slice(k, None), slice(None, k + 1)):
        x, v = xi[side], d[side]
        dist = np.abs(x - xi[k])
        use = (dist >= skip) & (v > floor * peak)
        if use.sum() < 3:
            raise ValueError("tail too short to fit; widen the domain or lower skip")
        slope = np.polyfit(dist[use], np.log(v[use]), 1)[0]
        rates.append(-slope)
    return float(np.mean(rates)), rates
