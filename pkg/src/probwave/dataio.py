"""Trade ingestion, volume-price distributions, synthetic draws and reports.

Input trades are CSV with the header ``timestamp,price,volume``. The
timestamp is either epoch milliseconds or an ISO-8601 string and is kept
as a naive instant (milliseconds since 1970-01-01, no time-zone handling).
Volumes are given in lots and converted with ``lot_size``.

Reports use the ``probwave/1`` JSON schema or a per-point CSV; both are
byte-deterministic, with every float written with 17 significant digits.
"""

import csv
import io
import json
import math
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import DegenerateError, DomainError, EmptyWindowError, ParseError, TradeValueError
from .wavemodel import Grid, normalize_discrete

__all__ = [
    "SCHEMA",
    "TradeRecord",
    "Distribution",
    "parse_trades",
    "parse_timestamp",
    "format_timestamp",
    "infer_tick",
    "tick_multiples",
    "build_distribution",
    "generate_synthetic",
    "distribution_to_trades",
    "write_trades",
    "export_report",
    "read_points_csv",
]

SCHEMA = "probwave/1"
HEADER = ("timestamp", "price", "volume")
_EPOCH = datetime(1970, 1, 1)
_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class TradeRecord:
    """One executed trade; ``timestamp`` in epoch milliseconds."""

    timestamp: int
    price: float
    volume: float


@dataclass(frozen=True, eq=False)
class Distribution:
    """Cumulative observable per grid point inside one time window.

    Attributes
    ----------
    grid : Grid
        Uniform price grid.
    masses : ndarray
        Non-negative mass (volume) per grid point.
    window : tuple of int or None
        ``(start, end)`` in epoch milliseconds, half-open.
    t : float
        Window length in the chosen time unit (1 by convention).
    """

    grid: Grid
    masses: np.ndarray = field(repr=False)
    window: tuple = None
    t: float = 1.0

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        if m.shape != (len(self.grid),):
            raise DomainError(f"{m.size} masses for a grid of {len(self.grid)} points")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise DomainError("masses must be finite and non-negative")
        if not np.any(m > 0):
            raise DegenerateError("distribution has no positive mass")
        if not self.t > 0:
            raise DomainError("window length t must be positive")

    @property
    def total(self):
        return math.fsum(self.masses.tolist())

    @property
    def frequencies(self):
        """Relative frequencies m_i / M."""
        return self.masses / self.total

    @property
    def peak_price(self):
        """Grid price with the largest mass (first one on ties)."""
        return float(self.grid.points[int(np.argmax(self.masses))])

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.masses, other.masses)
            and self.window == other.window
            and self.t == other.t
        )

    __hash__ = None


def parse_timestamp(text):
    """Epoch milliseconds from an integer string or an ISO-8601 string."""
    text = text.strip()
    if _INT_RE.match(text):
        return int(text)
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is not None:
        dt = dt.replace(tzinfo=None)
    delta = dt - _EPOCH
    return (delta.days * 86_400 + delta.seconds) * 1000 + delta.microseconds // 1000


def format_timestamp(ms):
    """ISO-8601 rendering (millisecond precision) of an epoch-ms instant."""
    return (_EPOCH + timedelta(milliseconds=int(ms))).isoformat(timespec="milliseconds")


def _read_text(source):
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8-sig")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data


def parse_trades(source, lot_size=100.0):
    """Parse trade CSV into :class:`TradeRecord` objects in file order.

    Parameters
    ----------
    source : bytes, str or file-like
        CSV content with header ``timestamp,price,volume``.
    lot_size : float
        Multiplier applied to the volume column.

    Raises
    ------
    ParseError
        Missing header, wrong column count or unparseable field; carries
        the 1-based line number and field name.
    TradeValueError
        Non-positive price or volume.
    """
    if not lot_size > 0:
        raise DomainError(f"lot_size must be positive, got {lot_size}")
    text = _read_text(source)
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None or tuple(h.strip().lower() for h in header) != HEADER:
        raise ParseError(f"line 1: expected header {','.join(HEADER)}, got {header}", line=1)
    records = []
    for row in rows:
        line = rows.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise ParseError(f"line {line}: expected 3 fields, got {len(row)}", line=line)
        ts_text, price_text, vol_text = row
        try:
            ts = parse_timestamp(ts_text)
        except ValueError:
            raise ParseError(
                f"line {line}: bad timestamp {ts_text!r}", line=line, field="timestamp"
            ) from None
        values = []
        for name, cell in (("price", price_text), ("volume", vol_text)):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"line {line}: bad {name} {cell!r}", line=line, field=name) from None
            if not math.isfinite(v):
                raise ParseError(f"line {line}: non-finite {name} {cell!r}", line=line, field=name)
            if v <= 0:
                raise TradeValueError(
                    f"line {line}: {name} must be positive, got {cell.strip()}", line=line, field=name
                )
            values.append(v)
        records.append(TradeRecord(ts, values[0], values[1] * lot_size))
    return records


def tick_multiples(index, tick):
    """Prices ``index * tick``, divided by ``1/tick`` when that is an integer.

    Division by an exact integer gives correctly rounded decimals such as
    97.01 instead of 97.01000000000001.
    """
    index = np.asarray(index, dtype=float)
    inv = 1.0 / tick
    if abs(inv - round(inv)) < 1e-9 * inv:
        return index / round(inv)
    return index * tick


def infer_tick(prices, rel_tol=1e-6):
    """Smallest positive gap between distinct prices, checked against all prices.

    Raises
    ------
    DomainError
        Fewer than two distinct prices, or prices that are not integer
        multiples of the inferred tick (irregular spacing).
    """
    uniq = np.unique(np.asarray(prices, dtype=float))
    if uniq.size < 2:
        raise DomainError("cannot infer a tick from fewer than two distinct prices")
    tick = float(np.min(np.diff(uniq)))
    offsets = (uniq - uniq[0]) / tick
    if np.max(np.abs(offsets - np.round(offsets))) > rel_tol * max(1.0, offsets[-1]):
        raise DomainError(f"prices are not multiples of the smallest gap {tick!r}")
    return tick


def build_distribution(trades, window=None, tick=None, t=1.0):
    """Bin in-window trade volume on a uniform price grid.

    Parameters
    ----------
    trades : sequence of TradeRecord
    window : (int, int) or None
        Half-open ``[start, end)`` in epoch milliseconds; ``None`` keeps all.
    tick : float or None
        Price tick; inferred with :func:`infer_tick` when ``None``.
    t : float
        Window length in the chosen time unit.

    Returns
    -------
    Distribution
    """
    if window is not None:
        start, end = window
        if not start < end:
            raise DomainError(f"window start {start} must precede end {end}")
        chosen = [tr for tr in trades if start <= tr.timestamp < end]
    else:
        chosen = list(trades)
    if not chosen:
        raise EmptyWindowError(f"no trades in window {window}")
    prices = np.array([tr.price for tr in chosen], dtype=float)
    volumes = [tr.volume for tr in chosen]
    if tick is None:
        tick = infer_tick(prices)
    if not tick > 0:
        raise DomainError(f"tick must be positive, got {tick}")
    idx = np.rint(prices / tick).astype(np.int64)
    lo, hi = int(idx.min()), int(idx.max())
    count = max(hi - lo + 1, 1)
    buckets = [[] for _ in range(count)]
    for i, v in zip((idx - lo).tolist(), volumes):
        buckets[i].append(v)
    # fsum is correctly rounded, so bins do not depend on trade order
    masses = np.array([math.fsum(b) for b in buckets])
    points = tick_multiples(lo + np.arange(count), tick)
    return Distribution(Grid(points, float(tick)), masses, window, t)


def generate_synthetic(model, grid, n_samples, seed, lot_size=1.0, t=1.0):
    """Multinomial draws from the normalized density of ``model`` on ``grid``.

    The same ``(model, grid, n_samples, seed)`` always yields the same
    masses.
    """
    if int(n_samples) != n_samples or n_samples < 1:
        raise DomainError("n_samples must be a positive integer")
    normed = normalize_discrete(model, grid)
    probs = normed.density(grid.points)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(n_samples), probs)
    return Distribution(grid, counts.astype(float) * lot_size, None, t)


def distribution_to_trades(dist, start_ms, end_ms):
    """One trade per non-empty price level, timestamps evenly spread over the window."""
    nz = np.nonzero(dist.masses > 0)[0]
    span = end_ms - start_ms
    out = []
    for k, i in enumerate(nz):
        ts = start_ms + (k * span) // len(nz)
        out.append(TradeRecord(int(ts), float(dist.grid.points[i]), float(dist.masses[i])))
    return out


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _price(x, tick):
    decimals = max(0, -int(math.floor(math.log10(tick))) + 2) if tick else 10
    return f"{x:.{decimals}f}".rstrip("0").rstrip(".")


def write_trades(trades, tick=None):
    """Render trades as ``timestamp,price,volume`` CSV bytes (volume in lots as given)."""
    lines = [",".join(HEADER)]
    for tr in trades:
        price = _price(tr.price, tick) if tick else _num(tr.price)
        lines.append(f"{format_timestamp(tr.timestamp)},{price},{_num(tr.volume)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _dump(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{_dump(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if obj is None:
        return "null"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (Mapping, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent + 1) for v in obj) + "\n" + end + "]"
    return _num(obj)


def _fit_payload(res):
    m = res.model
    return {
        "family": m.family.value,
        "order": m.n,
        "params": {
            "q0": m.q0,
            "q0_snapped": res.q0_snapped,
            "omega": m.omega,
            "a_tt": m.a_tt,
            "beta": m.beta,
            "c": m.c,
        },
        "stats": {
            "sse": res.sse,
            "r2": res.r2,
            "chi2": res.chi2,
            "chi2_bins": res.chi2_bins,
            "aic": res.aic,
            "n_params": res.n_params,
            "n_obs": len(res.q),
        },
        "starts_tried": res.starts_tried,
        "converged": res.converged,
        "points": {"q": res.q, "f_emp": res.f_emp, "f_fit": res.f_fit},
    }


def _levels_payload(levels):
    out = []
    for s in levels:
        row = {"index": s.index, "energy": s.energy, "nodes": s.nodes}
        if s.parity is not None:
            row["parity"] = s.parity
        row["residual"] = s.residual
        row["converged"] = s.converged
        out.append(row)
    return out


_OBJECTIVE_NOTE = (
    "least squares on relative frequencies f_i = m_i/M; "
    "aic = n_obs*ln(sse/n_obs) + 2*n_params"
)


def _payload(result, meta):
    from .eigensolve import ComparisonTable, EigenSolution
    from .fitkit import FitResult

    head = {"schema": SCHEMA}
    if isinstance(result, FitResult):
        body = {"kind": "fit", "objective": _OBJECTIVE_NOTE, "results": [_fit_payload(result)]}
    elif isinstance(result, (list, tuple)) and result and isinstance(result[0], FitResult):
        body = {
            "kind": "fit",
            "objective": _OBJECTIVE_NOTE,
            "results": [dict(rank=i + 1, **_fit_payload(r)) for i, r in enumerate(result)],
        }
    elif isinstance(result, (list, tuple)) and result and isinstance(result[0], EigenSolution):
        body = {"kind": "spectrum", "levels": _levels_payload(result)}
    elif isinstance(result, ComparisonTable):
        body = {
            "kind": "comparison",
            "a_tt": result.a_tt,
            "beta": result.beta,
            "beta_s": result.beta_s,
            "rows": result.rows,
            "nonlocal_exact": result.nonlocal_exact,
        }
    elif isinstance(result, Distribution):
        body = {
            "kind": "distribution",
            "tick": result.grid.tick,
            "t": result.t,
            "window": list(result.window) if result.window else None,
            "total": result.total,
            "points": {"q": result.grid.points, "m": result.masses},
        }
    elif isinstance(result, Mapping):
        body = dict(result)
    else:
        raise DomainError(f"cannot export object of type {type(result).__name__}")
    if meta:
        head["meta"] = dict(meta)
    head.update(body)
    return head


def _csv(header, columns):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_num(v) if v is not None else "" for v in row))
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_report(result, fmt="json", meta=None):
    """Serialize a result to deterministic bytes.

    Parameters
    ----------
    result : FitResult, list of FitResult, list of EigenSolution,
        ComparisonTable, Distribution or mapping
    fmt : {"json", "csv"}
        ``csv`` writes per-point columns ``q,f_emp,f_fit`` for fits (the
        top-ranked one for a list), levels for spectra and rows for
        comparisons.
    meta : mapping, optional
        Run parameters recorded under ``"meta"`` in JSON output.

    Returns
    -------
    bytes
    """
    if fmt == "json":
        return (_dump(_payload(result, meta)) + "\n").encode("utf-8")
    if fmt != "csv":
        raise DomainError(f"unknown format {fmt!r}")
    from .eigensolve import ComparisonTable, EigenSolution
    from .fitkit import FitResult

    if isinstance(result, (list, tuple)) and result and isinstance(result[0], FitResult):
        result = result[0]
    if isinstance(result, FitResult):
        return _csv(("q", "f_emp", "f_fit"), (result.q, result.f_emp, result.f_fit))
    if isinstance(result, (list, tuple)) and result and isinstance(result[0], EigenSolution):
        return _csv(
            ("index", "energy", "nodes", "residual"),
            (
                [s.index for s in result],
                [s.energy for s in result],
                [s.nodes for s in result],
                [s.residual for s in result],
            ),
        )
    if isinstance(result, ComparisonTable):
        rows = result.rows
        keys = ("n", "nonlocal", "schrodinger", "nonlocal_spacing", "schrodinger_spacing", "spacing_ratio")
        return _csv(keys, [[r.get(k) for r in rows] for k in keys])
    if isinstance(result, Distribution):
        return _csv(("q", "m"), (result.grid.points, result.masses))
    if isinstance(result, Mapping) and "omegas" in result:
        return _csv(("k", "omega"), (list(range(1, len(result["omegas"]) + 1)), result["omegas"]))
    raise DomainError(f"cannot export object of type {type(result).__name__} as csv")


def read_points_csv(source):
    """Parse a per-point ``q,f_emp,f_fit`` CSV back into float arrays."""
    text = _read_text(source)
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    cols = list(zip(*[[float(v) for v in r] for r in rows[1:]])) if len(rows) > 1 else [()] * len(header)
    return {name: np.array(col, dtype=float) for name, col in zip(header, cols)}

