"""Hourly OHLCV candle series: parsing, validation, splitting, synthesis.

Canonical file format is CSV with header ``timestamp,open,high,low,close,volume``
and timestamps in epoch seconds (UTC, aligned to the hour). Gaps in exchange
data are kept and indexed, never forward-filled.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

HOUR = 3600

CANONICAL_COLUMNS = ("timestamp", "open", "high", "low", "close", "volume")

# Default epoch for synthetic series: 2020-01-01T00:00:00Z.
DEFAULT_START_TS = 1_577_836_800


class DataError(ValueError):
    """Malformed or invariant-violating market data."""


@dataclass(frozen=True)
class Candle:
    """One hourly OHLCV bar. Prices are quote-currency, volume base-asset."""

    timestamp: int
    open: float
    high: float
    low: float
    close: float
    volume: float

    def validate(self) -> None:
        if self.timestamp % HOUR != 0:
            raise DataError(f"timestamp {self.timestamp} is not hourly aligned")
        if min(self.open, self.high, self.low, self.close) <= 0:
            raise DataError(f"non-positive price at timestamp {self.timestamp}")
        if self.volume < 0:
            raise DataError(f"negative volume at timestamp {self.timestamp}")
        if self.low > min(self.open, self.close) or self.high < max(self.open, self.close):
            raise DataError(
                f"OHLC invariant violated at timestamp {self.timestamp}: "
                f"low {self.low} / high {self.high} do not envelope "
                f"open {self.open} / close {self.close}"
            )
        if self.low > self.high:
            raise DataError(f"low > high at timestamp {self.timestamp}")


class CandleSeries:
    """Immutable, strictly increasing series of hourly candles.

    Non-hourly jumps between consecutive candles are recorded in ``gaps`` as
    ``(index_before_gap, missing_bars)`` pairs; the data itself is untouched.
    """

    __slots__ = ("timestamps", "open", "high", "low", "close", "volume",
                 "symbol", "interval", "gaps")

    def __init__(self, timestamps, open, high, low, close, volume,
                 symbol: str = "UNKNOWN", interval: int = HOUR):
        ts = np.asarray(timestamps, dtype=np.int64)
        if ts.size == 0:
            raise DataError("empty candle series")
        cols = {}
        for name, col in (("open", open), ("high", high), ("low", low),
                          ("close", close), ("volume", volume)):
            arr = np.asarray(col, dtype=np.float64)
            if arr.shape != ts.shape:
                raise DataError(f"column {name} length {arr.size} != timestamps {ts.size}")
            cols[name] = arr

        diffs = np.diff(ts)
        if np.any(diffs <= 0):
            bad = int(ts[1:][diffs <= 0][0])
            raise DataError(f"duplicate or non-monotonic timestamp {bad}")
        if np.any(ts % interval != 0):
            bad = int(ts[ts % interval != 0][0])
            raise DataError(f"timestamp {bad} is not aligned to the {interval}s interval")

        o, h, l, c, v = (cols[k] for k in ("open", "high", "low", "close", "volume"))
        bad = (np.minimum(o, np.minimum(h, np.minimum(l, c))) <= 0)
        bad |= (v < 0) | (l > np.minimum(o, c)) | (h < np.maximum(o, c)) | (l > h)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            Candle(int(ts[i]), float(o[i]), float(h[i]), float(l[i]),
                   float(c[i]), float(v[i])).validate()

        gap_positions = np.flatnonzero(diffs != interval)
        self.gaps = tuple(
            (int(i), int(diffs[i] // interval) - 1) for i in gap_positions
        )
        for arr in (ts, o, h, l, c, v):
            arr.setflags(write=False)
        self.timestamps = ts
        self.open = o
        self.high = h
        self.low = l
        self.close = c
        self.volume = v
        self.symbol = symbol
        self.interval = interval

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def candle(self, i: int) -> Candle:
        return Candle(int(self.timestamps[i]), float(self.open[i]), float(self.high[i]),
                      float(self.low[i]), float(self.close[i]), float(self.volume[i]))

    def __iter__(self):
        return (self.candle(i) for i in range(len(self)))

    def slice(self, start: int, stop: int) -> "CandleSeries":
        if not 0 <= start < stop <= len(self):
            raise ValueError(f"bad slice [{start}:{stop}] for series of length {len(self)}")
        return CandleSeries(
            self.timestamps[start:stop], self.open[start:stop], self.high[start:stop],
            self.low[start:stop], self.close[start:stop], self.volume[start:stop],
            symbol=self.symbol, interval=self.interval,
        )

    def index_of(self, timestamp: int) -> int:
        i = int(np.searchsorted(self.timestamps, timestamp))
        if i >= len(self) or self.timestamps[i] != timestamp:
            raise KeyError(f"timestamp {timestamp} not in series")
        return i

    def to_csv(self, dest) -> None:
        """Write the canonical CSV. Float fields use repr (exact round trip)."""
        own = isinstance(dest, (str, bytes))
        fh = open(dest, "w", newline="") if own else dest
        try:
            fh.write(",".join(CANONICAL_COLUMNS) + "\n")
            for i in range(len(self)):
                fh.write(
                    f"{int(self.timestamps[i])},{float(self.open[i])!r},"
                    f"{float(self.high[i])!r},{float(self.low[i])!r},"
                    f"{float(self.close[i])!r},{float(self.volume[i])!r}\n"
                )
        finally:
            if own:
                fh.close()


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/validation/test boundaries (epoch seconds).

    The boundary candle belongs to the earlier split, so a label computed at
    the boundary cannot leak into the later set.
    """

    train_end: int
    validation_end: int

    def __post_init__(self):
        if self.train_end >= self.validation_end:
            raise ValueError(
                f"train_end {self.train_end} must precede validation_end {self.validation_end}"
            )


def parse_candles(source, mapping: dict | None = None, symbol: str = "UNKNOWN") -> CandleSeries:
    """Parse delimiter-separated OHLCV rows with a header into a CandleSeries.

    ``source`` is a path or an open text stream. ``mapping`` renames the six
    canonical columns to the file's header names (logical -> actual); columns
    missing from the mapping keep their canonical names. Rows are sorted by
    timestamp after parsing; duplicate timestamps are rejected.
    """
    mapping = dict(mapping or {})
    for key in mapping:
        if key not in CANONICAL_COLUMNS:
            raise DataError(f"unknown column mapping key {key!r}")
    own = isinstance(source, (str, bytes))
    fh = open(source, "r", newline="") if own else source
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("empty input: no header row") from None
        header = [h.strip() for h in header]
        col_idx = {}
        for logical in CANONICAL_COLUMNS:
            actual = mapping.get(logical, logical)
            if actual not in header:
                raise DataError(f"missing column {actual!r} in header {header}")
            col_idx[logical] = header.index(actual)

        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                ts = int(float(row[col_idx["timestamp"]]))
                fields = tuple(float(row[col_idx[k]]) for k in CANONICAL_COLUMNS[1:])
            except (ValueError, IndexError) as exc:
                raise DataError(f"malformed row at line {lineno}: {exc}") from None
            candle = Candle(ts, *fields)
            try:
                candle.validate()
            except DataError as exc:
                raise DataError(f"line {lineno}: {exc}") from None
            rows.append(candle)
    finally:
        if own:
            fh.close()

    if not rows:
        raise DataError("no data rows in input")
    rows.sort(key=lambda c: c.timestamp)
    for prev, cur in zip(rows, rows[1:]):
        if cur.timestamp == prev.timestamp:
            raise DataError(f"duplicate timestamp {cur.timestamp}")
    return CandleSeries(
        [c.timestamp for c in rows], [c.open for c in rows], [c.high for c in rows],
        [c.low for c in rows], [c.close for c in rows], [c.volume for c in rows],
        symbol=symbol,
    )


def split_dataset(series: CandleSeries, spec: SplitSpec):
    """Split into contiguous (train, validation, test) sub-series.

    Boundaries must lie strictly inside the series range; each boundary candle
    goes to the earlier split.
    """
    start = int(series.timestamps[0])
    end = int(series.timestamps[-1])
    if not start < spec.train_end < spec.validation_end < end:
        raise ValueError(
            f"split boundaries ({spec.train_end}, {spec.validation_end}) must lie strictly "
            f"inside the series range ({start}, {end}); degenerate splits would leave an "
            f"empty train or test set"
        )
    i = int(np.searchsorted(series.timestamps, spec.train_end, side="right"))
    j = int(np.searchsorted(series.timestamps, spec.validation_end, side="right"))
    if i == 0 or j <= i or j >= len(series):
        raise ValueError("split produced an empty train, validation, or test set")
    return series.slice(0, i), series.slice(i, j), series.slice(j, len(series))


def generate_synthetic_series(seed: int, n: int, drift: float = 0.0,
                              volatility: float = 0.01, start_price: float = 100.0,
                              symbol: str = "SYNTH",
                              start_ts: int = DEFAULT_START_TS) -> CandleSeries:
    """Seeded geometric random walk on closes with an intrabar envelope.

    Per-bar log-returns are N(drift, volatility). open_t is the previous close
    (open_0 = start_price); high/low envelope open/close with a seeded
    excursion proportional to volatility. Deterministic for a given seed.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if volatility < 0:
        raise ValueError(f"volatility must be >= 0, got {volatility}")
    if start_price <= 0:
        raise ValueError(f"start_price must be > 0, got {start_price}")

    rng = np.random.default_rng(seed)
    steps = rng.normal(drift, volatility, size=n)
    close = start_price * np.exp(np.cumsum(steps))
    open_ = np.concatenate(([start_price], close[:-1]))
    # Excursions capped below 1 so low stays positive.
    up_exc = np.minimum(np.abs(rng.normal(0.0, 0.5 * volatility, size=n)), 0.9)
    down_exc = np.minimum(np.abs(rng.normal(0.0, 0.5 * volatility, size=n)), 0.9)
    high = np.maximum(open_, close) * (1.0 + up_exc)
    low = np.minimum(open_, close) * (1.0 - down_exc)
    volume = np.exp(rng.normal(3.0, 0.5, size=n))
    timestamps = start_ts + HOUR * np.arange(n, dtype=np.int64)
    return CandleSeries(timestamps, open_, high, low, close, volume, symbol=symbol)


def read_candles_csv(path: str, mapping: dict | None = None,
                     symbol: str = "UNKNOWN") -> CandleSeries:
    return parse_candles(path, mapping=mapping, symbol=symbol)


def parse_candles_text(text: str, mapping: dict | None = None,
                       symbol: str = "UNKNOWN") -> CandleSeries:
    return parse_candles(io.StringIO(text), mapping=mapping, symbol=symbol)
