import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kellybt.candles import DEFAULT_START_TS, HOUR, CandleSeries, generate_synthetic_series


def make_series_from_ohlc(rows, start_ts=DEFAULT_START_TS, volume=10.0):
    """Build a CandleSeries from (open, high, low, close[, volume]) tuples."""
    ts, o, h, l, c, v = [], [], [], [], [], []
    for i, row in enumerate(rows):
        ts.append(start_ts + i * HOUR)
        o.append(row[0])
        h.append(row[1])
        l.append(row[2])
        c.append(row[3])
        v.append(row[4] if len(row) > 4 else volume)
    return CandleSeries(ts, o, h, l, c, v, symbol="TEST")


def make_series_from_closes(closes, start_ts=DEFAULT_START_TS, volume=10.0):
    """Flat candles whose high/low exactly envelope open/close."""
    rows = []
    prev = closes[0]
    for c in closes:
        rows.append((prev, max(prev, c), min(prev, c), c, volume))
        prev = c
    return make_series_from_ohlc(rows, start_ts=start_ts)


def regime_series(seed, n=5000, segments=4, vol_low=0.004, vol_high=0.025,
                  start_price=30000.0):
    """Volatility-clustered synthetic series: alternating calm/crisis
    segments of a geometric random walk, price-continuous across joins."""
    seg_len = n // segments
    parts = []
    price = start_price
    ts = DEFAULT_START_TS
    for k in range(segments):
        vol = vol_low if k % 2 == 0 else vol_high
        count = seg_len if k < segments - 1 else n - seg_len * (segments - 1)
        part = generate_synthetic_series(seed * 1000 + k, count, 0.0, vol, price,
                                         start_ts=ts)
        parts.append(part)
        price = float(part.close[-1])
        ts = int(part.timestamps[-1]) + HOUR
    cat = lambda attr: np.concatenate([getattr(p, attr) for p in parts])
    return CandleSeries(cat("timestamps"), cat("open"), cat("high"), cat("low"),
                        cat("close"), cat("volume"), symbol="REGIME")


@pytest.fixture
def random_series():
    return generate_synthetic_series(seed=42, n=1000, drift=0.0001, volatility=0.012)
