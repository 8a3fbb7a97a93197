import io
from datetime import datetime, timezone

import numpy as np
import pytest

from kellybt.candles import (HOUR, CandleSeries, DataError, SplitSpec,
                             generate_synthetic_series, parse_candles,
                             parse_candles_text, split_dataset)

HEADER = "timestamp,open,high,low,close,volume\n"


def test_parse_single_row():
    series = parse_candles_text(HEADER + "1502942400,4261.48,4280.56,4261.32,4261.45,48.5\n")
    assert len(series) == 1
    assert series.timestamps[0] == 1502942400
    assert series.open[0] == 4261.48
    assert series.high[0] == 4280.56
    assert series.low[0] == 4261.32
    assert series.close[0] == 4261.45
    assert series.volume[0] == 48.5


def test_parse_rejects_high_below_low():
    text = HEADER + "3600,100,99,101,100,1\n"
    with pytest.raises(DataError, match="3600"):
        parse_candles_text(text)


def test_parse_rejects_duplicate_timestamps():
    text = HEADER + "3600,100,101,99,100,1\n3600,100,101,99,100,1\n"
    with pytest.raises(DataError, match="duplicate"):
        parse_candles_text(text)


def test_parse_sorts_rows():
    text = HEADER + "7200,100,101,99,100,1\n3600,100,101,99,100,1\n"
    series = parse_candles_text(text)
    assert list(series.timestamps) == [3600, 7200]


def test_parse_reports_line_number_for_malformed_row():
    text = HEADER + "3600,100,101,99,100,1\n7200,abc,101,99,100,1\n"
    with pytest.raises(DataError, match="line 3"):
        parse_candles_text(text)


def test_parse_missing_column():
    with pytest.raises(DataError, match="missing column"):
        parse_candles_text("timestamp,open,high,low,close\n3600,1,1,1,1\n")


def test_parse_column_mapping():
    text = "time,o,h,l,c,vol\n3600,100,101,99,100,1\n"
    series = parse_candles(io.StringIO(text), mapping={
        "timestamp": "time", "open": "o", "high": "h", "low": "l",
        "close": "c", "volume": "vol"})
    assert len(series) == 1 and series.close[0] == 100


def test_parse_rejects_misaligned_timestamp():
    with pytest.raises(DataError, match="aligned"):
        parse_candles_text(HEADER + "3601,100,101,99,100,1\n")


def test_parse_rejects_negative_volume_and_price():
    with pytest.raises(DataError, match="volume"):
        parse_candles_text(HEADER + "3600,100,101,99,100,-1\n")
    with pytest.raises(DataError, match="price"):
        parse_candles_text(HEADER + "3600,-100,101,99,100,1\n")


def test_round_trip_exact():
    series = generate_synthetic_series(seed=9, n=250, drift=0.0003, volatility=0.02)
    buf = io.StringIO()
    series.to_csv(buf)
    again = parse_candles(io.StringIO(buf.getvalue()), symbol=series.symbol)
    for field in ("timestamps", "open", "high", "low", "close", "volume"):
        assert np.array_equal(getattr(series, field), getattr(again, field))


def test_gap_indexing():
    ts = [3600, 7200, 10800, 21600]  # 2-bar hole before the last candle
    series = CandleSeries(ts, [1] * 4, [1] * 4, [1] * 4, [1] * 4, [0] * 4)
    assert series.gaps == ((2, 2),)


def test_series_arrays_are_read_only():
    series = generate_synthetic_series(seed=1, n=10)
    with pytest.raises(ValueError):
        series.close[0] = 1.0


def test_split_counts_small():
    series = generate_synthetic_series(seed=2, n=10)
    spec = SplitSpec(int(series.timestamps[3]), int(series.timestamps[6]))
    train, val, test = split_dataset(series, spec)
    assert (len(train), len(val), len(test)) == (4, 3, 3)
    assert train.timestamps[-1] == series.timestamps[3]  # boundary goes earlier


def test_split_partition_property():
    series = generate_synthetic_series(seed=3, n=200)
    rng = np.random.default_rng(0)
    for _ in range(20):
        i, j = sorted(rng.choice(np.arange(1, 199), size=2, replace=False))
        if i == j:
            continue
        spec = SplitSpec(int(series.timestamps[i]), int(series.timestamps[j]))
        train, val, test = split_dataset(series, spec)
        assert len(train) + len(val) + len(test) == len(series)
        all_ts = np.concatenate([train.timestamps, val.timestamps, test.timestamps])
        assert np.array_equal(all_ts, series.timestamps)


def test_split_boundary_at_start_is_degenerate():
    series = generate_synthetic_series(seed=4, n=10)
    spec = SplitSpec(int(series.timestamps[0]), int(series.timestamps[5]))
    with pytest.raises(ValueError, match="empty"):
        split_dataset(series, spec)


def test_split_boundary_outside_range():
    series = generate_synthetic_series(seed=4, n=10)
    spec = SplitSpec(int(series.timestamps[-1]) + HOUR, int(series.timestamps[-1]) + 2 * HOUR)
    with pytest.raises(ValueError):
        split_dataset(series, spec)


def _epoch(y, m, d):
    return int(datetime(y, m, d, tzinfo=timezone.utc).timestamp())


def test_split_full_history_proportions():
    # Hourly span 2017-09-08 .. 2023-06-02 with the published boundaries
    # lands near 17k / 4k / 29k points.
    start = _epoch(2017, 9, 8)
    end = _epoch(2023, 6, 2)
    n = (end - start) // HOUR + 1
    series = generate_synthetic_series(seed=0, n=n, drift=0.0, volatility=0.0,
                                       start_price=4000.0, start_ts=start)
    spec = SplitSpec(_epoch(2019, 8, 17), _epoch(2020, 1, 31))
    train, val, test = split_dataset(series, spec)
    assert len(train) == (spec.train_end - start) // HOUR + 1
    assert 16500 <= len(train) <= 17500
    assert 3900 <= len(val) <= 4100
    assert 28500 <= len(test) <= 29500


def test_synthetic_determinism():
    a = generate_synthetic_series(seed=11, n=500, drift=0.001, volatility=0.02)
    b = generate_synthetic_series(seed=11, n=500, drift=0.001, volatility=0.02)
    for field in ("timestamps", "open", "high", "low", "close", "volume"):
        assert np.array_equal(getattr(a, field), getattr(b, field))


def test_synthetic_zero_volatility_is_flat():
    series = generate_synthetic_series(seed=5, n=50, drift=0.0, volatility=0.0,
                                       start_price=123.0)
    assert np.allclose(series.close, 123.0)
    assert np.allclose(series.high, 123.0)
    assert np.allclose(series.low, 123.0)


def test_synthetic_drift_moment():
    series = generate_synthetic_series(seed=6, n=10_000, drift=0.001, volatility=0.01)
    logret = np.diff(np.log(series.close))
    se = 0.01 / np.sqrt(logret.size)
    assert abs(logret.mean() - 0.001) <= 3 * se


def test_synthetic_candle_invariants_across_seeds():
    for seed in range(15):
        s = generate_synthetic_series(seed=seed, n=300, drift=0.0005, volatility=0.03)
        assert np.all(s.low <= np.minimum(s.open, s.close))
        assert np.all(s.high >= np.maximum(s.open, s.close))
        assert np.all(s.low > 0)
        assert np.all(s.volume >= 0)
        assert np.all(np.diff(s.timestamps) == HOUR)


def test_synthetic_validates_arguments():
    with pytest.raises(ValueError):
        generate_synthetic_series(seed=0, n=0)
    with pytest.raises(ValueError):
        generate_synthetic_series(seed=0, n=5, volatility=-0.1)
    with pytest.raises(ValueError):
        generate_synthetic_series(seed=0, n=5, start_price=0.0)
