"""Technical indicators over candle series, batch and streaming.

All outputs are full-length value series aligned to the input timestamps;
warm-up entries are NaN, never zero-filled. Division-by-zero conventions:

- RSI with zero average loss -> 100
- Williams %R with window high == window low -> NaN for that bar
- CMF with any high == low bar in the window, or zero window volume -> NaN
- CCI with zero mean deviation -> 0
- PPO with a zero slow EMA -> NaN (unreachable for positive prices)
- CMO with zero summed movement -> 0
- EFI ratio form with zero current volume -> NaN

EFI ships in two variants: EFI_RATIO (period price change times period
volume change, divided by current volume) and EFI_STANDARD (EMA of
one-bar price change times volume). Plain "EFI" selects EFI_RATIO.

TRIX is reported in percent (one-bar rate of change of the triple EMA,
times 100), consistent with ROC and PPO.

Streaming evaluation (`make_stream`) reproduces batch output exactly,
bar for bar: both paths share the same arithmetic expressions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .candles import Candle, CandleSeries

NAN = float("nan")

ARITY = {
    "TRIX": 1,
    "MACD": 2,
    "PPO": 2,
    "ROC": 1,
    "EFI_RATIO": 1,
    "EFI_STANDARD": 1,
    "CMO": 1,
    "RSI": 1,
    "CCI": 1,
    "WILLIAMS_R": 1,
    "CMF": 1,
}

_ALIASES = {"EFI": "EFI_RATIO", "WILLIAMSR": "WILLIAMS_R", "%R": "WILLIAMS_R"}


@dataclass(frozen=True)
class IndicatorSpec:
    """An indicator kind plus its period(s). MACD/PPO take (fast, slow)."""

    kind: str
    periods: tuple[int, ...]

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.upper(), self.kind.upper())
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "periods", tuple(int(p) for p in self.periods))
        if kind not in ARITY:
            raise ValueError(f"unknown indicator kind {self.kind!r}")
        if len(self.periods) != ARITY[kind]:
            raise ValueError(
                f"{kind} takes {ARITY[kind]} period(s), got {self.periods}"
            )
        if any(p < 1 for p in self.periods):
            raise ValueError(f"periods must be >= 1, got {self.periods}")
        if kind in ("MACD", "PPO") and self.periods[0] >= self.periods[1]:
            raise ValueError(f"{kind} needs fast < slow, got {self.periods}")

    @property
    def name(self) -> str:
        return "_".join([self.kind] + [str(p) for p in self.periods])


@dataclass(frozen=True)
class ValueSeries:
    """Timestamped values aligned to a source series; NaN marks undefined."""

    name: str
    timestamps: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def defined_from(self) -> int | None:
        idx = np.flatnonzero(~np.isnan(self.values))
        return int(idx[0]) if idx.size else None


def _first_defined(x: np.ndarray) -> int | None:
    idx = np.flatnonzero(~np.isnan(x))
    return int(idx[0]) if idx.size else None


def _sma_array(x: np.ndarray, n: int) -> np.ndarray:
    out = np.full(x.size, np.nan)
    s = _first_defined(x)
    if s is None or x.size - s < n:
        return out
    out[s + n - 1:] = sliding_window_view(x[s:], n).mean(axis=1)
    return out


def _ema_array(x: np.ndarray, n: int) -> np.ndarray:
    """EMA with alpha = 2/(n+1), seeded by the SMA of the first n values."""
    out = np.full(x.size, np.nan)
    s = _first_defined(x)
    if s is None or x.size - s < n:
        return out
    alpha = 2.0 / (n + 1.0)
    one_minus = 1.0 - alpha
    acc = float(np.mean(x[s:s + n]))
    out[s + n - 1] = acc
    for t in range(s + n, x.size):
        acc = alpha * float(x[t]) + one_minus * acc
        out[t] = acc
    return out


def smooth(values: ValueSeries, kind: str, n: int) -> ValueSeries:
    """SMA or EMA over the defined suffix of a value series."""
    kind = kind.upper()
    if kind == "SMA":
        out = _sma_array(values.values, n)
    elif kind == "EMA":
        out = _ema_array(values.values, n)
    else:
        raise ValueError(f"smooth kind must be SMA or EMA, got {kind!r}")
    return ValueSeries(f"{kind}_{n}({values.name})", values.timestamps, out)


def _guarded_ratio(num, den, on_zero):
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    return np.where(den == 0, on_zero, ratio)


def _trix(series: CandleSeries, n: int) -> np.ndarray:
    e = _ema_array(_ema_array(_ema_array(series.close, n), n), n)
    out = np.full(len(series), np.nan)
    if len(series) > 1:
        with np.errstate(invalid="ignore", divide="ignore"):
            out[1:] = 100.0 * ((e[1:] - e[:-1]) / e[:-1])
    return out


def _macd(series: CandleSeries, fast: int, slow: int) -> np.ndarray:
    return _ema_array(series.close, fast) - _ema_array(series.close, slow)


def _ppo(series: CandleSeries, fast: int, slow: int) -> np.ndarray:
    slow_ema = _ema_array(series.close, slow)
    num = _ema_array(series.close, fast) - slow_ema
    return _guarded_ratio(100.0 * num, slow_ema, np.nan)


def _roc(series: CandleSeries, n: int) -> np.ndarray:
    c = series.close
    out = np.full(len(series), np.nan)
    if len(series) > n:
        out[n:] = 100.0 * ((c[n:] - c[:-n]) / c[:-n])
    return out


def _efi_ratio(series: CandleSeries, n: int) -> np.ndarray:
    c, v = series.close, series.volume
    out = np.full(len(series), np.nan)
    if len(series) > n:
        num = (c[n:] - c[:-n]) * (v[n:] - v[:-n])
        out[n:] = _guarded_ratio(num, v[n:], np.nan)
    return out


def _efi_standard(series: CandleSeries, n: int) -> np.ndarray:
    c, v = series.close, series.volume
    force = np.full(len(series), np.nan)
    if len(series) > 1:
        force[1:] = (c[1:] - c[:-1]) * v[1:]
    return _ema_array(force, n)


def _gain_loss(close: np.ndarray):
    d = close[1:] - close[:-1]
    return np.where(d > 0, d, 0.0), np.where(d < 0, -d, 0.0)


def _cmo(series: CandleSeries, n: int) -> np.ndarray:
    out = np.full(len(series), np.nan)
    gains, losses = _gain_loss(series.close)
    if gains.size < n:
        return out
    p = sliding_window_view(gains, n).sum(axis=1)
    neg = sliding_window_view(losses, n).sum(axis=1)
    tot = p + neg
    out[n:] = np.where(tot == 0, 0.0, _guarded_ratio(100.0 * (p - neg), tot, 0.0))
    return out


def _rsi(series: CandleSeries, n: int) -> np.ndarray:
    out = np.full(len(series), np.nan)
    gains, losses = _gain_loss(series.close)
    if gains.size < n:
        return out
    avg_gain = sliding_window_view(gains, n).sum(axis=1) / n
    avg_loss = sliding_window_view(losses, n).sum(axis=1) / n
    rs = _guarded_ratio(avg_gain, avg_loss, np.nan)
    out[n:] = np.where(avg_loss == 0, 100.0, 100.0 - 100.0 / (1.0 + rs))
    return out


def _cci(series: CandleSeries, n: int) -> np.ndarray:
    out = np.full(len(series), np.nan)
    tp = (series.high + series.low + series.close) / 3.0
    if tp.size < n:
        return out
    w = sliding_window_view(tp, n)
    m = w.mean(axis=1)
    md = np.abs(w - m[:, None]).mean(axis=1)
    num = tp[n - 1:] - m
    den = 0.015 * md
    out[n - 1:] = np.where(den == 0, 0.0, _guarded_ratio(num, den, 0.0))
    return out


def _williams_r(series: CandleSeries, n: int) -> np.ndarray:
    out = np.full(len(series), np.nan)
    if len(series) < n:
        return out
    hi = sliding_window_view(series.high, n).max(axis=1)
    lo = sliding_window_view(series.low, n).min(axis=1)
    rng = hi - lo
    num = hi - series.close[n - 1:]
    out[n - 1:] = np.where(rng == 0, np.nan, _guarded_ratio(num, rng, np.nan) * (-100.0))
    return out


def _cmf(series: CandleSeries, n: int) -> np.ndarray:
    out = np.full(len(series), np.nan)
    if len(series) < n:
        return out
    hl = series.high - series.low
    with np.errstate(divide="ignore", invalid="ignore"):
        mfm = ((series.close - series.low) - (series.high - series.close)) / hl
    mfm = np.where(hl == 0, np.nan, mfm)
    mfv = mfm * series.volume
    num = sliding_window_view(mfv, n).sum(axis=1)
    den = sliding_window_view(series.volume, n).sum(axis=1)
    out[n - 1:] = np.where(den == 0, np.nan, _guarded_ratio(num, den, np.nan))
    return out


_BATCH = {
    "TRIX": _trix,
    "MACD": _macd,
    "PPO": _ppo,
    "ROC": _roc,
    "EFI_RATIO": _efi_ratio,
    "EFI_STANDARD": _efi_standard,
    "CMO": _cmo,
    "RSI": _rsi,
    "CCI": _cci,
    "WILLIAMS_R": _williams_r,
    "CMF": _cmf,
}


def compute_indicator(series: CandleSeries, spec: IndicatorSpec) -> ValueSeries:
    """Evaluate one indicator over a whole series.

    Too-short input yields an all-NaN series rather than an error.
    """
    values = _BATCH[spec.kind](series, *spec.periods)
    return ValueSeries(spec.name, series.timestamps, values)


# --- streaming evaluation ----------------------------------------------------


class _EmaState:
    """Incremental EMA matching _ema_array exactly (SMA-seeded)."""

    __slots__ = ("n", "alpha", "one_minus", "buf", "value")

    def __init__(self, n: int):
        self.n = n
        self.alpha = 2.0 / (n + 1.0)
        self.one_minus = 1.0 - self.alpha
        self.buf: list[float] = []
        self.value: float | None = None

    def update(self, x: float) -> float:
        if self.value is None:
            self.buf.append(x)
            if len(self.buf) < self.n:
                return NAN
            self.value = float(np.mean(self.buf))
            return self.value
        self.value = self.alpha * float(x) + self.one_minus * self.value
        return self.value


class _Window:
    """Fixed-length trailing window; reductions mirror the batch windows."""

    __slots__ = ("n", "items")

    def __init__(self, n: int):
        self.n = n
        self.items: list[float] = []

    def push(self, x: float) -> bool:
        self.items.append(x)
        if len(self.items) > self.n:
            self.items.pop(0)
        return len(self.items) == self.n

    def array(self) -> np.ndarray:
        return np.asarray(self.items, dtype=np.float64)


class TrixStream:
    def __init__(self, n: int):
        self.e1, self.e2, self.e3 = _EmaState(n), _EmaState(n), _EmaState(n)
        self.prev = None

    def update(self, candle: Candle) -> float:
        v = self.e1.update(candle.close)
        if math.isnan(v):
            return NAN
        v = self.e2.update(v)
        if math.isnan(v):
            return NAN
        v = self.e3.update(v)
        if math.isnan(v):
            return NAN
        prev, self.prev = self.prev, v
        if prev is None:
            return NAN
        return 100.0 * ((v - prev) / prev)


class MacdStream:
    def __init__(self, fast: int, slow: int):
        self.fast, self.slow = _EmaState(fast), _EmaState(slow)

    def update(self, candle: Candle) -> float:
        f = self.fast.update(candle.close)
        s = self.slow.update(candle.close)
        return f - s


class PpoStream:
    def __init__(self, fast: int, slow: int):
        self.fast, self.slow = _EmaState(fast), _EmaState(slow)

    def update(self, candle: Candle) -> float:
        f = self.fast.update(candle.close)
        s = self.slow.update(candle.close)
        if math.isnan(s) or math.isnan(f):
            return NAN
        if s == 0:
            return NAN
        return (100.0 * (f - s)) / s


class RocStream:
    def __init__(self, n: int):
        self.win = _Window(n + 1)

    def update(self, candle: Candle) -> float:
        if not self.win.push(candle.close):
            return NAN
        base = self.win.items[0]
        return 100.0 * ((candle.close - base) / base)


class EfiPaperStream:
    def __init__(self, n: int):
        self.closes = _Window(n + 1)
        self.volumes = _Window(n + 1)

    def update(self, candle: Candle) -> float:
        ready = self.closes.push(candle.close)
        self.volumes.push(candle.volume)
        if not ready:
            return NAN
        if candle.volume == 0:
            return NAN
        num = (candle.close - self.closes.items[0]) * (candle.volume - self.volumes.items[0])
        return num / candle.volume


class EfiStandardStream:
    def __init__(self, n: int):
        self.ema = _EmaState(n)
        self.prev_close = None

    def update(self, candle: Candle) -> float:
        prev, self.prev_close = self.prev_close, candle.close
        if prev is None:
            return NAN
        force = (candle.close - prev) * candle.volume
        return self.ema.update(force)


class _GainLossStream:
    __slots__ = ("gains", "losses", "prev")

    def __init__(self, n: int):
        self.gains = _Window(n)
        self.losses = _Window(n)
        self.prev = None

    def push(self, close: float) -> bool:
        prev, self.prev = self.prev, close
        if prev is None:
            return False
        d = close - prev
        ready = self.gains.push(d if d > 0 else 0.0)
        self.losses.push(-d if d < 0 else 0.0)
        return ready


class CmoStream:
    def __init__(self, n: int):
        self.gl = _GainLossStream(n)

    def update(self, candle: Candle) -> float:
        if not self.gl.push(candle.close):
            return NAN
        p = self.gl.gains.array().sum()
        neg = self.gl.losses.array().sum()
        tot = p + neg
        if tot == 0:
            return 0.0
        return (100.0 * (p - neg)) / tot


class RsiStream:
    def __init__(self, n: int):
        self.n = n
        self.gl = _GainLossStream(n)

    def update(self, candle: Candle) -> float:
        if not self.gl.push(candle.close):
            return NAN
        avg_gain = self.gl.gains.array().sum() / self.n
        avg_loss = self.gl.losses.array().sum() / self.n
        if avg_loss == 0:
            return 100.0
        rs = avg_gain / avg_loss
        return 100.0 - 100.0 / (1.0 + rs)


class CciStream:
    def __init__(self, n: int):
        self.win = _Window(n)

    def update(self, candle: Candle) -> float:
        tp = (candle.high + candle.low + candle.close) / 3.0
        if not self.win.push(tp):
            return NAN
        arr = self.win.array()
        m = arr.mean()
        md = np.abs(arr - m).mean()
        num = tp - m
        den = 0.015 * md
        if den == 0:
            return 0.0
        return num / den


class WilliamsRStream:
    def __init__(self, n: int):
        self.highs = _Window(n)
        self.lows = _Window(n)

    def update(self, candle: Candle) -> float:
        ready = self.highs.push(candle.high)
        self.lows.push(candle.low)
        if not ready:
            return NAN
        hi = self.highs.array().max()
        lo = self.lows.array().min()
        rng = hi - lo
        if rng == 0:
            return NAN
        return ((hi - candle.close) / rng) * (-100.0)


class CmfStream:
    def __init__(self, n: int):
        self.mfv = _Window(n)
        self.vol = _Window(n)

    def update(self, candle: Candle) -> float:
        hl = candle.high - candle.low
        if hl == 0:
            mfm = NAN
        else:
            mfm = ((candle.close - candle.low) - (candle.high - candle.close)) / hl
        ready = self.mfv.push(mfm * candle.volume)
        self.vol.push(candle.volume)
        if not ready:
            return NAN
        den = self.vol.array().sum()
        if den == 0:
            return NAN
        num = self.mfv.array().sum()
        return num / den


_STREAMS = {
    "TRIX": TrixStream,
    "MACD": MacdStream,
    "PPO": PpoStream,
    "ROC": RocStream,
    "EFI_RATIO": EfiPaperStream,
    "EFI_STANDARD": EfiStandardStream,
    "CMO": CmoStream,
    "RSI": RsiStream,
    "CCI": CciStream,
    "WILLIAMS_R": WilliamsRStream,
    "CMF": CmfStream,
}


def make_stream(spec: IndicatorSpec):
    """Incremental evaluator for one spec: ``update(candle) -> float`` (NaN
    during warm-up). Produces exactly the batch values, bar for bar."""
    return _STREAMS[spec.kind](*spec.periods)
