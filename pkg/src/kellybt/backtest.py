"""Trading loop: align predictions and estimates, size, hold, compound.

Fills happen at the decision bar's close and exits at the close ``horizon``
bars later. The default stride equals the horizon, so positions never
overlap; with stride < horizon each position's exposure is divided by the
maximum number of concurrently open trades (ceil(horizon/stride)) so
aggregate exposure never exceeds the leverage cap.

Flat decisions are recorded as zero-fraction trades so that every policy
run over the same inputs produces the same trade timestamps, which keeps
strategy comparisons aligned row for row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .candles import CandleSeries
from .predictors import DirectionPrediction, ScenarioEstimate
from .sizing import SizingPolicy, decide


@dataclass(frozen=True)
class BacktestConfig:
    horizon: int = 5
    stride: int | None = None  # None -> horizon (non-overlapping)
    fee_rate: float = 0.0
    initial_bankroll: float = 1.0
    ruin_floor: float = 0.01

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.stride is not None and self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.fee_rate < 0:
            raise ValueError(f"fee_rate must be >= 0, got {self.fee_rate}")
        if self.initial_bankroll <= 0:
            raise ValueError(f"initial_bankroll must be > 0, got {self.initial_bankroll}")
        if not 0 <= self.ruin_floor < 1:
            raise ValueError(f"ruin_floor must be in [0, 1), got {self.ruin_floor}")

    @property
    def effective_stride(self) -> int:
        return self.horizon if self.stride is None else self.stride


@dataclass(frozen=True)
class Trade:
    entry_ts: int
    exit_ts: int
    side: str
    fraction: float
    entry_price: float
    exit_price: float
    realized_return: float
    pnl_fraction: float


@dataclass(frozen=True)
class EquityCurve:
    """Compounding bankroll path: one point per trade exit plus the start."""

    timestamps: np.ndarray
    values: np.ndarray
    ruin: bool = False

    def __len__(self) -> int:
        return int(self.timestamps.size)


def run_backtest(series: CandleSeries, predictions: list[DirectionPrediction],
                 estimates: list[ScenarioEstimate] | None, policy: SizingPolicy,
                 cfg: BacktestConfig = BacktestConfig()):
    """Run one policy over the series; returns (EquityCurve, list of Trade).

    Decisions fall on a stride lattice over timestamps that carry a
    prediction and (when estimates are supplied) a defined estimate;
    timestamps without an estimate are skipped. The simulation halts with
    the RUIN flag if the bankroll falls to ruin_floor * initial.
    """
    known = {int(t): i for i, t in enumerate(series.timestamps)}
    for p in predictions:
        if p.timestamp not in known:
            raise ValueError(f"prediction timestamp {p.timestamp} is not in the series")
    est_by_ts = None
    if estimates is not None:
        est_by_ts = {}
        for e in estimates:
            if e.timestamp not in known:
                raise ValueError(f"estimate timestamp {e.timestamp} is not in the series")
            est_by_ts[e.timestamp] = e

    n = len(series)
    horizon = cfg.horizon
    stride = cfg.effective_stride
    divisor = 1 if stride >= horizon else math.ceil(horizon / stride)

    entries = []
    next_allowed = -1
    for p in predictions:
        i = known[p.timestamp]
        if i < next_allowed or i + horizon >= n:
            continue
        est = None
        if est_by_ts is not None:
            est = est_by_ts.get(p.timestamp)
            if est is None:
                continue
        entries.append((i, decide(p, est, policy)))
        next_allowed = i + stride

    if not entries:
        raise ValueError("no usable decision timestamps (check alignment and estimates)")

    initial = cfg.initial_bankroll
    floor = cfg.ruin_floor * initial
    bankroll = initial
    ruin = False
    trades: list[Trade] = []
    curve_ts = [int(series.timestamps[entries[0][0]])]
    curve_val = [bankroll]
    for i, dec in entries:
        fraction = dec.fraction / divisor
        entry_price = float(series.close[i])
        exit_price = float(series.close[i + horizon])
        realized = (exit_price - entry_price) / entry_price
        pnl = fraction * realized - cfg.fee_rate * abs(fraction) * 2.0
        bankroll = bankroll * (1.0 + pnl)
        if bankroll < 0.0:
            # A leveraged loss beyond -100% is a wipeout, not a debt.
            bankroll = 0.0
        trades.append(Trade(
            entry_ts=int(series.timestamps[i]),
            exit_ts=int(series.timestamps[i + horizon]),
            side=dec.side,
            fraction=fraction,
            entry_price=entry_price,
            exit_price=exit_price,
            realized_return=realized,
            pnl_fraction=pnl,
        ))
        curve_ts.append(int(series.timestamps[i + horizon]))
        curve_val.append(bankroll)
        if bankroll <= floor:
            ruin = True
            break

    curve = EquityCurve(np.array(curve_ts, dtype=np.int64),
                        np.array(curve_val, dtype=np.float64), ruin=ruin)
    return curve, trades


@dataclass(frozen=True)
class StrategyResult:
    """One policy's outcome over the shared decision grid; ``report`` is a
    metrics.BacktestReport (typed loosely to keep metrics import one-way)."""

    policy: SizingPolicy
    curve: EquityCurve
    trades: list[Trade] = field(repr=False)
    report: object = None


def compare_strategies(series: CandleSeries, predictions: list[DirectionPrediction],
                       estimates: list[ScenarioEstimate] | None,
                       policies: list[SizingPolicy],
                       cfg: BacktestConfig = BacktestConfig()) -> list[StrategyResult]:
    """Run each policy against identical predictions and trade timestamps."""
    from . import metrics

    if not policies:
        raise ValueError("need at least one policy")
    results = []
    for policy in policies:
        curve, trades = run_backtest(series, predictions, estimates, policy, cfg)
        results.append(StrategyResult(policy, curve, trades, metrics.build_report(curve, trades)))
    return results


def write_trades_csv(trades: list[Trade], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("entry_ts,exit_ts,side,fraction,entry_price,exit_price,"
                 "realized_return,pnl_fraction\n")
        for t in trades:
            fh.write(f"{t.entry_ts},{t.exit_ts},{t.side},{t.fraction!r},{t.entry_price!r},"
                     f"{t.exit_price!r},{t.realized_return!r},{t.pnl_fraction!r}\n")


def write_equity_csv(curve: EquityCurve, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("timestamp,bankroll\n")
        for ts, v in zip(curve.timestamps, curve.values):
            fh.write(f"{int(ts)},{float(v)!r}\n")
