"""Batch command-line surface for the pipeline.

Subcommands: ingest, synth, features, label, simulate, backtest, compare,
report, kelly-surface. Every artifact-producing run writes its outputs plus
one manifest.json into the output directory; charts always have a CSV twin.

Config precedence is CLI flag > config file (JSON) > built-in default; the
fully resolved config is echoed in the manifest. Exit codes: 0 success,
2 usage error, 3 missing input, 4 config/validation error, 5 malformed
data. Failures emit a one-line JSON error record on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import artifacts, backtest, features, labeling, metrics, predictors, sizing
from .candles import (HOUR, CandleSeries, DataError, SplitSpec,
                      generate_synthetic_series, parse_candles, split_dataset)

EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_CONFIG = 4
EXIT_DATA = 5

ENV_DATA_DIR = "KELLYBT_DATA_DIR"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


DEFAULTS: dict[str, dict] = {
    "ingest": {"input": None, "symbol": "BTCUSDT", "train_end": None,
               "val_end": None, "out": None},
    "synth": {"seed": 0, "n": 5000, "drift": 0.0, "volatility": 0.01,
              "start_price": 30000.0, "start_ts": "2020-01-01", "symbol": "SYNTH",
              "out": None},
    "features": {"input": None, "symbol": "BTCUSDT", "grid": None,
                 "price_model": False, "horizon": 5, "train_end": None,
                 "normalize_weights": False, "out": None},
    "label": {"input": None, "symbol": "BTCUSDT", "up_pct": 0.02, "down_pct": 0.02,
              "horizon": 5, "vertical_rule": "SIGN", "stride": 1,
              "ambiguous_to_lower": False, "out": None},
    "simulate": {"input": None, "symbol": "SYNTH", "seed": 0, "n": 5000,
                 "drift": 0.0, "volatility": 0.01, "start_price": 30000.0,
                 "sim": "balanced", "sim_seed": 0, "hit_rate": 0.6, "p_const": 0.6,
                 "sigma": 0.1, "mu_long": 0.6, "mu_short": 0.4,
                 "policy": "none,gaussian,kelly", "kelly_fraction": 1.0,
                 "max_leverage": 5.0, "expected": 0.5, "modifier": 1.0,
                 "horizon": 5, "stride": None, "fee_rate": 0.0, "window": 250,
                 "const_a": None, "const_b": None, "out": None},
    "backtest": {"input": None, "symbol": "BTCUSDT", "predictions": None,
                 "policy": "kelly", "kelly_fraction": 1.0, "max_leverage": 5.0,
                 "expected": 0.5, "modifier": 1.0, "horizon": 5, "stride": None,
                 "fee_rate": 0.0, "window": 250, "out": None},
    "compare": {"seeds": "0-9", "n": 5000, "drift": 0.0, "volatility": 0.01,
                "start_price": 30000.0, "sims": "balanced,gaussian",
                "hit_rate": 0.6, "p_const": 0.6, "sigma": 0.1, "mu_long": 0.6,
                "mu_short": 0.4, "policy": "none,gaussian,kelly",
                "kelly_fraction": 1.0, "max_leverage": 5.0, "expected": 0.5,
                "modifier": 1.0, "horizon": 5, "stride": None, "fee_rate": 0.0,
                "window": 250, "const_a": None, "const_b": None, "out": None},
    "report": {"input": None, "symbol": "BTCUSDT", "predictions": None,
               "strategy_name": "external", "threshold": 0.5, "policy": "kelly",
               "kelly_fraction": 1.0, "max_leverage": 5.0, "expected": 0.5,
               "modifier": 1.0, "horizon": 5, "stride": None, "fee_rate": 0.0,
               "window": 250, "out": None},
    "kelly-surface": {"p": None, "out": None},
}

_FLAG_HELP = {
    "input": "input candle CSV (timestamp,open,high,low,close,volume)",
    "out": "output directory (default: $KELLYBT_DATA_DIR or ./kellybt_runs, per command)",
    "train_end": "end of the training split, ISO-8601 date or epoch seconds",
    "val_end": "end of the validation split, ISO-8601 date or epoch seconds",
    "policy": "sizing policy name or comma list of none|gaussian|kelly",
    "window": "trailing window (bars) for scenario estimates",
}

_BOOL_FLAGS = {"price_model", "normalize_weights", "ambiguous_to_lower"}
_INT_FLAGS = {"seed", "n", "horizon", "stride", "sim_seed", "window"}
_FLOAT_FLAGS = {"drift", "volatility", "start_price", "up_pct", "down_pct",
                "hit_rate", "p_const", "sigma", "mu_long", "mu_short",
                "kelly_fraction", "max_leverage", "expected", "modifier",
                "fee_rate", "threshold", "p", "const_a", "const_b"}


def build_parser() -> _Parser:
    parser = _Parser(prog="kellybt", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON config file; CLI flags override it")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, defaults in DEFAULTS.items():
        p = sub.add_parser(command)
        for key in defaults:
            flag = "--" + key.replace("_", "-")
            if key in _BOOL_FLAGS:
                p.add_argument(flag, dest=key, action="store_const", const=True,
                               default=None, help=_FLAG_HELP.get(key))
            elif key in _INT_FLAGS:
                p.add_argument(flag, dest=key, type=int, default=None,
                               help=_FLAG_HELP.get(key))
            elif key in _FLOAT_FLAGS:
                p.add_argument(flag, dest=key, type=float, default=None,
                               help=_FLAG_HELP.get(key))
            else:
                p.add_argument(flag, dest=key, default=None, help=_FLAG_HELP.get(key))
    return parser


def _resolve(command: str, args: argparse.Namespace) -> dict:
    resolved = dict(DEFAULTS[command])
    if args.config:
        if not os.path.exists(args.config):
            raise FileNotFoundError(f"config file not found: {args.config}")
        with open(args.config) as fh:
            conf = json.load(fh)
        section = conf.get(command, conf) if isinstance(conf, dict) else None
        if not isinstance(section, dict):
            raise ValueError("config file must hold a JSON object")
        for key, value in section.items():
            norm = key.replace("-", "_")
            if norm in DEFAULTS and isinstance(value, dict):
                continue  # section for another command
            if norm not in resolved:
                raise ValueError(f"unknown config key {key!r} for command {command}")
            resolved[norm] = value
    for key in DEFAULTS[command]:
        value = getattr(args, key)
        if value is not None:
            resolved[key] = value
    return resolved


def _outdir(resolved: dict, command: str) -> str:
    out = resolved.get("out")
    if out is None:
        base = os.environ.get(ENV_DATA_DIR, "kellybt_runs")
        out = os.path.join(base, command)
    os.makedirs(out, exist_ok=True)
    return out


def _parse_time(value) -> int:
    """Epoch seconds, or an ISO-8601 date / datetime interpreted as UTC."""
    if isinstance(value, int):
        return value
    text = str(value).strip()
    try:
        return int(text)
    except ValueError:
        pass
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _require(resolved: dict, command: str, *keys: str) -> None:
    for key in keys:
        if resolved.get(key) is None:
            raise ValueError(f"{command} requires --{key.replace('_', '-')}")


def _load_series(path: str, symbol: str) -> CandleSeries:
    if not os.path.exists(path):
        raise FileNotFoundError(f"input file not found: {path}")
    return parse_candles(path, symbol=symbol)


def _policies(resolved: dict) -> list[sizing.SizingPolicy]:
    names = [s.strip() for s in str(resolved["policy"]).split(",") if s.strip()]
    if not names:
        raise ValueError("no sizing policy given")
    return [
        sizing.SizingPolicy(
            kind=name,
            kelly_fraction=float(resolved["kelly_fraction"]),
            max_leverage=float(resolved["max_leverage"]),
            expected=float(resolved["expected"]),
            modifier=float(resolved["modifier"]),
        )
        for name in names
    ]


def _scenario_estimates(series, labels, resolved: dict):
    """Trailing-window estimates by default; constants when configured."""
    const_a, const_b = resolved.get("const_a"), resolved.get("const_b")
    if (const_a is None) != (const_b is None):
        raise ValueError("--const-a and --const-b must be given together")
    if const_a is not None:
        if const_a <= 0 or const_b <= 0:
            raise ValueError("constant scenario magnitudes must be > 0")
        return [predictors.ScenarioEstimate(int(t), float(const_a), float(const_b))
                for t in labels.timestamps]
    return predictors.estimate_scenarios(series, horizon=resolved["horizon"],
                                         window=resolved["window"])


def _simulate_predictions(labels, sim: str, seed: int, resolved: dict):
    sim = sim.lower()
    if sim == "balanced":
        return predictors.simulate_balanced(labels, seed, hit_rate=resolved["hit_rate"],
                                            p_const=resolved["p_const"])
    if sim == "optimal":
        return predictors.simulate_optimal(labels)
    if sim == "gaussian":
        return predictors.simulate_gaussian(labels, seed, mu_long=resolved["mu_long"],
                                            mu_short=resolved["mu_short"],
                                            sigma=resolved["sigma"],
                                            hit_rate=resolved["hit_rate"])
    raise ValueError(f"unknown simulator {sim!r} (use balanced|optimal|gaussian)")


def _report_row(report: metrics.BacktestReport) -> list[str]:
    def fmt(v):
        return "NA" if v is None else repr(float(v))

    return [fmt(report.cumulative_return_pct), fmt(report.max_drawdown_pct),
            fmt(report.sharpe), fmt(report.romad)]


def _write_table5(rows: list[tuple[str, metrics.BacktestReport]], path: str) -> None:
    """Benchmark-table layout: Cumulative Return, Max Drawdown, Sharpe, RoMaD."""
    with open(path, "w", newline="") as fh:
        fh.write("Strategy,Cumulative Return,Max Drawdown,Sharpe,RoMaD\n")
        for name, report in rows:
            fh.write(",".join([name] + _report_row(report)) + "\n")


def _report_dict(report: metrics.BacktestReport) -> dict:
    return {
        "cumulative_return_pct": report.cumulative_return_pct,
        "max_drawdown_pct": report.max_drawdown_pct,
        "sharpe": report.sharpe,
        "romad": report.romad,
        "trade_count": report.trade_count,
        "win_rate": report.win_rate,
        "flags": list(report.flags),
    }


def _write_comparison(rows: list[dict], path: str) -> None:
    cols = ["model", "seed", "policy", "cumulative_return_pct", "max_drawdown_pct",
            "sharpe", "romad", "trade_count", "win_rate", "flags"]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            out = []
            for col in cols:
                v = row.get(col)
                if v is None:
                    out.append("NA")
                elif isinstance(v, float):
                    out.append(repr(v))
                elif isinstance(v, (list, tuple)):
                    out.append(";".join(str(x) for x in v))
                else:
                    out.append(str(v))
            fh.write(",".join(out) + "\n")


def _equity_svg(results: list[backtest.StrategyResult], path: str, title: str) -> None:
    curves = []
    for res in results:
        xs = [(int(t) - int(res.curve.timestamps[0])) / HOUR for t in res.curve.timestamps]
        curves.append((res.policy.label, xs, [float(v) for v in res.curve.values]))
    artifacts.svg_line_chart(curves, path, title=title)


# --- commands -----------------------------------------------------------------


def cmd_ingest(resolved: dict, outdir: str) -> tuple[list[str], list[int]]:
    _require(resolved, "ingest", "input", "train_end", "val_end")
    series = _load_series(resolved["input"], resolved["symbol"])
    spec = SplitSpec(_parse_time(resolved["train_end"]), _parse_time(resolved["val_end"]))
    train, val, test = split_dataset(series, spec)
    written = []
    for name, part in (("train", train), ("validation", val), ("test", test)):
        path = os.path.join(outdir, f"{name}.csv")
        part.to_csv(path)
        written.append(path)
    summary = {
        "symbol": series.symbol,
        "rows": len(series),
        "split_rows": {"train": len(train), "validation": len(val), "test": len(test)},
        "gaps": len(series.gaps),
        "range": [int(series.timestamps[0]), int(series.timestamps[-1])],
    }
    path = os.path.join(outdir, "summary.json")
    artifacts.write_json(summary, path)
    written.append(path)
    return written, []


def cmd_synth(resolved: dict, outdir: str) -> tuple[list[str], list[int]]:
    series = generate_synthetic_series(
        seed=resolved["seed"], n=resolved["n"], drift=resolved["drift"],
        volatility=resolved["volatility"], start_price=resolved["start_price"],
        symbol=resolved["symbol"], start_ts=_parse_time(resolved["start_ts"]),
    )
    path = os.path.join(outdir, "candles.csv")
    series.to_csv(path)
    return [path], [resolved["seed"]]


def cmd_features(resolved: dict, outdir: str) -> tuple[list[str], list[int]]:
    _require(resolved, "features", "input")
    series = _load_series(resolved["input"], resolved["symbol"])
    if resolved["grid"]:
        with open(resolved["grid"]) as fh:
            grid = features.grid_from_config(json.load(fh)["indicators"])
    else:
        grid = features.default_grid()
    matrix = features.build_feature_matrix(series, grid,
                                           price_model=bool(resolved["price_model"]),
                                           horizon=resolved["horizon"])
    written = []
    if resolved["train_end"] is not None:
        stats = features.fit_normalizer(
            matrix, (int(series.timestamps[0]), _parse_time(resolved["train_end"])))
        matrix = features.apply_normalizer(matrix, stats)
        path = os.path.join(outdir, "norm_stats.json")
        features.write_norm_stats_json(stats, path)
        written.append(path)
    labels = features.make_labels(series, horizon=resolved["horizon"],
                                  normalize_weights=bool(resolved["normalize_weights"]))
    fpath = os.path.join(outdir, "features.csv")
    features.write_matrix_csv(matrix, fpath)
    lpath = os.path.join(outdir, "labels.csv")
    features.write_labels_csv(labels, lpath)
    return written + [fpath, lpath], []


def cmd_label(resolved: dict, outdir: str) -> tuple[list[str], list[int]]:
    _require(resolved, "label", "input")
    series = _load_series(resolved["input"], resolved["symbol"])
    cfg = labeling.BarrierConfig(
        up_pct=resolved["up_pct"], down_pct=resolved["down_pct"],
        horizon=resolved["horizon"], vertical_rule=str(resolved["vertical_rule"]).upper(),
        ambiguous_to_lower=bool(resolved["ambiguous_to_lower"]),
    )
    labeled = labeling.label_series(series, cfg, stride=resolved["stride"])
    path = os.path.join(outdir, "barrier_labels.csv")
    labeling.write_barrier_labels_csv(series, labeled, path)
    return [path], []


def _sim_series(resolved: dict) -> tuple[CandleSeries, list[int]]:
    if resolved["input"]:
        return _load_series(resolved["input"], resolved["symbol"]), []
    series = generate_synthetic_series(
        seed=resolved["seed"], n=resolved["n"], drift=resolved["drift"],
        volatility=resolved["volatility"], start_price=resolved["start_price"],
        symbol=resolved["symbol"],
    )
    return series, [resolved["seed"]]


def cmd_simulate(resolved: dict, outdir: str) -> tuple[list[str], list[int]]:
    series, seeds = _sim_series(resolved)
    labels = features.make_labels(series, horizon=resolved["horizon"])
    preds = _simulate_predictions(labels, resolved["sim"], resolved["sim_seed"], resolved)
    ests = _scenario_estimates(series, labels, resolved)
    cfg = backtest.BacktestConfig(horizon=resolved["horizon"], stride=resolved["stride"],
                                  fee_rate=resolved["fee_rate"])
    results = backtest.compare_strategies(series, preds, ests, _policies(resolved), cfg)

    written = []
    ppath = os.path.join(outdir, "predictions.csv")
    predictors.write_predictions_csv(preds, ests, ppath)
    written.append(ppath)
    rows = []
    table5 = []
    for res in results:
        rows.append({"model": resolved["sim"], "seed": resolved["sim_seed"],
                     "policy": res.policy.label, **_report_dict(res.report)})
        table5.append((res.policy.label, res.report))
        epath = os.path.join(outdir, f"equity_{res.policy.label}.csv")
        backtest.write_equity_csv(res.curve, epath)
        written.append(epath)
    cpath = os.path.join(outdir, "comparison.csv")
    _write_comparison(rows, cpath)
    written.append(cpath)
    jpath = os.path.join(outdir, "comparison.json")
    artifacts.write_json(rows, jpath)
    written.append(jpath)
    tpath = os.path.join(outdir, "report_table.csv")
    _write_table5(table5, tpath)
    written.append(tpath)
    spath = os.path.join(outdir, "equity.svg")
    _equity_svg(results, spath, title=f"{resolved['sim']} simulator")
    written.append(spath)
    return written, seeds + [resolved["sim_seed"]]


def cmd_backtest(resolved: dict, outdir: str) -> tuple[list[str], list[int]]:
    _require(resolved, "backtest", "input", "predictions")
    series = _load_series(resolved["input"], resolved["symbol"])
    if not os.path.exists(resolved["predictions"]):
        raise FileNotFoundError(f"predictions file not found: {resolved['predictions']}")
    preds, ests = predictors.load_predictions(resolved["predictions"], series)
    scenario_source = "file"
    if ests is None:
        ests = predictors.estimate_scenarios(series, horizon=resolved["horizon"],
                                             window=resolved["window"])
        scenario_source = "trailing_estimate"
    cfg = backtest.BacktestConfig(horizon=resolved["horizon"], stride=resolved["stride"],
                                  fee_rate=resolved["fee_rate"])
    policy = _policies(resolved)[0]
    curve, trades = backtest.run_backtest(series, preds, ests, policy, cfg)
    report = metrics.build_report(curve, trades)

    written = []
    tpath = os.path.join(outdir, "trades.csv")
    backtest.write_trades_csv(trades, tpath)
    written.append(tpath)
    epath = os.path.join(outdir, "equity.csv")
    backtest.write_equity_csv(curve, epath)
    written.append(epath)
    spath = os.path.join(outdir, "equity.svg")
    xs = [(int(t) - int(curve.timestamps[0])) / HOUR for t in curve.timestamps]
    artifacts.svg_line_chart([(policy.label, xs, [float(v) for v in curve.values])],
                             spath, title=f"backtest {series.symbol}")
    written.append(spath)
    jpath = os.path.join(outdir, "report.json")
    artifacts.write_json({**_report_dict(report), "scenario_source": scenario_source}, jpath)
    written.append(jpath)
    t5path = os.path.join(outdir, "report_table.csv")
    _write_table5([(policy.label, report)], t5path)
    written.append(t5path)
    return written, []


def _parse_seeds(text: str) -> list[int]:
    seeds: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError(f"no seeds in {text!r}")
    return seeds


def cmd_compare(resolved: dict, outdir: str) -> tuple[list[str], list[int]]:
    seeds = _parse_seeds(resolved["seeds"])
    sims = [s.strip() for s in str(resolved["sims"]).split(",") if s.strip()]
    policies = _policies(resolved)
    cfg = backtest.BacktestConfig(horizon=resolved["horizon"], stride=resolved["stride"],
                                  fee_rate=resolved["fee_rate"])
    rows = []
    for seed in seeds:
        series = generate_synthetic_series(
            seed=seed, n=resolved["n"], drift=resolved["drift"],
            volatility=resolved["volatility"], start_price=resolved["start_price"],
        )
        labels = features.make_labels(series, horizon=resolved["horizon"])
        ests = _scenario_estimates(series, labels, resolved)
        for sim in sims:
            preds = _simulate_predictions(labels, sim, seed, resolved)
            for res in backtest.compare_strategies(series, preds, ests, policies, cfg):
                rows.append({"model": sim, "seed": seed, "policy": res.policy.label,
                             **_report_dict(res.report)})

    written = []
    cpath = os.path.join(outdir, "comparison.csv")
    _write_comparison(rows, cpath)
    written.append(cpath)
    summary: dict = {}
    for row in rows:
        key = f"{row['model']}/{row['policy']}"
        summary.setdefault(key, []).append(row["sharpe"])
    means = {
        key: (None if any(v is None for v in vals) else float(np.mean(vals)))
        for key, vals in summary.items()
    }
    jpath = os.path.join(outdir, "summary.json")
    artifacts.write_json({"mean_sharpe": means, "seeds": seeds}, jpath)
    written.append(jpath)
    return written, seeds


def cmd_report(resolved: dict, outdir: str) -> tuple[list[str], list[int]]:
    _require(resolved, "report", "input", "predictions")
    series = _load_series(resolved["input"], resolved["symbol"])
    if not os.path.exists(resolved["predictions"]):
        raise FileNotFoundError(f"predictions file not found: {resolved['predictions']}")
    preds, ests = predictors.load_predictions(resolved["predictions"], series)
    labels = features.make_labels(series, horizon=resolved["horizon"])

    written = []
    cls = metrics.classification_report(preds, labels, threshold=resolved["threshold"])
    cls_dict = {
        "logloss": cls.logloss,
        "down": vars(cls.down).copy(),
        "up": vars(cls.up).copy(),
        "macro": {"precision": cls.macro_precision, "recall": cls.macro_recall,
                  "f1": cls.macro_f1},
        "weighted": {"precision": cls.weighted_precision, "recall": cls.weighted_recall,
                     "f1": cls.weighted_f1},
        "confusion": {"tn": cls.confusion[0], "fp": cls.confusion[1],
                      "fn": cls.confusion[2], "tp": cls.confusion[3]},
    }
    jpath = os.path.join(outdir, "classification.json")
    artifacts.write_json(cls_dict, jpath)
    written.append(jpath)
    cpath = os.path.join(outdir, "confusion.csv")
    with open(cpath, "w", newline="") as fh:
        fh.write("tn,fp,fn,tp\n")
        fh.write(",".join(str(x) for x in cls.confusion) + "\n")
    written.append(cpath)
    prpath = os.path.join(outdir, "pr_curve.csv")
    with open(prpath, "w", newline="") as fh:
        fh.write("threshold,precision,recall\n")
        for thr, prec, rec in metrics.precision_recall_points(preds, labels):
            fh.write(f"{thr!r},{prec!r},{rec!r}\n")
    written.append(prpath)

    if ests is not None:
        by_ts = {int(t): i for i, t in enumerate(labels.timestamps)}
        pred_change, actual_change = [], []
        for e in ests:
            i = by_ts.get(e.timestamp)
            if i is None:
                continue
            actual = float(labels.price_change[i])
            pred_change.append(e.a if labels.direction[i] > 0 else -e.b)
            actual_change.append(actual)
        reg = metrics.regression_report(pred_change, actual_change)
        rpath = os.path.join(outdir, "regression.json")
        artifacts.write_json({"mae": reg.mae, "mse": reg.mse, "rmse": reg.rmse,
                              "r2": reg.r2}, rpath)
        written.append(rpath)

    scenario_source = "file"
    if ests is None:
        ests = predictors.estimate_scenarios(series, horizon=resolved["horizon"],
                                             window=resolved["window"])
        scenario_source = "trailing_estimate"
    cfg = backtest.BacktestConfig(horizon=resolved["horizon"], stride=resolved["stride"],
                                  fee_rate=resolved["fee_rate"])
    policy = _policies(resolved)[0]
    curve, trades = backtest.run_backtest(series, preds, ests, policy, cfg)
    report = metrics.build_report(curve, trades)
    t5path = os.path.join(outdir, "report_table.csv")
    _write_table5([(resolved["strategy_name"], report)], t5path)
    written.append(t5path)
    jpath2 = os.path.join(outdir, "backtest_report.json")
    artifacts.write_json({**_report_dict(report), "scenario_source": scenario_source}, jpath2)
    written.append(jpath2)
    return written, []


def cmd_kelly_surface(resolved: dict, outdir: str) -> tuple[list[str], list[int]]:
    written = []
    if resolved["p"] is not None:
        p = float(resolved["p"])
        grid = [i / 200.0 for i in range(1, 41)]  # 0.005 .. 0.2
        path = os.path.join(outdir, "kelly_surface_ab.csv")
        with open(path, "w", newline="") as fh:
            fh.write("a,b,f_star\n")
            for a in grid:
                for b in grid:
                    fh.write(f"{a!r},{b!r},{sizing.kelly_fraction(p, a, b)!r}\n")
        written.append(path)
        return written, []

    p_grid = [i / 100.0 for i in range(1, 100)]
    b_grid = [float(10.0 ** e) for e in np.linspace(-2.0, 0.0, 41)]
    path = os.path.join(outdir, "kelly_surface_pb.csv")
    with open(path, "w", newline="") as fh:
        fh.write("p,b,f\n")
        for p in p_grid:
            for b in b_grid:
                # Classic odds form: unit gain (a = 1), loss proportion b.
                fh.write(f"{p!r},{b!r},{sizing.kelly_fraction(p, 1.0, b)!r}\n")
    written.append(path)
    ab_grid = [i / 20.0 for i in range(2, 21)]  # 0.1 .. 1.0
    path = os.path.join(outdir, "kelly_surface_pab.csv")
    with open(path, "w", newline="") as fh:
        fh.write("p,ab,f_star\n")
        for p in p_grid:
            for ab in ab_grid:
                fh.write(f"{p!r},{ab!r},{sizing.kelly_fraction(p, ab, ab)!r}\n")
    written.append(path)
    return written, []


_COMMANDS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "features": cmd_features,
    "label": cmd_label,
    "simulate": cmd_simulate,
    "backtest": cmd_backtest,
    "compare": cmd_compare,
    "report": cmd_report,
    "kelly-surface": cmd_kelly_surface,
}


def _error_record(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        resolved = _resolve(args.command, args)
        outdir = _outdir(resolved, args.command)
        written, seeds = _COMMANDS[args.command](resolved, outdir)
        inputs = [resolved[k] for k in ("input", "predictions", "grid")
                  if resolved.get(k) and os.path.exists(str(resolved[k]))]
        manifest = artifacts.write_manifest(outdir, args.command, resolved,
                                            inputs, seeds, written)
        print(json.dumps({"status": "ok", "outdir": outdir, "manifest": manifest}))
        return 0
    except _UsageError as exc:
        _error_record("usage", str(exc))
        return EXIT_USAGE
    except FileNotFoundError as exc:
        _error_record("missing_input", str(exc))
        return EXIT_MISSING_INPUT
    except DataError as exc:
        _error_record("data", str(exc))
        return EXIT_DATA
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        _error_record("config", str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
