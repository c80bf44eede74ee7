"""Command-line entry point.

Subcommands: calibrate, search, sweep, montecarlo, knn. Every command is
deterministic under a fixed seed and configuration, never mutates its
inputs, and stamps output files with the resolved-config hash.

Exit codes: 0 success, 1 usage error, 2 infeasible calibration, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cam import ArrayState, parse_word, threshold_match_functional
from .config import RunConfig
from .datasets import DataError, ensure_dataset, load_dataset
from .knn import baseline_timing, evaluate_accuracy
from .metrics import monte_carlo_robustness, sweep
from .transient import (
    CalibrationError,
    calibrate_veval,
    simulate_search,
    threshold_match_transient,
    verify_calibration,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CALIBRATION = 2
EXIT_DATA = 3


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) or isinstance(value, np.floating):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list], cfg_hash: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={cfg_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict, cfg_hash: str) -> None:
    payload = {"_config_hash": cfg_hash, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_calibrate(cfg: RunConfig, args) -> int:
    updates: dict = {}
    if args.vdd is not None:
        updates = {"circuit": {"vdd": args.vdd}}
    cfg = cfg.with_updates(updates)
    thresholds = _parse_int_list(args.thresholds) if args.thresholds else range(6)
    try:
        circuit = cfg.build_circuit()
        table = calibrate_veval(thresholds, cfg.device, circuit, cfg.guard_band)
    except (CalibrationError, ValueError) as exc:
        print(f"calibration infeasible: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    report = verify_calibration(table, cfg.device, circuit, cfg.guard_band)
    cfg_hash = cfg.hash()
    _write_json(cfg.out_dir / "calibrate_table.json", table.to_dict(), cfg_hash)
    _write_csv(
        cfg.out_dir / "calibrate_report.csv",
        ["threshold", "v_eval_V", "ct_n_s", "ct_n1_s", "ok"],
        [
            [r["threshold"], r["v_eval"], r["ct_n_s"], r["ct_n1_s"], int(r["ok"])]
            for r in report
        ],
        cfg_hash,
    )
    bad = [r["threshold"] for r in report if not r["ok"]]
    if bad:
        print(f"guard-band replay failed at thresholds {bad}", file=sys.stderr)
        return EXIT_CALIBRATION
    for r in report:
        print(f"Th-{r['threshold']}: v_eval = {r['v_eval']:.4f} V")
    print(f"sense deadline = {table.sense_deadline:.4e} s")
    return EXIT_OK


def cmd_search(cfg: RunConfig, args) -> int:
    try:
        array = ArrayState.from_text(Path(args.array).read_text(), cfg.device)
        query = parse_word(args.query)
        if len(query) != array.wordlength:
            raise ValueError(
                f"query length {len(query)} != wordlength {array.wordlength}"
            )
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_DATA
    threshold = args.threshold
    cfg = cfg.with_updates(
        {"array": {"rows": array.rows, "wordlength": array.wordlength}}
    )
    try:
        circuit = cfg.build_circuit(wordlength=array.wordlength)
        if threshold < array.wordlength:
            table = calibrate_veval([threshold], cfg.device, circuit, cfg.guard_band)
        else:
            table = None
        functional = threshold_match_functional(array, query, threshold)
        if table is not None:
            transient = threshold_match_transient(
                array, query, threshold, table, circuit
            )
        else:
            transient = set(range(array.rows))
    except CalibrationError as exc:
        print(f"calibration infeasible: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    agree = functional == transient
    cfg_hash = cfg.hash()
    _write_json(
        cfg.out_dir / "search_result.json",
        {
            "threshold": threshold,
            "functional": sorted(functional),
            "transient": sorted(transient),
            "agree": agree,
        },
        cfg_hash,
    )
    if args.traces and table is not None:
        duration = 3.0 * circuit.sense_window
        for i in range(array.rows):
            trace = simulate_search(
                array.row_states(i), query, table[threshold],
                cfg.device, circuit, duration,
                cell_cards=(
                    array.cell_params[i] if array.cell_params is not None else None
                ),
            )
            trace.to_csv(cfg.out_dir / f"search_trace_row{i}.csv")
    print(f"functional: {sorted(functional)}")
    print(f"transient:  {sorted(transient)}")
    if not agree:
        print("WARNING: tiers disagree", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        print(f"bad --values: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not values:
        print("bad --values: empty", file=sys.stderr)
        return EXIT_USAGE
    from .metrics import SweepBase

    base = SweepBase(
        rows=cfg.rows,
        wordlength=cfg.wordlength,
        vdd=cfg.vdd,
        threshold=cfg.threshold,
        avg_mismatch_fraction=cfg.avg_mismatch_fraction,
        e_sa_const=cfg.e_sa_const,
        guard_band=cfg.guard_band,
        params=cfg.device,
        circuit_overrides=cfg.circuit_overrides,
    )
    rows = sweep(args.param, values, base)
    cfg_hash = cfg.hash()
    _write_csv(
        cfg.out_dir / f"sweep_{args.param}.csv",
        ["value", "energy_J", "latency_s", "margin_V"],
        [[r.value, r.energy, r.latency, r.margin] for r in rows],
        cfg_hash,
    )
    failed = [r.value for r in rows if not r.ok]
    if failed:
        print(f"failed sweep points: {failed}", file=sys.stderr)
    print(f"wrote {len(rows)} rows ({len(failed)} failed)")
    return EXIT_OK


def cmd_montecarlo(cfg: RunConfig, args) -> int:
    updates: dict = {"search": {"threshold": args.threshold}}
    if args.vdd is not None:
        updates["circuit"] = {"vdd": args.vdd}
    cfg = cfg.with_updates(updates)
    try:
        report = monte_carlo_robustness(
            cfg.threshold,
            args.runs,
            cfg.variation,
            cfg.vdd,
            wordlength=cfg.wordlength,
            params=cfg.device,
            guard_band=cfg.guard_band,
            circuit_overrides=cfg.circuit_overrides,
            threads=cfg.threads,
        )
    except CalibrationError as exc:
        print(f"calibration infeasible: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    cfg_hash = cfg.hash()
    tag = f"th{report.threshold}_vdd{report.vdd:g}"
    _write_csv(
        cfg.out_dir / f"montecarlo_{tag}.csv",
        ["run", "ct_n_s", "ct_n1_s"],
        [
            [i, a, b]
            for i, (a, b) in enumerate(
                zip(report.crossing_times_at_n, report.crossing_times_at_n_plus_1)
            )
        ],
        cfg_hash,
    )
    _write_json(cfg.out_dir / f"montecarlo_{tag}_summary.json", report.to_dict(), cfg_hash)
    print(f"separable = {report.separable}")
    return EXIT_OK


def cmd_knn(cfg: RunConfig, args) -> int:
    if args.thresholds:
        cfg = cfg.with_updates(
            {"knn": {"threshold_schedule": _parse_int_list(args.thresholds)}}
        )
    try:
        if args.dataset:
            ds = load_dataset(args.dataset, name=args.name)
        else:
            path = ensure_dataset(args.name or "iris", cfg.out_dir / "data")
            ds = load_dataset(path, name=args.name or "iris")
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    kcfg = cfg.knn
    try:
        if args.matcher == "transient":
            from .knn import default_levels

            levels = kcfg.levels or default_levels(ds.f)
            circuit = cfg.build_circuit(wordlength=ds.f * levels)
            table = calibrate_veval(
                kcfg.threshold_schedule, cfg.device, circuit, cfg.guard_band
            )
            rows, audit = evaluate_accuracy(
                ds, kcfg, "transient",
                params=cfg.device, table=table, circuit=circuit,
                collect_audit=args.audit,
            )
        else:
            rows, audit = evaluate_accuracy(
                ds, kcfg, "functional", params=cfg.device, collect_audit=args.audit
            )
    except CalibrationError as exc:
        print(f"calibration infeasible: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    cfg_hash = cfg.hash()
    _write_csv(
        cfg.out_dir / f"knn_{ds.name}.csv",
        ["threshold", "accuracy", "mean_matched"],
        [[r["threshold"], r["accuracy"], r["mean_matched_count"]] for r in rows],
        cfg_hash,
    )
    if args.audit:
        _write_json(cfg.out_dir / f"knn_{ds.name}_audit.json", {"queries": audit}, cfg_hash)
    if args.baseline:
        # wall-clock numbers go to stdout only; output files stay reproducible
        timing = baseline_timing(ds, kcfg, threshold=kcfg.threshold_schedule[0])
        print(
            f"baseline: {timing['queries']} queries, threshold matcher "
            f"{timing['threshold_matcher_s']:.4f} s, software scan "
            f"{timing['software_knn_s']:.4f} s"
        )
    for r in rows:
        print(
            f"Th-{r['threshold']}: accuracy = {r['accuracy']:.4f}, "
            f"mean matched = {r['mean_matched_count']:.2f}"
        )
    return EXIT_OK


def _parse_int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcamsim",
        description="Ternary CAM simulator with tunable Hamming-threshold matching",
    )
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, help="global seed override")
    parser.add_argument("--threads", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="calibrate evaluation voltages")
    p.add_argument("--vdd", type=float)
    p.add_argument("--thresholds", help="comma-separated thresholds (default 0..5)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("search", help="match a query against a stored array")
    p.add_argument("--array", required=True, help="array text file (rows of 0/1/X)")
    p.add_argument("--query", required=True, help="query word (0/1/X)")
    p.add_argument("--threshold", type=int, required=True)
    p.add_argument("--traces", action="store_true", help="export per-row transients")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sweep", help="energy/latency/margin parameter sweep")
    p.add_argument(
        "--param", required=True, choices=["vdd", "threshold", "rows", "wordlength"]
    )
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("montecarlo", help="device-variation robustness study")
    p.add_argument("--threshold", type=int, default=5)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--vdd", type=float)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("knn", help="dataset classification accuracy per threshold")
    p.add_argument("--dataset", help="dataset CSV (default: bundled --name corpus)")
    p.add_argument("--name", help="declared dataset name for shape checks")
    p.add_argument("--thresholds", help="comma-separated threshold schedule")
    p.add_argument("--matcher", choices=["functional", "transient"], default="functional")
    p.add_argument("--audit", action="store_true", help="write per-query audit JSON")
    p.add_argument("--baseline", action="store_true", help="time the software scan")
    p.set_defaults(func=cmd_knn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        cfg = RunConfig.load(
            args.config, seed=args.seed, out_dir=args.out, threads=args.threads
        )
    except (OSError, ValueError, TypeError) as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return args.func(cfg, args)


if __name__ == "__main__":
    sys.exit(main())
