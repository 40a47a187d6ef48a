"""Command-line front end: dataset analysis, simulation, and method comparison.

Three verbs:

``analyze``
    Read a long-format CSV, run the full pipeline, and write the report,
    summary, and plot-data files.
``simulate``
    Generate a synthetic corpus with known propagation structure and write
    it as a CSV (consumable by ``analyze``) plus its injection schedule.
``experiment``
    Run the seeded method comparison (state-aligned vs raw-value alignment)
    and write classification-error curves and causality-index samples.

Exit codes: 0 on success, 1 for input or configuration errors, 2 for
internal numerical errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import PipelineConfig
from .errors import (
    ConfigError,
    ContractViolation,
    MissingLabels,
    ParseError,
    SegmentTooShort,
    SpecInvalid,
    StateAlignError,
)
from .pipeline import _round6, _write_csv, _write_text, emit_outputs, ingest_csv, run_pipeline
from .simulate import SimSpec, generate_dataset, run_experiment

__all__ = ["main"]

_INPUT_ERRORS = (
    ConfigError,
    SpecInvalid,
    ParseError,
    ContractViolation,
    MissingLabels,
    SegmentTooShort,
    OSError,
    json.JSONDecodeError,
)


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as input errors."""

    def error(self, message):
        raise ConfigError(message)


def _load_mapping(path: str, what: str, err: type[StateAlignError]) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise err(f"{what} file {path!r} must hold a JSON object")
    return data


def _cmd_analyze(args: argparse.Namespace) -> int:
    config = (
        PipelineConfig.from_mapping(_load_mapping(args.config, "config", ConfigError))
        if args.config
        else PipelineConfig()
    )
    segments = ingest_csv(args.input, window=config.window)
    report = run_pipeline(config, segments)
    for path in emit_outputs(report, args.out):
        print(f"wrote {path}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = (
        SimSpec.from_mapping(_load_mapping(args.spec, "spec", SpecInvalid))
        if args.spec
        else SimSpec()
    )
    dataset = generate_dataset(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # Values are written with full round-trip precision: this file is input
    # data for `analyze`, not report output, so the 6-digit rule does not
    # apply to it.
    dataset_path = out / "dataset.csv"
    lines = ["timestamp,series_id,value,group_label"]
    for seg in dataset.segments:
        label = seg.meta.group_label or ""
        for ts, val in zip(seg.timestamps, seg.values):
            lines.append(f"{int(ts)},{seg.series_id},{float(val)!r},{label}")
    _write_text(dataset_path, "\n".join(lines) + "\n")
    print(f"wrote {dataset_path}")

    schedule_path = out / "schedule.csv"
    _write_text(
        schedule_path,
        "\n".join(
            [
                "series_id,group_label,onset,lag,intensity,pulse_count,"
                "pulse_spacing,kept_cells,scale_factor",
                *(
                    f"{r.series_id},{r.group_label},{r.onset},{r.lag},"
                    f"{r.intensity!r},{r.pulse_count},{r.pulse_spacing},"
                    f"{';'.join(str(c) for c in r.kept_cells)},{r.scale_factor!r}"
                    for r in dataset.schedule
                ),
            ]
        )
        + "\n",
    )
    print(f"wrote {schedule_path}")

    spec_path = out / "spec.json"
    _write_text(spec_path, json.dumps(spec.to_mapping(), sort_keys=True, indent=2) + "\n")
    print(f"wrote {spec_path}")
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    spec = (
        SimSpec.from_mapping(_load_mapping(args.spec, "spec", SpecInvalid))
        if args.spec
        else SimSpec()
    )
    config = (
        PipelineConfig.from_mapping(_load_mapping(args.config, "config", ConfigError))
        if args.config
        else PipelineConfig()
    )
    m_values = tuple(args.m_max)
    result = run_experiment(spec, config, m_max_values=m_values, n_seeds=args.seeds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    payload = {
        "spec": spec.to_mapping(),
        "config": config.to_mapping(),
        "n_seeds": args.seeds,
        "m_max_values": list(m_values),
        "classification_error": [
            {"method": method, "m_max": m, "error": err}
            for (method, m), err in sorted(result.classification_error.items())
        ],
        "dci_samples": [
            {"method": method, "mode": mode, "samples": list(samples)}
            for (method, mode), samples in sorted(result.dci_samples.items())
        ],
        "runtime_ms": dict(sorted(result.runtime_ms.items())),
    }
    json_path = out / "experiment.json"
    _write_text(
        json_path, json.dumps(_round6(payload), sort_keys=True, indent=2) + "\n"
    )
    print(f"wrote {json_path}")

    curve_path = out / "error_vs_m_max.csv"
    _write_csv(
        curve_path,
        ["method", "m_max", "classification_error"],
        [
            [method, m, err]
            for (method, m), err in sorted(result.classification_error.items())
        ],
    )
    print(f"wrote {curve_path}")

    samples_path = out / "dci_samples.csv"
    _write_csv(
        samples_path,
        ["method", "mode", "dci"],
        [
            [method, mode, value]
            for (method, mode), samples in sorted(result.dci_samples.items())
            for value in samples
        ],
    )
    print(f"wrote {samples_path}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="statealign",
        description=(
            "Root-cause analysis over co-anomalous time series: state "
            "discretization, shift-augmented alignment, clustering, ranking."
        ),
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    analyze = sub.add_parser(
        "analyze", help="run the full pipeline over a CSV of series"
    )
    analyze.add_argument("--input", required=True, help="long-format input CSV")
    analyze.add_argument("--out", required=True, help="output directory")
    analyze.add_argument("--config", help="pipeline config JSON (optional)")
    analyze.set_defaults(func=_cmd_analyze)

    simulate = sub.add_parser(
        "simulate", help="generate a synthetic corpus with known structure"
    )
    simulate.add_argument("--out", required=True, help="output directory")
    simulate.add_argument("--spec", help="simulation spec JSON (optional)")
    simulate.set_defaults(func=_cmd_simulate)

    experiment = sub.add_parser(
        "experiment", help="compare alignment methods over seeded replicates"
    )
    experiment.add_argument("--out", required=True, help="output directory")
    experiment.add_argument("--spec", help="simulation spec JSON (optional)")
    experiment.add_argument("--config", help="pipeline config JSON (optional)")
    experiment.add_argument(
        "--seeds", type=int, default=5, help="number of seeded replicates (default 5)"
    )
    experiment.add_argument(
        "--m-max",
        dest="m_max",
        type=int,
        nargs="+",
        default=[5, 6, 7, 8],
        help="cluster budgets to sweep (default: 5 6 7 8)",
    )
    experiment.set_defaults(func=_cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 — map anything else to the internal code
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
