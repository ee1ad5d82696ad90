"""Command-line front end.

Subcommands:
  run    execute the online loop on a data file or a synthetic stream
  synth  generate a synthetic stream file
  eval   score a saved genome against a data file

Settings for ``run`` resolve in order: built-in defaults, then a key=value
config file (--config), then explicit flags. Every run writes a manifest
echoing the fully resolved settings, so a run is reconstructible from its
manifest alone.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from neatstream.data import (
    SynthConfig,
    load_stream,
    normalize_stream,
    synthesize,
    write_stream,
)
from neatstream.errors import ConfigError, NeatStreamError
from neatstream.evolution import EvolutionConfig
from neatstream.fitness import FitnessKind, FitnessSpec
from neatstream.genome import load_genome, save_genome
from neatstream.stream import (
    MODES,
    StreamConfig,
    TimeWindow,
    execute_run,
    write_reports,
)
from neatstream.fitness import evaluate_metrics


def _sharpness(text: str):
    return None if text.lower() == "none" else float(text)


def _optional_int(text: str):
    return None if text.lower() == "none" else int(text)


# name -> (default, parser); also the manifest key set for `run`
RUN_SETTINGS = {
    "data": (None, str),
    "synth": (None, int),
    "synth_features": (8, int),
    "positive_fraction": (0.75, float),
    "drift_at": (None, _optional_int),
    "drift_kind": ("label_flip", str),
    "boundary_sharpness": (10.0, _sharpness),
    "window_size": (500, int),
    "fitness": ("acc", str),
    "alpha": (1e-6, float),
    "beta": (0.0, float),
    "seed": (0, int),
    "mode": ("online", str),
    "population_size": (200, int),
    "distance_threshold": (3.0, float),
    "survival_fraction": (0.2, float),
    "elitism": (1, int),
    "stagnation_limit": (15, int),
    "interspecies_mating_prob": (0.001, float),
    "crossover_prob": (0.75, float),
    "max_generations": (50, int),
    "plateau_generations": (10, int),
    "plateau_epsilon": (1e-6, float),
}


@dataclass
class RunConfig:
    data: str | None
    synth: SynthConfig | None
    stream: StreamConfig
    mode: str
    out: str
    settings: dict


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in RUN_SETTINGS:
            raise ConfigError(f"{path}:{lineno}: unknown setting {key!r}")
        _, parser = RUN_SETTINGS[key]
        try:
            values[key] = parser(value.strip())
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}") from None
    return values


def _resolve_run_config(args) -> RunConfig:
    settings = {key: default for key, (default, _) in RUN_SETTINGS.items()}
    if args.config:
        settings.update(_read_config_file(args.config))
    for key in RUN_SETTINGS:
        flag_value = getattr(args, key)
        if flag_value is not None:
            settings[key] = flag_value

    if (settings["data"] is None) == (settings["synth"] is None):
        raise ConfigError("exactly one of --data or --synth is required")
    if settings["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    try:
        kind = FitnessKind(settings["fitness"])
    except ValueError:
        raise ConfigError(
            f"fitness must be one of acc|pan|pro|pap, got {settings['fitness']!r}"
        ) from None
    spec = FitnessSpec(kind=kind, alpha=settings["alpha"], beta=settings["beta"])
    evolution = EvolutionConfig(
        population_size=settings["population_size"],
        distance_threshold=settings["distance_threshold"],
        survival_fraction=settings["survival_fraction"],
        elitism=settings["elitism"],
        stagnation_limit=settings["stagnation_limit"],
        interspecies_mating_prob=settings["interspecies_mating_prob"],
        crossover_prob=settings["crossover_prob"],
        max_generations_per_window=settings["max_generations"],
        plateau_generations=settings["plateau_generations"],
        plateau_epsilon=settings["plateau_epsilon"],
    )
    stream_cfg = StreamConfig(
        window_size=settings["window_size"],
        fitness_spec=spec,
        evolution=evolution,
        seed=settings["seed"],
    )
    synth_cfg = None
    if settings["synth"] is not None:
        synth_cfg = SynthConfig(
            n_records=settings["synth"],
            n_features=settings["synth_features"],
            positive_fraction=settings["positive_fraction"],
            drift_at=settings["drift_at"],
            drift_kind=settings["drift_kind"],
            boundary_sharpness=settings["boundary_sharpness"],
            seed=settings["seed"],
        )
        synth_cfg.validate()
    return RunConfig(
        data=settings["data"],
        synth=synth_cfg,
        stream=stream_cfg,
        mode=settings["mode"],
        out=args.out,
        settings=settings,
    )


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_manifest(path: Path, command: str, settings: dict) -> None:
    lines = [f"command={command}"]
    lines += [f"{key}={_format_value(settings[key])}" for key in sorted(settings)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_run(args) -> int:
    config = _resolve_run_config(args)
    if config.data is not None:
        records = load_stream(config.data)
    else:
        records = synthesize(config.synth)
    records = normalize_stream(records)
    result = execute_run(records, config.stream, config.mode)

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_reports(result.reports, out_dir)
    save_genome(result.champion, out_dir / "champion.genome")
    _write_manifest(out_dir / "manifest.txt", "run", config.settings)
    print(f"{len(result.reports)} windows -> {out_dir}")
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        n_records=args.n,
        n_features=args.features,
        positive_fraction=args.positive_fraction,
        drift_at=args.drift_at,
        drift_kind=args.drift_kind,
        boundary_sharpness=args.boundary_sharpness,
        seed=args.seed,
    )
    cfg.validate()
    records = synthesize(cfg)
    write_stream(records, args.out)
    manifest = {
        "n_records": cfg.n_records,
        "n_features": cfg.n_features,
        "positive_fraction": cfg.positive_fraction,
        "drift_at": cfg.drift_at,
        "drift_kind": cfg.drift_kind,
        "boundary_sharpness": cfg.boundary_sharpness,
        "seed": cfg.seed,
    }
    _write_manifest(Path(str(args.out) + ".manifest"), "synth", manifest)
    print(f"wrote {len(records)} records -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    genome = load_genome(args.genome)
    records = normalize_stream(load_stream(args.data))
    window = TimeWindow(index=0, records=tuple(records))
    metrics = evaluate_metrics(genome, window, args.threshold)
    print(f"accuracy {metrics.accuracy!r}")
    print(f"recall {metrics.recall!r}")
    print(f"specificity {metrics.specificity!r}")
    print(f"profit {metrics.profit!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neatstream",
        description="Online neuroevolution over a time-ordered record stream.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the online loop and write reports")
    run.add_argument("--config", help="key=value settings file")
    run.add_argument("--out", required=True, help="output directory")
    for key, (_, parser_fn) in RUN_SETTINGS.items():
        flag = "--" + key.replace("_", "-")
        run.add_argument(flag, dest=key, type=parser_fn, default=None)
    run.set_defaults(func=cmd_run)

    synth = sub.add_parser("synth", help="generate a synthetic stream file")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--features", type=int, default=8)
    synth.add_argument("--positive-fraction", type=float, default=0.75)
    synth.add_argument("--drift-at", type=_optional_int, default=None)
    synth.add_argument("--drift-kind", default="label_flip")
    synth.add_argument("--boundary-sharpness", type=_sharpness, default=10.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    evalp = sub.add_parser("eval", help="evaluate a saved genome on a data file")
    evalp.add_argument("--genome", required=True)
    evalp.add_argument("--data", required=True)
    evalp.add_argument("--threshold", type=float, default=0.5)
    evalp.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NeatStreamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
