"""
Module: harness.cli
-------------------
The `rydmirror` command.

    rydmirror <experiment> [--config FILE] [common flags]
    rydmirror fit-constants --dataset FILE.csv --model {C_R,C_s,C,C_eps} [--store FILE]
    rydmirror preset {fig2,fig3,...} [common flags]
    rydmirror preset --list

Common flags: --config, --output-dir, --seed, --workers, --constants,
--log-level, --quiet. The config file may omit `experiment`; the
subcommand fills it in.

Exit status is 0 when every row passed its residual check, 1 when any row
failed, and 2 for an invalid configuration or missing input.

Functions
---------
- `build_parser`:
    The argparse parser with every subcommand
- `main`:
    Entry point of the console script
"""

import argparse
import json
import sys
from pathlib import Path

from beartype.typing import Any, Dict, List, Optional, Sequence

from rydmirror.errors import ConfigurationError
from rydmirror.tools import configure_logging, get_logger

from .constants import FIT_MODELS, fit_constants, store_fit
from .experiments import run_experiment
from .harness_types import EXPERIMENTS, make_experiment_config
from .presets import PRESETS, preset_configs, preset_names
from .results import read_result_set, result_columns

logger = get_logger(__name__)

EXIT_OK: int = 0
EXIT_FAILED_ROWS: int = 1
EXIT_BAD_CONFIG: int = 2


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment config")
    common.add_argument("--output-dir", type=Path, help="directory for the CSV and JSON outputs")
    common.add_argument("--seed", type=int, help="seed of every random stream")
    common.add_argument("--workers", type=int, help="worker threads over sweep points")
    common.add_argument(
        "--constants", type=Path, help="constants file (default: $RYDMIRROR_CONSTANTS, then packaged)"
    )
    common.add_argument("--log-level", default="INFO", help="logging level (default: INFO)")
    common.add_argument("--quiet", action="store_true", help="hide progress bars")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="rydmirror",
        description="Sub-wavelength atomic mirrors with Rydberg blockade.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        commands.add_parser(name, parents=[common], help=f"run a {name} experiment")

    fit = commands.add_parser(
        "fit-constants", parents=[common], help="fit a scaling constant to a result CSV"
    )
    fit.add_argument("--dataset", type=Path, required=True, help="result CSV with its sidecar")
    fit.add_argument("--model", choices=FIT_MODELS, required=True)
    fit.add_argument(
        "--store", type=Path, help="constants file to record the fitted value in"
    )

    preset = commands.add_parser("preset", parents=[common], help="run a figure preset")
    preset.add_argument("name", nargs="?", choices=preset_names())
    preset.add_argument("--list", action="store_true", help="list the presets and exit")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.output_dir is not None:
        overrides["output"] = {"directory": str(args.output_dir)}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.constants is not None:
        overrides["constants"] = str(args.constants)
    return overrides


def _read_document(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as err:
        raise ConfigurationError(f"config file not found: {path}") from err
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"config file {path} is not valid JSON: {err}") from err
    if not isinstance(document, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return document


def _run_experiments(configs: Sequence, progress: bool) -> int:
    status = EXIT_OK
    for config in configs:
        result = run_experiment(config, write=True, progress=progress)
        if not result.ok:
            status = EXIT_FAILED_ROWS
    return status


def _fit(args: argparse.Namespace) -> int:
    result = read_result_set(args.dataset)
    geometry = result.config.get("geometry", {})
    n_side, d = geometry.get("n_side"), geometry.get("d")
    fit = fit_constants(
        result_columns(result),
        args.model,
        n_side=None if n_side is None else int(n_side),
        d=None if d is None else float(d),
    )
    print(
        json.dumps(
            {
                "name": fit.name,
                "value": fit.value,
                "stderr": fit.stderr,
                "rmse": fit.rmse,
                "max_relative_error": fit.max_relative_error,
                "n_points": fit.n_points,
                "ill_conditioned": fit.ill_conditioned,
            },
            sort_keys=True,
        )
    )
    if args.store is not None:
        store_fit(fit, args.store, f"fit to {args.dataset.name} (config {result.config_hash[:12]})")
    return EXIT_FAILED_ROWS if fit.ill_conditioned else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Description
    -----------
    Parse the command line, run the requested experiments and report the
    exit status.

    Parameters
    ----------
    - `argv` (List[str], optional):
        Arguments without the program name. Default is sys.argv[1:].

    Returns
    -------
    - `status` (int):
        0 on success, 1 when a row failed its residual check or a fit is
        ill-conditioned, 2 for invalid input
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    progress = not args.quiet
    try:
        if args.command == "fit-constants":
            return _fit(args)
        overrides = _overrides(args)
        if args.command == "preset":
            if args.list or args.name is None:
                for name in preset_names():
                    print(f"{name}\tv{PRESETS[name]['version']}\t{PRESETS[name]['description']}")
                return EXIT_OK
            if args.config is not None:
                raise ConfigurationError("presets carry their own configs; drop --config")
            return _run_experiments(preset_configs(args.name, overrides), progress)
        document = _read_document(args.config)
        if document.setdefault("experiment", args.command) != args.command:
            raise ConfigurationError(
                f"config is a {document['experiment']!r} experiment, not {args.command!r}"
            )
        config = make_experiment_config(document, overrides)
        return _run_experiments([config], progress)
    except (ConfigurationError, FileNotFoundError) as err:
        logger.error("%s", err)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
