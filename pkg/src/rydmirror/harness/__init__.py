"""
Module: rydmirror.harness
-------------------------
Configuration, experiment orchestration, persistence and figure-data
reproduction behind the `rydmirror` command.

Submodules
----------
- `harness_types`:
    ExperimentConfig and ResultSet, config validation and hashing
- `constants`:
    The versioned constants file and the fits of the scaling constants
- `results`:
    CSV tables with JSON sidecars
- `experiments`:
    One runner per experiment kind and the `run_experiment` dispatcher
- `presets`:
    Named, versioned figure-dataset bundles
- `cli`:
    The argparse command line
"""

from .cli import build_parser, main
from .constants import (CONSTANTS_ENV, FIT_MODELS, ConstantEntry,
                        ConstantFit, constant_value, fit_constants,
                        load_constants, save_constants, store_fit)
from .experiments import (experiment_detuning, experiment_geometry,
                          run_experiment)
from .harness_types import (EXPERIMENTS, ExperimentConfig, ResultSet,
                            canonical_json, config_hash, config_to_dict,
                            make_experiment_config, make_result_set)
from .presets import PRESETS, preset_configs, preset_names
from .results import (code_version, read_result_set, result_columns,
                      write_result_set)

__all__: list[str] = [
    "build_parser",
    "main",
    "CONSTANTS_ENV",
    "FIT_MODELS",
    "ConstantEntry",
    "ConstantFit",
    "constant_value",
    "fit_constants",
    "load_constants",
    "save_constants",
    "store_fit",
    "experiment_detuning",
    "experiment_geometry",
    "run_experiment",
    "EXPERIMENTS",
    "ExperimentConfig",
    "ResultSet",
    "canonical_json",
    "config_hash",
    "config_to_dict",
    "make_experiment_config",
    "make_result_set",
    "PRESETS",
    "preset_configs",
    "preset_names",
    "code_version",
    "read_result_set",
    "result_columns",
    "write_result_set",
]
