"""
Module: harness.presets
-----------------------
Named, versioned bundles of experiment configs that regenerate the
published figure datasets with one command. Sizes are the desk-scale
versions: N = 41 arrays for the linear optics and the switch, N = 10 for
the photon correlations and 4 × 4 for the exact strong-drive solves.

Bumping a preset's version changes the output file names, so datasets
of different versions never overwrite each other.

Functions
---------
- `preset_names`:
    Names of the available presets
- `preset_configs`:
    Validated configs of a preset
"""

import math

from beartype import beartype
from beartype.typing import Any, Dict, List, Mapping, Optional

from rydmirror.errors import ConfigurationError

from .harness_types import ExperimentConfig, make_experiment_config

_D = 0.5
_ROOT2 = math.sqrt(2.0)
_ROOT5 = math.sqrt(5.0)

_SWITCH_RADII = [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]
_STRONG_DRIVE_OMEGAS = [0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0]
_FIG4 = {
    "geometry": {"n_side": 4, "d": _D},
    "drive": {"waist": 0.4 * 4 * _D},
    "sweep": {
        "radii": [0.0, _D, _ROOT2 * _D, 2 * _D, _ROOT5 * _D, 3 * _D],
        "omegas": _STRONG_DRIVE_OMEGAS,
    },
}

PRESETS: Dict[str, Dict[str, Any]] = {
    "fig2": {
        "version": 1,
        "description": "g2 of the reflected light against R_b^2/w0^2",
        "configs": [
            {
                "experiment": "g2-sweep",
                "geometry": {"n_side": 10, "d": _D},
                "drive": {"waist": 0.35 * 10 * _D},
                "sweep": {"radii": [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5]},
            }
        ],
    },
    "fig3": {
        "version": 1,
        "description": "optimal waists and switch error against R_b",
        "configs": [
            {
                "experiment": "switch-optimize",
                "geometry": {"n_side": 41, "d": _D},
                "solver": {"mode": "full"},
                "sweep": {"radii": _SWITCH_RADII},
            }
        ],
    },
    "fig4": {
        "version": 1,
        "description": "exact and stochastic R, K against the drive strength",
        "configs": [
            {"experiment": "strong-drive", **_FIG4},
            {"experiment": "stochastic-mirror", **_FIG4},
        ],
    },
    "figA1": {
        "version": 1,
        "description": "normalized dressing potentials against r/R_b",
        "configs": [
            {
                "experiment": "dressing-potential",
                "sweep": {"r_over_rb": [round(0.05 * i, 2) for i in range(61)]},
            }
        ],
    },
    "figC2": {
        "version": 1,
        "description": "finite-mirror reflectance and centered-hole transmission",
        "configs": [
            {
                "experiment": "reflectance-sweep",
                "geometry": {"n_side": 41, "d": _D},
                "sweep": {"waists": [1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0]},
            },
            {
                "experiment": "hole-scan",
                "geometry": {"n_side": 41, "d": _D},
                "drive": {"waist": 5 * _D},
                "sweep": {"radii": [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]},
            },
        ],
    },
    "figC5": {
        "version": 1,
        "description": "laboratory parameters and the switch error at finite V",
        "configs": [
            {
                "experiment": "physical-params",
                "sweep": {
                    "principal_numbers": [40, 50, 60, 70, 80, 90, 100],
                    "detunings": [1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
                },
            },
            {
                "experiment": "switch-optimize",
                "geometry": {"n_side": 41, "d": _D},
                "sweep": {"radii": _SWITCH_RADII, "interactions": [5.0, 10.0, 20.0, 40.0, 100.0]},
            },
        ],
    },
    "figD": {
        "version": 1,
        "description": "largest sampled and exact loss against the inverse number of regions",
        "configs": [
            {
                "experiment": "kmax-collapse",
                "solver": {"n_samples": 2000},
                "sweep": {
                    "cases": [
                        [10, _D, w0, r_b] for w0 in (1.0, 1.5, 2.0) for r_b in (0.5, 1.0, 1.5)
                    ]
                    + [[3, _D, 0.6, 0.5], [3, _D, 0.6, 0.75], [4, _D, 0.8, 1.0]],
                    "omegas": [0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.6, 0.8, 1.2, 2.0],
                },
            }
        ],
    },
}


def preset_names() -> List[str]:
    return sorted(PRESETS)


@beartype
def preset_configs(
    name: str,
    overrides: Optional[Mapping[str, Any]] = None,
) -> List[ExperimentConfig]:
    """
    Description
    -----------
    Resolve every config of a preset. Outputs are named
    `<preset>-v<version>-<experiment>` unless the overrides name them.

    Parameters
    ----------
    - `name` (str):
        Preset name
    - `overrides` (Mapping[str, Any], optional):
        Values applied to every config, such as seed or output directory

    Raises
    ------
    - ConfigurationError:
        For an unknown preset
    """
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; have {preset_names()}")
    preset = PRESETS[name]
    configs = []
    for document in preset["configs"]:
        labelled = dict(document)
        labelled["output"] = {"name": f"{name}-v{preset['version']}-{document['experiment']}"}
        configs.append(make_experiment_config(labelled, overrides))
    return configs
