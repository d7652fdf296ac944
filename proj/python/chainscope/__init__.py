"""Chain reachability, robustness and minimal-set analysis on cell grids."""

import json

from . import _core
from ._core import (
    CellSet,
    Error,
    System,
    cells_of_point,
    chain_reach,
    classify,
    fatten,
    forward_reach,
    hausdorff,
    lyapunov,
    minimal_sets,
    omega_limit,
    recurrent_components,
    robustness,
    set_threads,
    system,
    systems,
)

__version__ = _core.__version__


def run(command, config):
    """Run a tool command on a config (dict or JSON text).

    Returns (exit_code, report) where report is a dict, or the error
    message when the run produced no report.
    """
    text = config if isinstance(config, str) else json.dumps(config)
    code, out = _core.run(command, text)
    try:
        return code, json.loads(out)
    except ValueError:
        return code, out
