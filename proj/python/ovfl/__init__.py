"""OVFL platoon model bindings."""

import json

from . import _core
from ._core import (
    DomainError,
    OvflError,
    ParseError,
    ValidationError,
    dH_dt,
    hamiltonian,
    ov_inverse,
    ov_slope,
    ov_value,
    potential,
    presets,
    vector_field,
    x_infinity,
)

__version__ = _core.__version__


def energy_budget(x1, y1, alpha, beta, vbar):
    return json.loads(_core.energy_budget(x1, y1, alpha, beta, vbar))


def _scenario_arg(scenario):
    return scenario if isinstance(scenario, str) else json.dumps(scenario)


def simulate(scenario):
    """Run a preset name, scenario JSON text or scenario dict.

    Returns a dict with scenario, events, monitors, budget, convergence,
    barrier and csv (the time series in the CLI's CSV format).
    """
    return json.loads(_core.simulate(_scenario_arg(scenario)))


def analyze(csv, scenario):
    return json.loads(_core.analyze(csv, _scenario_arg(scenario)))


def sweep(scenario, alpha, beta, out, samples=0, seed=0):
    return json.loads(_core.sweep(_scenario_arg(scenario), list(alpha), list(beta), samples, seed, str(out)))
