"""Two-mode Kerr cavity QED in the rotated frame.

Amplitude vectors are indexed (atom, m1, m2) with the atom slowest,
atom 0 = excited. Times are in units of 1/lambda1.
"""
import json

from ._core import (
    KerrqedError,
    RawParams,
    TransformedParams,
    atomic_inversion,
    balanced_lambda,
    block_u,
    cnot_kerr,
    concurrence_general,
    concurrence_x,
    decoupled_params,
    detect_sudden_death,
    evolve_pure,
    four_level_rho,
    gate_return_probabilities,
    linear_entropy_atom,
    oracle_evolve,
    revival_time_formula,
    sudden_death_formula,
    transform_params,
)
from . import _core


def run_scenario(config, threads=1):
    """Run a scenario dict. Returns (series, report).

    series[engine][observable] is a (times, values) pair of arrays.
    """
    series, report = _core._run_scenario(json.dumps(config), threads)
    return series, json.loads(report)


def compare(config, threads=1):
    return json.loads(_core._compare(json.dumps(config), threads))


def figure_preset(n):
    return [json.loads(c) for c in _core._figure_preset(n)]


__all__ = [
    "KerrqedError", "RawParams", "TransformedParams", "atomic_inversion", "balanced_lambda",
    "block_u", "cnot_kerr", "compare", "concurrence_general", "concurrence_x", "decoupled_params",
    "detect_sudden_death", "evolve_pure", "figure_preset", "four_level_rho",
    "gate_return_probabilities", "linear_entropy_atom", "oracle_evolve", "revival_time_formula",
    "run_scenario", "sudden_death_formula", "transform_params",
]
