"""File formats: phase-map JSON, matrix/trend/sweep CSV, config provenance.

All writers are deterministic (sorted JSON keys, fixed float formatting, no
timestamps), so reruns of an identical configuration produce byte-identical
files regardless of worker count.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__
from .lattice import Mode, enumerate_modes
from .search import SearchResult
from .walk import PhaseMap

FLOAT_FMT = "{:.11e}"  # 12 significant digits


def _fmt(x) -> str:
    v = float(x)
    if np.isnan(v):
        return "nan"
    return FLOAT_FMT.format(v)


# ---------------------------------------------------------------- phase maps

def phase_map_to_dict(pm: PhaseMap) -> dict:
    return {
        "t_max": pm.t_max,
        "pi_sites": [[s, x, c] for s, x, c in pm.pi_sites()],
    }


def phase_map_from_dict(obj) -> PhaseMap:
    if not isinstance(obj, dict):
        raise ValueError(f"phase map must be a JSON object, got {type(obj).__name__}")
    unknown = set(obj) - {"t_max", "pi_sites"}
    if unknown:
        raise ValueError(f"unknown phase-map keys: {sorted(unknown)}")
    try:
        t_max = obj["t_max"]
        sites = obj["pi_sites"]
    except KeyError as missing:
        raise ValueError(f"phase map is missing the {missing} key") from None
    if not isinstance(t_max, int) or t_max < 0:
        raise ValueError(f"t_max must be a non-negative integer, got {t_max!r}")
    if not isinstance(sites, list):
        raise ValueError("pi_sites must be a list of [step, position, coin] triples")
    checked = []
    for k, entry in enumerate(sites):
        if (not isinstance(entry, (list, tuple)) or len(entry) != 3
                or not isinstance(entry[0], int) or not isinstance(entry[1], int)
                or not isinstance(entry[2], str)):
            raise ValueError(
                f"pi_sites[{k}] must be [step:int, position:int, coin:str], got {entry!r}"
            )
        checked.append(tuple(entry))
    try:
        return PhaseMap.from_pi_sites(t_max, checked)
    except ValueError as exc:
        raise ValueError(f"invalid pi_sites entry: {exc}") from None


def write_phase_map(path, pm: PhaseMap) -> None:
    Path(path).write_text(json.dumps(phase_map_to_dict(pm), sort_keys=True, indent=2) + "\n")


def read_phase_map(path) -> PhaseMap:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return phase_map_from_dict(obj)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


# ------------------------------------------------------------- matrix files

def write_matrix_csv(path, step: int, matrix: np.ndarray) -> None:
    """Square mode-pair matrix with x_sigma labels on both axes."""
    labels = list(enumerate_modes(step).labels())
    m = np.asarray(matrix)
    if m.shape != (len(labels), len(labels)):
        raise ValueError(f"matrix shape {m.shape} does not match step {step}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", *labels])
        for lab, row in zip(labels, m):
            w.writerow([lab, *(_fmt(x) for x in row)])


def read_matrix_csv(path) -> tuple[int, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["mode"]:
        raise ValueError(f"{path}: expected a 'mode'-headed matrix file")
    labels = rows[0][1:]
    n = len(labels)
    if n % 2 or (n // 2 - 1) % 2:
        raise ValueError(f"{path}: {n} columns do not match any step's mode count")
    step = (n // 2 - 1) // 2
    expected = list(enumerate_modes(step).labels())
    if labels != expected:
        raise ValueError(f"{path}: mode labels do not match the step-{step} indexing")
    body = rows[1:]
    if len(body) != n or any(r[0] != lab for r, lab in zip(body, expected)):
        raise ValueError(f"{path}: row labels do not mirror the header")
    return step, np.array([[float(x) for x in r[1:]] for r in body])


# ------------------------------------------------------ trend / sweep tables

TREND_COLUMNS = ["step", "ordered_mav", "ordered_total", "best_mav", "best_total"]


def write_trend_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TREND_COLUMNS)
        for r in records:
            w.writerow([r.step, _fmt(r.ordered_mav), _fmt(r.ordered_total),
                        _fmt(r.best_mav), _fmt(r.best_total)])


SWEEP_COLUMNS = ["p", "mean_total_violation", "std_error",
                 "normalized_total_violation", "normalized_std_error", "n", "step"]


def write_sweep_csv(path, averages) -> None:
    """One row per (step, p); normalization is per-step against its p=0 row."""
    by_step: dict[int, float] = {}
    for avg in averages:
        if avg.p == 0.0:
            by_step[avg.step] = avg.mean_total_violation
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for avg in averages:
            ref = by_step.get(avg.step)
            if ref is None or ref <= 0.0:
                raise ValueError(f"step {avg.step} has no positive p=0 reference row")
            w.writerow([
                _fmt(avg.p), _fmt(avg.mean_total_violation), _fmt(avg.total_violation_se),
                _fmt(avg.mean_total_violation / ref), _fmt(avg.total_violation_se / ref),
                avg.realizations, avg.step,
            ])


def read_table_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    return rows[0], rows[1:]


# ------------------------------------------------------------ search results

def search_result_to_dict(result: SearchResult) -> dict:
    return {
        "step": result.step,
        "maps_evaluated": result.maps_evaluated,
        "best_mav": result.best_mav,
        "best_mav_pair": [m.label() for m in result.best_mav_pair],
        "best_mav_map": phase_map_to_dict(result.best_mav_map),
        "best_total": result.best_total,
        "best_total_map": phase_map_to_dict(result.best_total_map),
    }


# ---------------------------------------------------------------- provenance

def run_config(command: str, **params) -> dict:
    """Resolved-parameter record embedded next to every output.

    Only semantic parameters belong here; worker counts and output paths are
    excluded so that reruns under different process layouts stay
    byte-identical.
    """
    clean = {}
    for key, value in params.items():
        if isinstance(value, PhaseMap):
            value = phase_map_to_dict(value)
        elif isinstance(value, Mode):
            value = value.label()
        elif isinstance(value, np.generic):
            value = value.item()
        clean[key] = value
    return {"tool": "biphoton-walk", "version": __version__,
            "command": command, "params": clean}


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")
