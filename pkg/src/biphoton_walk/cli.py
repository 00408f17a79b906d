"""Command-line entry points.

Commands
--------
simulate      one phase map -> coincidence/violation matrices + summary
search        random (or exhaustive) search over phase maps
sweep-p       disorder-averaged Total Violation across dilution levels
reproduce     parameterized reruns behind the bundled report figures
oracle-check  fast pairwise-amplitude path vs brute-force tensor evolution

Every file-emitting command writes a run_config.json with the resolved
semantic parameters (worker count and output paths excluded), and all
outputs are byte-deterministic for a given configuration regardless of
--threads.  Seeds are always explicit; stochastic commands refuse to run
without one.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .correlations import (
    ORACLE_MAX_STEP,
    BiphotonInput,
    gamma_indistinguishable,
    gamma_partial,
    two_particle_oracle,
)
from .disorder import average_over_disorder, derive_seed, realization_map
from .lattice import enumerate_modes
from .measurement import PAPER_PRESET, ExperimentPreset, reproduce_experiment, step6_enhancing_map
from .search import TrendRecord, evaluate_map, exhaustive_search, random_search
from .search import mav_trend as _mav_trend
from .serialization import (
    TREND_COLUMNS,
    phase_map_to_dict,
    read_phase_map,
    run_config,
    search_result_to_dict,
    write_json,
    write_matrix_csv,
    write_phase_map,
    write_sweep_csv,
    write_trend_csv,
)
from .violation import violation_matrix
from .walk import BALANCED_COIN, CoinSpec, PhaseMap, build_unitary

DEFAULT_P_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


class _Progress:
    """Throughput ticker on stderr; harmless when stderr is not a console."""

    def __init__(self, label: str):
        self.label = label
        self.t0 = time.perf_counter()

    def __call__(self, done: int, total: int) -> None:
        rate = done / max(time.perf_counter() - self.t0, 1e-9)
        end = "\n" if done >= total else ""
        print(f"\r{self.label}: {done}/{total} maps ({rate:.0f}/s)",
              end=end, file=sys.stderr, flush=True)


def _say(text: str) -> None:
    print(text, file=sys.stderr)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _coin(args) -> CoinSpec:
    return CoinSpec(args.coin_t) if args.coin_t != 0.5 else BALANCED_COIN


def _peak(values: np.ndarray) -> tuple[int, int, float]:
    """Largest upper-triangle entry; row-major first index on ties."""
    masked = np.where(np.isnan(values), -np.inf, values)
    masked[np.tril_indices_from(masked)] = -np.inf
    flat = int(np.argmax(masked))
    i, j = divmod(flat, masked.shape[0])
    return i, j, float(masked[i, j])


# ------------------------------------------------------------------ simulate

def cmd_simulate(args) -> int:
    if args.map is not None:
        pm = read_phase_map(args.map)
        t = pm.t_max
        if args.steps is not None and args.steps != t:
            raise ValueError(f"--steps {args.steps} contradicts the map depth {t}")
    else:
        if args.steps is None:
            raise ValueError("--ordered needs --steps to fix the walk depth")
        t = args.steps
        pm = PhaseMap.zeros(t)
    spec, inp = _coin(args), BiphotonInput(q=args.q)
    out = _out_dir(args)

    gamma = gamma_partial(build_unitary(t, pm, spec), inp)
    vm = violation_matrix(gamma)
    write_matrix_csv(out / "gamma.csv", t, gamma.gamma)
    write_matrix_csv(out / "violation.csv", t, vm.values)
    write_json(out / "summary.json", {
        "step": t,
        "coin_transmissivity": spec.transmissivity,
        "q": inp.q,
        "phase_map": phase_map_to_dict(pm),
        "max_violation": vm.max_violation,
        "max_violation_pair": [m.label() for m in vm.max_pair],
        "total_violation": vm.total_violation,
    })
    write_json(out / "run_config.json", run_config(
        "simulate", step=t, coin_transmissivity=spec.transmissivity, q=inp.q,
        phase_map=pm))
    plotting.save_matrix_heatmap(out / "gamma.png", t, gamma.gamma,
                                 title=f"coincidences, {t} steps",
                                 cbar_label="coincidence probability")
    plotting.save_matrix_heatmap(out / "violation.png", t, vm.values,
                                 title=f"violations, {t} steps", cbar_label="V",
                                 cmap="magma")
    _say(f"simulate: t={t} max V={vm.max_violation:.6g} total V={vm.total_violation:.6g}")
    return 0


# -------------------------------------------------------------------- search

def cmd_search(args) -> int:
    spec, inp = _coin(args), BiphotonInput(q=args.q)
    out = _out_dir(args)
    _, ordered_mav, _, ordered_total = evaluate_map(args.steps, PhaseMap.zeros(args.steps), spec, inp)
    if args.exhaustive:
        result = exhaustive_search(args.steps, spec, inp,
                                   gauge_quotient=args.gauge_quotient)
        params = dict(mode="exhaustive", gauge_quotient=args.gauge_quotient)
    else:
        if args.seed is None or args.maps is None:
            raise ValueError("random search needs --maps and --seed (or use --exhaustive)")
        result = random_search(args.steps, args.maps, args.seed, spec, inp,
                               workers=args.threads,
                               progress=_Progress(f"search t={args.steps}"))
        params = dict(mode="random", maps=args.maps, seed=args.seed)

    payload = search_result_to_dict(result)
    payload["ordered_mav"] = ordered_mav
    payload["ordered_total"] = ordered_total
    write_json(out / "search_result.json", payload)
    write_phase_map(out / "best_map.json", result.best_mav_map)
    write_matrix_csv(out / "landscape.csv", args.steps, result.per_pair_best)
    write_json(out / "run_config.json", run_config(
        "search", step=args.steps, coin_transmissivity=spec.transmissivity,
        q=inp.q, **params))
    plotting.save_matrix_heatmap(
        out / "landscape.png", args.steps, result.per_pair_best,
        title=f"best V per output pair, {result.maps_evaluated} maps, {args.steps} steps",
        cbar_label="best V", cmap="magma")
    pair = " ".join(m.label() for m in result.best_mav_pair)
    _say(f"search: best V={result.best_mav:.6g} at ({pair}) vs ordered {ordered_mav:.6g}")
    return 0


# ------------------------------------------------------------------- sweep-p

def _run_sweep(steps, p_grid, n, seed, workers, spec=BALANCED_COIN,
               inp=None) -> list:
    """One DisorderAverage per (step, p).

    Realizations are drawn with a per-step seed shared across p values
    (common random numbers), which sharpens comparisons along the p axis.
    """
    inp = inp or BiphotonInput()
    averages = []
    for t in steps:
        step_seed = derive_seed(seed, t)
        for p in p_grid:
            averages.append(average_over_disorder(
                p, t, n, step_seed, spec, inp, workers=workers,
                progress=_Progress(f"sweep t={t} p={p:g}")))
    return averages


def cmd_sweep_p(args) -> int:
    if 0.0 not in args.p_grid:
        raise ValueError("the p grid must contain 0 (normalization reference)")
    spec, inp = _coin(args), BiphotonInput(q=args.q)
    out = _out_dir(args)
    averages = _run_sweep(args.steps, args.p_grid, args.maps, args.seed,
                          args.threads, spec, inp)
    write_sweep_csv(out / "p_sweep.csv", averages)
    write_json(out / "run_config.json", run_config(
        "sweep-p", steps=list(args.steps), p_grid=list(args.p_grid),
        realizations=args.maps, seed=args.seed,
        coin_transmissivity=spec.transmissivity, q=inp.q))
    table = _sweep_table(averages)
    plotting.save_sweep_figure(out / "p_sweep.png", table,
                               title="disorder-averaged total violation")
    return 0


def _sweep_table(averages) -> list[dict]:
    ref = {a.step: a.mean_total_violation for a in averages if a.p == 0.0}
    return [{
        "p": a.p, "step": a.step,
        "normalized_total_violation": a.mean_total_violation / ref[a.step],
        "normalized_std_error": a.total_violation_se / ref[a.step],
    } for a in averages]


# ----------------------------------------------------------------- reproduce

def _reproduce_fig2(args, out: Path) -> dict:
    """Violation trends of the balanced walk: ordered vs best sampled map."""
    t_max = 15 if args.paper_scale else 10
    n_maps = 10_000
    records = _mav_trend(range(1, t_max + 1), n_maps, args.seed,
                         workers=args.threads,
                         progress=_Progress("fig2 search"))
    for r in records:
        _say(f"fig2 t={r.step}: best V={r.best_mav:.6g} (ordered {r.ordered_mav:.6g})")
    write_trend_csv(out / "trend.csv", records)
    plotting.save_trend_figure(out / "fig2.png", records,
                               title="balanced walk, exact coincidences")
    return dict(steps=t_max, maps_per_step=n_maps, seed=args.seed,
                coin_transmissivity=0.5, q=0.0)


def _reproduce_fig4(args, out: Path) -> dict:
    """Step-6 enhancing map: exact violation matrix next to a counting run."""
    preset = ExperimentPreset(coin=PAPER_PRESET.coin, q=PAPER_PRESET.q,
                              total_counts=args.counts)
    pm = step6_enhancing_map()
    run = reproduce_experiment(preset, 6, pm, args.seed)
    theory_v = violation_matrix(run.gamma_theory)
    write_matrix_csv(out / "gamma_theory.csv", 6, run.gamma_theory.gamma)
    write_matrix_csv(out / "violation_theory.csv", 6, theory_v.values)
    write_matrix_csv(out / "counts.csv", 6, run.counts.counts)
    write_matrix_csv(out / "violation_emulated.csv", 6, run.violation.values)
    write_matrix_csv(out / "violation_sigma.csv", 6, run.violation.sigma)
    i, j, peak = _peak(run.violation.values)
    ti, tj, tpeak = _peak(theory_v.values)
    modes = enumerate_modes(6).modes
    write_json(out / "summary.json", {
        "similarity": run.similarity,
        "theory_peak": {"pair": [modes[ti].label(), modes[tj].label()], "value": tpeak},
        "emulated_peak": {"pair": [modes[i].label(), modes[j].label()],
                          "value": peak, "sigma": float(run.violation.sigma[i, j])},
        "total_counts": run.counts.total,
    })
    plotting.save_matrix_panels(
        out / "fig4.png", 6,
        [("exact", theory_v.values), ("counting emulation", run.violation.values)],
        cbar_label="V", cmap="magma")
    _say(f"fig4: similarity={run.similarity:.4f} emulated peak V={peak:.4f}")
    return dict(step=6, phase_map=pm, coin_transmissivity=preset.coin.transmissivity,
                q=preset.q, total_counts=args.counts, seed=args.seed)


def _reproduce_fig5(args, out: Path) -> dict:
    """Device-preset trends plus per-step emulated counting estimates."""
    t_max = 10
    n_maps = 100_000 if args.paper_scale else 10_000
    preset = ExperimentPreset(coin=PAPER_PRESET.coin, q=PAPER_PRESET.q,
                              total_counts=args.counts)
    inp = BiphotonInput(q=preset.q)
    records, points = [], []
    for t in range(1, t_max + 1):
        _, o_mav, _, o_total = evaluate_map(t, PhaseMap.zeros(t), preset.coin, inp)
        best = random_search(t, n_maps, derive_seed(args.seed, t), preset.coin,
                             inp, workers=args.threads,
                             progress=_Progress(f"fig5 t={t}"))
        run = reproduce_experiment(preset, t, best.best_mav_map,
                                   derive_seed(args.seed, 10_000 + t))
        i, j, est = _peak(run.violation.values)
        sig = float(run.violation.sigma[i, j])
        records.append(TrendRecord(step=t, ordered_mav=o_mav, ordered_total=o_total,
                                   best_mav=best.best_mav, best_total=best.best_total))
        points.append((t, est, sig))
        _say(f"fig5 t={t}: best V={best.best_mav:.6g} emulated {est:.4f}+-{sig:.4f}")
    with open(out / "trend_preset.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TREND_COLUMNS + ["emulated_mav", "emulated_sigma"])
        for r, (_, est, sig) in zip(records, points):
            w.writerow([r.step, f"{r.ordered_mav:.11e}", f"{r.ordered_total:.11e}",
                        f"{r.best_mav:.11e}", f"{r.best_total:.11e}",
                        f"{est:.11e}", f"{sig:.11e}"])
    plotting.save_trend_figure(out / "fig5.png", records, points=points,
                               title="device preset: 0.55 transmissivity, q=0.11")
    return dict(steps=t_max, maps_per_step=n_maps, seed=args.seed,
                coin_transmissivity=preset.coin.transmissivity, q=preset.q,
                total_counts=args.counts)


def _reproduce_sm_step15(args, out: Path) -> dict:
    """Ordered vs fully disordered (p=1 averaged) violation pattern at t=15."""
    t, n = 15, (10_000 if args.paper_scale else 2_000)
    ordered = violation_matrix(gamma_partial(build_unitary(t, PhaseMap.zeros(t))))
    averaged = average_over_disorder(1.0, t, n, args.seed, workers=args.threads,
                                     progress=_Progress("sm_step15 average"))
    write_matrix_csv(out / "violation_ordered.csv", t, ordered.values)
    write_matrix_csv(out / "violation_disordered.csv", t, averaged.mean_violation.values)
    plotting.save_matrix_panels(
        out / "sm_step15.png", t,
        [("ordered", ordered.values), (f"p=1 mean of {n}", averaged.mean_violation.values)],
        cbar_label="V", cmap="magma")
    return dict(step=t, realizations=n, p=1.0, seed=args.seed,
                coin_transmissivity=0.5, q=0.0)


def _reproduce_sm_totviol(args, out: Path) -> dict:
    """Normalized averaged Total Violation against p for three depths."""
    steps, n = (6, 10, 15), (10_000 if args.paper_scale else 2_000)
    averages = _run_sweep(steps, DEFAULT_P_GRID, n, args.seed, args.threads)
    write_sweep_csv(out / "p_sweep.csv", averages)
    plotting.save_sweep_figure(out / "sm_totviol.png", _sweep_table(averages),
                               title="averaged total violation vs dilution")
    return dict(steps=list(steps), p_grid=list(DEFAULT_P_GRID), realizations=n,
                seed=args.seed, coin_transmissivity=0.5, q=0.0)


def _reproduce_sm_landscape9(args, out: Path) -> dict:
    """Per-pair best violation over random maps at step 9."""
    t = 9
    n_maps = 1_000_000 if args.paper_scale else 100_000
    result = random_search(t, n_maps, args.seed, workers=args.threads,
                           progress=_Progress("sm_landscape9 search"))
    write_matrix_csv(out / "landscape.csv", t, result.per_pair_best)
    plotting.save_matrix_heatmap(
        out / "sm_landscape9.png", t, result.per_pair_best,
        title=f"best V per output pair, {n_maps} maps, 9 steps",
        cbar_label="best V", cmap="magma")
    _say(f"sm_landscape9: best V={result.best_mav:.6g}")
    return dict(step=t, maps=n_maps, seed=args.seed,
                coin_transmissivity=0.5, q=0.0)


_FIGURES = {
    "fig2": _reproduce_fig2,
    "fig4": _reproduce_fig4,
    "fig5": _reproduce_fig5,
    "sm_step15": _reproduce_sm_step15,
    "sm_totviol": _reproduce_sm_totviol,
    "sm_landscape9": _reproduce_sm_landscape9,
}


def cmd_reproduce(args) -> int:
    out = _out_dir(args)
    params = _FIGURES[args.figure](args, out)
    params["scale"] = "paper" if args.paper_scale else "desk"
    write_json(out / "run_config.json", run_config(f"reproduce {args.figure}", **params))
    return 0


# -------------------------------------------------------------- oracle-check

def cmd_oracle_check(args) -> int:
    if args.steps > ORACLE_MAX_STEP:
        raise ValueError(f"the brute-force tensor path is guarded to t <= {ORACLE_MAX_STEP}")
    spec, inp = _coin(args), BiphotonInput()
    worst = 0.0
    for t in range(1, args.steps + 1):
        step_seed = derive_seed(args.seed, t)
        delta = 0.0
        for k in range(args.maps):
            pm = realization_map(1.0, step_seed, k, t)
            fast = gamma_indistinguishable(build_unitary(t, pm, spec), inp).gamma
            slow = two_particle_oracle(t, pm, spec, inp).gamma
            delta = max(delta, float(np.abs(fast - slow).max()))
        print(f"t={t}: max |delta| = {delta:.3e} over {args.maps} maps")
        worst = max(worst, delta)
    ok = worst < 1e-10
    print(f"oracle agreement: worst |delta| = {worst:.3e} -> {'OK' if ok else 'MISMATCH'}")
    return 0 if ok else 1


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biphoton-walk",
        description="Two-photon walks under binary phase disorder: "
                    "simulation, map search, disorder sweeps, counting emulation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_physics(p):
        p.add_argument("--coin-t", type=float, default=0.5, metavar="T",
                       help="coin transmissivity (default 0.5, balanced)")
        p.add_argument("--q", type=float, default=0.0,
                       help="pair distinguishability in [0, 1] (default 0)")

    sim = sub.add_parser("simulate", help="run one phase map end to end")
    sim.add_argument("--steps", type=int, help="walk depth (required with --ordered)")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--map", help="phase-map JSON file")
    src.add_argument("--ordered", action="store_true", help="all-zero phase map")
    add_physics(sim)
    sim.add_argument("--out-dir", required=True)
    sim.set_defaults(func=cmd_simulate)

    sea = sub.add_parser("search", help="search phase maps for enhanced violations")
    sea.add_argument("--steps", type=int, required=True)
    sea.add_argument("--maps", type=int, help="number of random maps")
    sea.add_argument("--seed", type=int, help="base seed for the map stream")
    sea.add_argument("--exhaustive", action="store_true",
                     help="enumerate every map instead of sampling (small depths)")
    sea.add_argument("--gauge-quotient", action="store_true",
                     help="with --exhaustive, enumerate one map per gauge class")
    add_physics(sea)
    sea.add_argument("--threads", type=int, default=1)
    sea.add_argument("--out-dir", required=True)
    sea.set_defaults(func=cmd_search)

    swe = sub.add_parser("sweep-p", help="averaged total violation vs dilution p")
    swe.add_argument("--steps", type=_int_list, default=(6, 10),
                     help="comma-separated walk depths (default 6,10)")
    swe.add_argument("--p-grid", type=_float_list, default=DEFAULT_P_GRID,
                     help="comma-separated dilution levels, must include 0")
    swe.add_argument("--maps", type=int, required=True,
                     help="disorder realizations per (step, p)")
    swe.add_argument("--seed", type=int, required=True)
    add_physics(swe)
    swe.add_argument("--threads", type=int, default=1)
    swe.add_argument("--out-dir", required=True)
    swe.set_defaults(func=cmd_sweep_p)

    rep = sub.add_parser("reproduce", help="rebuild the data behind a bundled figure")
    rep.add_argument("figure", choices=sorted(_FIGURES),
                     help="which figure's data to regenerate")
    rep.add_argument("--seed", type=int, required=True)
    rep.add_argument("--paper-scale", action="store_true",
                     help="full sample sizes instead of desk-scale defaults")
    rep.add_argument("--counts", type=int, default=PAPER_PRESET.total_counts,
                     help="total coincidences for the counting emulations")
    rep.add_argument("--threads", type=int, default=1)
    rep.add_argument("--out-dir", required=True)
    rep.set_defaults(func=cmd_reproduce)

    orc = sub.add_parser("oracle-check",
                         help="compare the production coincidence path to the tensor oracle")
    orc.add_argument("--steps", type=int, default=6, help="largest depth to check")
    orc.add_argument("--maps", type=int, default=50, help="random maps per depth")
    orc.add_argument("--seed", type=int, required=True)
    orc.add_argument("--coin-t", type=float, default=0.5, metavar="T",
                     help="coin transmissivity (default 0.5, balanced)")
    orc.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
