import json
from pathlib import Path

import numpy as np
import pytest

from biphoton_walk.cli import main
from biphoton_walk.lattice import Mode, enumerate_modes
from biphoton_walk.search import exhaustive_search
from biphoton_walk.serialization import (
    read_matrix_csv,
    read_table_csv,
    write_phase_map,
)
from biphoton_walk.walk import PhaseMap

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def tree_bytes(root: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


def test_simulate_ordered_single_step_has_hom_entry(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--steps", "1", "--ordered", "--out-dir", str(out)]) == 0
    step, v = read_matrix_csv(out / "violation.csv")
    idx = enumerate_modes(1)
    i, j = idx.index(Mode(-1, "R")), idx.index(Mode(1, "L"))
    assert step == 1
    assert v[i, j] == pytest.approx(1.0 / 3.0, abs=1e-10)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["max_violation"] == pytest.approx(1.0 / 3.0, abs=1e-10)
    assert sorted(summary["max_violation_pair"]) == ["-1_R", "1_L"]


def test_simulate_ordered_equals_explicit_zero_map(tmp_path):
    map_file = tmp_path / "zeros.json"
    write_phase_map(map_file, PhaseMap.zeros(3))
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--steps", "3", "--ordered", "--out-dir", str(out_a)]) == 0
    assert main(["simulate", "--map", str(map_file), "--out-dir", str(out_b)]) == 0
    assert tree_bytes(out_a) == tree_bytes(out_b)


def test_simulate_rejects_contradictory_depth(tmp_path):
    map_file = tmp_path / "m.json"
    write_phase_map(map_file, PhaseMap.zeros(3))
    code = main(["simulate", "--steps", "4", "--map", str(map_file),
                 "--out-dir", str(tmp_path / "x")])
    assert code == 2


def test_simulate_reports_malformed_map_line(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "t_max": 1,\n "pi_sites": [[0, 0,]]\n}\n')
    code = main(["simulate", "--map", str(bad), "--out-dir", str(tmp_path / "x")])
    assert code == 2
    err = capsys.readouterr().err
    assert "line 3" in err


def test_search_exhaustive_matches_library_optimum(tmp_path):
    out = tmp_path / "ex"
    assert main(["search", "--steps", "2", "--exhaustive", "--out-dir", str(out)]) == 0
    payload = json.loads((out / "search_result.json").read_text())
    oracle = exhaustive_search(2)
    assert payload["maps_evaluated"] == 256
    assert payload["best_mav"] == oracle.best_mav
    assert payload["best_mav"] > payload["ordered_mav"] - 1e-12


def test_search_requires_seed_for_random_mode(tmp_path):
    code = main(["search", "--steps", "3", "--maps", "10",
                 "--out-dir", str(tmp_path / "x")])
    assert code == 2


def test_search_exhaustive_guard_reports_site_count(tmp_path, capsys):
    code = main(["search", "--steps", "4", "--exhaustive",
                 "--out-dir", str(tmp_path / "x")])
    assert code == 2
    assert "32" in capsys.readouterr().err


def test_search_rerun_is_byte_identical(tmp_path):
    args = ["search", "--steps", "3", "--maps", "400", "--seed", "21"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out-dir", str(out_a)]) == 0
    assert main(args + ["--out-dir", str(out_b), "--threads", "2"]) == 0
    assert tree_bytes(out_a) == tree_bytes(out_b)


def test_sweep_p_normalization_and_schema(tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep-p", "--steps", "3", "--p-grid", "0,0.5,1",
                 "--maps", "60", "--seed", "4", "--out-dir", str(out)]) == 0
    header, rows = read_table_csv(out / "p_sweep.csv")
    assert header[0] == "p" and "normalized_total_violation" in header
    assert len(rows) == 3
    assert float(rows[0][3]) == 1.0
    assert all(int(r[5]) == 60 for r in rows)


def test_sweep_p_requires_reference_level(tmp_path):
    code = main(["sweep-p", "--steps", "3", "--p-grid", "0.5,1", "--maps", "10",
                 "--seed", "4", "--out-dir", str(tmp_path / "x")])
    assert code == 2


def test_reproduce_rejects_unknown_figure(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["reproduce", "fig9", "--seed", "1", "--out-dir", str(tmp_path / "x")])
    assert exc.value.code == 2
    assert "sm_landscape9" in capsys.readouterr().err  # lists the valid ids


def test_oracle_check_passes(capsys):
    assert main(["oracle-check", "--steps", "3", "--maps", "8", "--seed", "2"]) == 0
    assert "OK" in capsys.readouterr().out


def test_every_emitted_file_parses(tmp_path):
    """Schema gate: each artifact the commands produce must load cleanly."""
    sim = tmp_path / "sim"
    sea = tmp_path / "sea"
    swp = tmp_path / "swp"
    fig = tmp_path / "fig"
    assert main(["simulate", "--steps", "2", "--ordered", "--out-dir", str(sim)]) == 0
    assert main(["search", "--steps", "2", "--maps", "64", "--seed", "3",
                 "--out-dir", str(sea)]) == 0
    assert main(["sweep-p", "--steps", "2", "--p-grid", "0,1", "--maps", "40",
                 "--seed", "5", "--out-dir", str(swp)]) == 0
    assert main(["reproduce", "fig4", "--seed", "6", "--counts", "4000",
                 "--out-dir", str(fig)]) == 0
    seen = []
    for root in (sim, sea, swp, fig):
        for path in sorted(root.iterdir()):
            seen.append(path.name)
            if path.suffix == ".json":
                payload = json.loads(path.read_text())
                if path.name == "run_config.json":
                    assert payload["tool"] == "biphoton-walk"
                    assert "version" in payload and "params" in payload
            elif path.suffix == ".png":
                assert path.read_bytes()[:8] == PNG_MAGIC
            elif path.name == "p_sweep.csv":
                header, rows = read_table_csv(path)
                assert len(header) == 7 and rows
            elif path.suffix == ".csv":
                read_matrix_csv(path)
            else:
                raise AssertionError(f"unexpected artifact {path}")
    assert "run_config.json" in seen
    assert any(name.endswith(".png") for name in seen)


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
