import pickle

import numpy as np
import pytest

from biphoton_walk.lattice import Mode, enumerate_modes
from biphoton_walk.walk import (
    BALANCED_COIN,
    CoinSpec,
    PhaseMap,
    build_unitary,
    coin_matrix,
    site_count,
)


def random_map(rng, t):
    return PhaseMap.from_flat(t, (rng.random(site_count(t)) < 0.5).astype(np.uint8))


def test_balanced_coin_entries():
    c = coin_matrix(BALANCED_COIN)
    s = 1.0 / np.sqrt(2.0)
    assert np.allclose(c, [[s, 1j * s], [1j * s, s]], atol=1e-15)


def test_coin_matrix_unitary_for_random_transmissivities():
    rng = np.random.default_rng(4)
    for _ in range(50):
        spec = CoinSpec(float(rng.uniform(0.05, 0.95)))
        c = coin_matrix(spec)
        assert np.abs(c @ c.conj().T - np.eye(2)).max() < 1e-14


@pytest.mark.parametrize("bad", [-0.1, 1.7])
def test_coin_spec_rejects_out_of_range_transmissivity(bad):
    with pytest.raises(ValueError):
        CoinSpec(bad)


def test_fully_transmissive_coin_never_reflects():
    u = build_unitary(3, PhaseMap.zeros(3), CoinSpec(1.0))
    idx = enumerate_modes(3)
    col = u.column(Mode(0, "L"))
    assert abs(abs(col[idx.index(Mode(3, "L"))]) - 1.0) < 1e-14


def test_site_count_is_quadratic():
    # layer s holds 2(2s+1) sites, summing to 2 t^2
    for t in range(1, 12):
        assert site_count(t) == 2 * t * t
    assert site_count(0) == 0


def test_phase_map_flat_round_trip():
    rng = np.random.default_rng(11)
    for t in (1, 2, 3, 5):
        pm = random_map(rng, t)
        again = PhaseMap.from_flat(t, pm.flat())
        assert again == pm
        assert hash(again) == hash(pm)


def test_phase_map_pi_sites_round_trip():
    rng = np.random.default_rng(12)
    for t in (1, 3, 4):
        pm = random_map(rng, t)
        again = PhaseMap.from_pi_sites(t, pm.pi_sites())
        assert again == pm


def test_phase_map_zeros_has_no_pi_sites():
    pm = PhaseMap.zeros(4)
    assert pm.pi_sites() == []
    assert np.all(pm.flat() == 0)
    assert np.all(pm.signs(2) == 1.0)


def test_phase_map_signs_match_bits():
    pm = PhaseMap.from_pi_sites(2, [(1, -1, "L"), (1, 1, "R")])
    signs = pm.signs(1)
    bits = pm.bits(1)
    assert np.array_equal(signs, 1.0 - 2.0 * bits)
    assert signs[0] == -1.0  # slot of (-1, L) in layer 1
    assert signs[5] == -1.0  # slot of (1, R)


@pytest.mark.parametrize("site", [(2, 0, "L"), (0, 1, "L"), (1, 0, "Q"), (-1, 0, "R")])
def test_phase_map_rejects_invalid_sites(site):
    with pytest.raises(ValueError):
        PhaseMap.from_pi_sites(2, [site])


def test_phase_map_from_flat_rejects_wrong_length():
    with pytest.raises(ValueError):
        PhaseMap.from_flat(2, np.zeros(7, dtype=np.uint8))


def test_phase_map_keys_distinguish_all_two_step_maps():
    keys = set()
    for code in range(256):
        flat = np.array([(code >> b) & 1 for b in range(8)], dtype=np.uint8)
        keys.add(PhaseMap.from_flat(2, flat).key())
    assert len(keys) == 256


def test_phase_map_pickle_round_trip():
    rng = np.random.default_rng(13)
    pm = random_map(rng, 4)
    clone = pickle.loads(pickle.dumps(pm))
    assert clone == pm
    assert clone.t_max == 4


def test_unitary_columns_stay_orthonormal():
    rng = np.random.default_rng(21)
    for _ in range(25):
        t = int(rng.integers(1, 7))
        spec = CoinSpec(float(rng.uniform(0.1, 0.9)))
        u = build_unitary(t, random_map(rng, t), spec)
        gram = u.matrix.conj().T @ u.matrix
        assert np.abs(gram - np.eye(2)).max() < 1e-13


def test_unitary_shape_and_input_bookkeeping():
    u = build_unitary(3, PhaseMap.zeros(3))
    assert u.step == 3
    assert u.matrix.shape == (2 * (2 * 3 + 1), 2)
    assert u.inputs == (Mode(0, "L"), Mode(0, "R"))
    assert np.array_equal(u.column(Mode(0, "L")), u.matrix[:, 0])
    assert np.array_equal(u.column(Mode(0, "R")), u.matrix[:, 1])
    with pytest.raises(ValueError):
        u.column(Mode(1, "L"))


def test_ballistic_edge_amplitude():
    """The rightmost mode is reached only by transmitting every step."""
    for t in (1, 2, 4, 6):
        for trans in (0.5, 0.3):
            u = build_unitary(t, PhaseMap.zeros(t), CoinSpec(trans))
            idx = enumerate_modes(t)
            amp = u.column(Mode(0, "L"))[idx.index(Mode(t, "L"))]
            assert abs(abs(amp) - trans ** (t / 2.0)) < 1e-13


def test_parity_forbidden_slots_are_empty():
    u = build_unitary(3, PhaseMap.zeros(3))
    idx = enumerate_modes(3)
    probs = np.abs(u.matrix) ** 2
    for m in idx.modes:
        if (m.position + 3) % 2 == 1:  # off the reachable sublattice
            assert probs[idx.index(m)].max() == 0.0


def test_layer_flip_changes_only_global_sign():
    """Adding pi to every site of one layer negates the state exactly."""
    rng = np.random.default_rng(31)
    for _ in range(10):
        t = int(rng.integers(2, 6))
        pm = random_map(rng, t)
        layer = int(rng.integers(0, t))
        flat = pm.flat().copy()
        lo = site_count(layer)
        hi = lo + 2 * (2 * layer + 1)
        flat[lo:hi] ^= 1
        flipped = PhaseMap.from_flat(t, flat)
        u1 = build_unitary(t, pm).matrix
        u2 = build_unitary(t, flipped).matrix
        assert np.array_equal(u2, -u1)


def test_build_unitary_requires_full_depth_map():
    with pytest.raises(ValueError):
        build_unitary(4, PhaseMap.zeros(3))
