import numpy as np
import pytest

from dplab.littlewood_paley import block_norms
from dplab.spectral import forward, make_grid
from dplab.wavepackets import (
    CARRIER_RATIO,
    PacketParams,
    carrier,
    grid_for_packets,
    hat_phi,
    make_envelope,
    make_fn,
    make_gn,
    packet_diagnostics,
)


@pytest.fixture(scope="module")
def env():
    return make_envelope(grid_for_packets(6))


def test_hat_phi_profile():
    assert np.all(hat_phi(np.linspace(-0.25, 0.25, 11)) == 1.0)
    assert np.all(hat_phi(np.array([0.5, -0.6, 3.0])) == 0.0)
    assert hat_phi(0.375) == pytest.approx(0.5)


def test_grid_sizes():
    assert grid_for_packets(5).N == 4096
    assert grid_for_packets(8).N == 2**15
    assert grid_for_packets(10).N == 2**17
    g = grid_for_packets(8)
    assert g.nyquist >= 3 * carrier(8)


def test_envelope_peak_and_band(env):
    assert env.phi0 == pytest.approx(0.75 / (2 * np.pi), rel=1e-12)
    assert env.phi.values[env.grid.N // 2] == pytest.approx(env.phi0, rel=1e-12)
    c = forward(env.phi).coeffs
    assert np.abs(c[env.grid.xi >= 0.5]).max() < 1e-17


def test_envelope_tail_reported(env):
    assert 0 < env.tail_ratio < 0.05
    with pytest.raises(ValueError, match="tail"):
        make_envelope(env.grid, tail_tol=1e-6)


def test_envelope_needs_fine_frequency_ladder():
    with pytest.raises(ValueError, match="1/12"):
        make_envelope(make_grid(np.pi, 256))


def test_packet_params_checks():
    g = grid_for_packets(6)
    p = PacketParams(6, g)
    assert p.carrier == pytest.approx(CARRIER_RATIO * 64)
    assert p.amplitude_g == pytest.approx(2.0**-6 * 12 / 17)
    with pytest.raises(ValueError, match="Nyquist"):
        PacketParams(12, g)
    with pytest.raises(ValueError, match="grid frequency"):
        PacketParams(2, make_grid(np.pi, 256))
    with pytest.raises(ValueError):
        PacketParams(0, g)


def test_fn_concentrated_in_carrier_block(env):
    n = 6
    f = make_fn(env, n)
    norms = block_norms(f)
    # carrier 17/12 * 2^n sits where phi(2^-n xi) = 1
    assert np.argmax(norms) - 1 == n
    assert norms[n + 1] == pytest.approx(np.abs(f.values).max(), rel=1e-3)


def test_gn_low_frequency(env):
    g = make_gn(env, 5)
    norms = block_norms(g)
    assert norms[1:].max() < 1e-15 * norms[0] + 1e-300


def test_diagnostics_table(env):
    rows = packet_diagnostics(env, [4, 5], [0.5, 1.0])
    assert len(rows) == 4
    assert set(rows[0]) == {"n", "sigma", "norm_f", "norm_g", "linf_f", "linf_g", "prod_fg", "prod_gg"}
    a, b = rows[0], rows[2]
    assert b["linf_g"] == pytest.approx(a["linf_g"] / 2)
    assert rows[0]["prod_fg"] == rows[1]["prod_fg"]
