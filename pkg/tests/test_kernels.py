import os
import subprocess
import sys

import numpy as np
import pytest

from wiremodel import _kernels

numba_only = pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba path disabled")


@numba_only
def test_nearest_point_parity():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=64) + 1j * rng.normal(size=64)
    sym = rng.normal(size=5000) + 1j * rng.normal(size=5000)
    assert np.array_equal(_kernels.nearest_point_numpy(sym, pts), _kernels.nearest_point(sym, pts))


@numba_only
def test_box_muller_parity():
    words = np.random.Philox(3).random_raw(20000)
    # transcendental functions may differ by an ulp between numpy and libm
    np.testing.assert_allclose(_kernels.box_muller(words), _kernels.box_muller_numpy(words), rtol=0, atol=1e-15)


@numba_only
def test_crc_and_pack_parity():
    rng = np.random.default_rng(1)
    bits = rng.integers(0, 2, (300, 81), dtype=np.uint8)
    assert np.array_equal(_kernels.crc8_rows_numpy(bits, 0x9B, 0), _kernels.crc8_rows(bits, 0x9B, 0))
    assert np.array_equal(_kernels.pack_bits8_numpy(bits[:, :8]), _kernels.pack_bits8(bits[:, :8]))


def test_backend_name():
    assert _kernels.backend() in ("numba", "numpy")


def test_env_flag_selects_numpy_and_matches(tmp_path):
    # the numpy fallback produces the same sweep CSV byte for byte
    args = ["simulate", "--modulation", "QAM16", "--antennas", "1x1,3x3", "--snr", "4,12",
            "--frames", "60", "--seed", "5", "--channel", "rayleigh"]
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, WIREMODEL_DISABLE_NUMBA=flag)
        out = tmp_path / f"s{flag}.csv"
        subprocess.run([sys.executable, "-m", "wiremodel.cli", *args, "--out", str(out)], check=True, env=env)
        outs.append(out.read_bytes())
        backend = subprocess.run([sys.executable, "-c", "from wiremodel import _kernels; print(_kernels.backend())"],
                                 env=env, capture_output=True, text=True, check=True).stdout.strip()
        assert backend == ("numpy" if flag == "1" else "numba")
    assert outs[0] == outs[1]
