#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernel paths.

Times each hot kernel on both paths in this process, then runs one
end-to-end simulation point in two subprocesses (``WIREMODEL_DISABLE_NUMBA``
unset / set) and checks the measured Ppl agrees.

    python3 benchmarks/bench_kernels.py [--repeat N] [--frames N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from wiremodel import _kernels


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT load
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=256) + 1j * rng.normal(size=256)
    sym = rng.normal(size=200_000) + 1j * rng.normal(size=200_000)
    words = np.random.Philox(1).random_raw(2_000_000)
    bits = rng.integers(0, 2, (20_000, 81), dtype=np.uint8)
    return [
        ("nearest_point (256-QAM, 2e5 symbols)",
         lambda: _kernels.nearest_point_numpy(sym, pts),
         lambda: _kernels.nearest_point(sym, pts), True),
        ("box_muller (1e6 samples)",
         lambda: _kernels.box_muller_numpy(words),
         lambda: _kernels.box_muller(words), False),
        ("crc8_rows (2e4 x 81 bits)",
         lambda: _kernels.crc8_rows_numpy(bits, 0x9B, 0),
         lambda: _kernels.crc8_rows(bits, 0x9B, 0), True),
    ]


_POINT = """
import json, time
from wiremodel import _kernels
from wiremodel.framing import layout_for
from wiremodel.linksim import simulate_point
from wiremodel.pplmodel import AntennaSet, ModulationScheme, WirelessConfig
cfg = WirelessConfig(ModulationScheme.QAM16, AntennaSet(2, 2), 12.0)
lay = layout_for("AMR_WB", 8)
simulate_point(lay, cfg, "rayleigh", 8, 0)
t0 = time.perf_counter()
m = simulate_point(lay, cfg, "rayleigh", {frames}, 0)
print(json.dumps({{"backend": _kernels.backend(), "seconds": time.perf_counter() - t0, "lost": m.frames_lost}}))
"""


def end_to_end(frames):
    out = []
    for flag in ("0", "1"):
        env = dict(os.environ, WIREMODEL_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", _POINT.format(frames=frames)], env=env,
                             capture_output=True, text=True, check=True)
        out.append(json.loads(res.stdout))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--frames", type=int, default=2000)
    args = ap.parse_args(argv)

    if not _kernels.NUMBA_AVAILABLE:
        print("numba path disabled in this process; only the end-to-end comparison is meaningful")
    print(f"{'kernel':40s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}  agree")
    ok = True
    for name, np_fn, nb_fn, exact in kernel_cases():
        a, b = np_fn(), nb_fn()
        agree = np.array_equal(a, b) if exact else np.allclose(a, b, rtol=0, atol=1e-15)
        ok &= agree
        t_np, t_nb = best_of(np_fn, args.repeat), best_of(nb_fn, args.repeat)
        print(f"{name:40s} {t_np * 1e3:10.2f} {t_nb * 1e3:10.2f} {t_np / t_nb:8.2f}  {agree}")

    runs = end_to_end(args.frames)
    print(f"\nsimulate_point QAM16 (2,2) 12 dB, {args.frames} frames")
    for r in runs:
        print(f"  {r['backend']:6s} {r['seconds']:7.3f} s  lost {r['lost']}")
    same = runs[0]["lost"] == runs[1]["lost"]
    ok &= same
    print(f"  speedup {runs[1]['seconds'] / runs[0]['seconds']:.2f}x, same Ppl: {same}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
