"""Timing comparison of the numba kernels against the pure-numpy fallbacks.

Runs each workload in a subprocess per backend (the backend is frozen at
import time via ROTOGP_BACKEND) and prints a side-by-side table.

    python benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json
import time
import numpy as np
from rotogp import backend, analysis, fields, fock, scattering

REPEAT = __REPEAT__

def best(fn):
    fn()  # warm-up (includes jit compilation)
    times = []
    for _ in range(REPEAT):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

grid = fields.Grid(2, 256, 12.0)
phi = fields.vortex_field(grid, winding=3)
rng = np.random.default_rng(11)
noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
phi = fields.ComplexField(grid, phi.values + 1e-4 * noise * np.exp(-grid.radius_sq())).normalized()

pot = scattering.square_barrier(1.0, 1.0e4)

basis = fock.FockBasis(4, 6)
rng = np.random.default_rng(3)
u = rng.standard_normal((4, 4))
u = u @ u.T + 4 * np.eye(4)
mb = fock.ModeBasis(e=np.arange(1.0, 5.0), W=fock.pair_interaction_tensor(u, 0.3))

out = {
    "backend": backend.backend_name(),
    "vortex census (256^2)": best(lambda: analysis.detect_vortices(phi)),
    "radial RK4 (2e4 steps)": best(lambda: scattering.scattering_length(pot)),
    "Fock assembly (J=4, n<=6)": best(lambda: fock.build_hamiltonian(mb, basis)),
}
print(json.dumps(out))
"""


def run(backend_name, repeat):
    env = dict(os.environ, ROTOGP_BACKEND=backend_name)
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER.replace("__REPEAT__", str(repeat))],
        capture_output=True, text=True, env=env,
    )
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    jit = run("numba", args.repeat)
    plain = run("numpy", args.repeat)
    if jit["backend"] != "numba":
        print("warning: numba unavailable, comparing numpy against itself")

    names = [k for k in jit if k != "backend"]
    width = max(len(n) for n in names)
    print(f"{'workload'.ljust(width)}   numba [ms]   numpy [ms]   speedup")
    for name in names:
        tj, tp = jit[name] * 1e3, plain[name] * 1e3
        print(f"{name.ljust(width)}   {tj:10.3f}   {tp:10.3f}   {tp / tj:6.1f}x")


if __name__ == "__main__":
    main()
