"""Time the numba kernels against their numpy references.

    python benchmarks/bench_kernels.py [--n 64] [--repeat 5]

Kernels are fed flattened n^3 arrays, the shape they see inside a 3D run.
A full Strang step (FFT-bound) is timed with the backend picked at import.
"""

import argparse
import timeit

import numpy as np

from fnls_lab import _kernels as K
from fnls_lab.dynamics import StrangStepper
from fnls_lab.grid import PhysParams, make_grid


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=64, help="points per axis")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    size = args.n ** 3
    u = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    w = rng.uniform(size=size)
    grads = rng.standard_normal((3, size)) + 1j * rng.standard_normal((3, size))
    hess = rng.standard_normal((3, 3, size))
    hess = 0.5 * (hess + hess.transpose(1, 0, 2))
    acc_h, acc_u = np.zeros((3, 3, size)), np.zeros(size)

    cases = {
        "abs_pow_sum": lambda m: getattr(K, m + "abs_pow_sum")(u, 4.0),
        "weighted_abs_pow_sum": lambda m: getattr(K, m + "weighted_abs_pow_sum")(u, w, 4.0),
        "phase_rotate": lambda m: getattr(K, m + "phase_rotate")(u, 1e-3, 2.0),
        "signed_power": lambda m: getattr(K, m + "signed_power")(u, 3.0),
        "hessian_form": lambda m: getattr(K, m + "hessian_form")(hess, grads),
        "accumulate_virial_density": lambda m: getattr(K, m + "accumulate_virial_density")(acc_h, acc_u, grads, u, 0.5),
    }

    print(f"grid {args.n}^3 ({size} points), backend at import: {K.backend()}")
    print(f"{'kernel':28s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, call in cases.items():
        t_np = _best(lambda: call("np_"), args.repeat, args.number)
        if K.USE_NUMBA:
            call("nb_")  # compile outside the timed region
            t_nb = _best(lambda: call("nb_"), args.repeat, args.number)
            print(f"{name:28s} {1e3 * t_np:10.2f} {1e3 * t_nb:10.2f} {t_np / t_nb:7.1f}x")
        else:
            print(f"{name:28s} {1e3 * t_np:10.2f} {'-':>10s} {'-':>8s}")

    g = make_grid(3, args.n, 5.0)
    stepper = StrangStepper(g, 1e-3, PhysParams(0.9, 3.0))
    v = u.reshape(g.shape)
    stepper.step(v)
    t_step = _best(lambda: stepper.step(v), args.repeat, args.number)
    print(f"{'strang step (' + K.backend() + ')':28s} {1e3 * t_step:10.2f} ms")


if __name__ == "__main__":
    main()
