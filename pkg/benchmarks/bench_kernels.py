"""Time the compiled slot kernel against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--receivers 150] [--transmitters 4000] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from wehnet.sim import kernels


def make_inputs(n_rx, n_tx, side, seed):
    rng = np.random.default_rng(seed)
    rx = rng.uniform(0.0, side, (n_rx, 2))
    tx = rng.uniform(0.0, side, (n_tx, 2))
    fades = rng.standard_exponential((n_rx, n_tx))
    return rx, tx, fades


def bench(kernel, args, repeat):
    kernel(*args)  # warm-up
    times = timeit.repeat(lambda: kernel(*args), number=1, repeat=repeat)
    return min(times), float(np.median(times))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--receivers", type=int, default=150)
    p.add_argument("--transmitters", type=int, default=4000)
    p.add_argument("--side", type=float, default=200.0)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)

    rx, tx, fades = make_inputs(args.receivers, args.transmitters, args.side, 0)
    print(f"{args.receivers} receivers x {args.transmitters} transmitters, best/median of {args.repeat}")
    results = {}
    for alpha in (4.0, 3.5):
        call = (rx, tx, fades, args.side, alpha)
        results["python", alpha] = bench(kernels.python_slot_kernel, call, args.repeat)
        if kernels.compiled_slot_kernel is not None:
            results["cython", alpha] = bench(kernels.compiled_slot_kernel, call, args.repeat)
            a = kernels.python_slot_kernel(*call)
            b = kernels.compiled_slot_kernel(*call)
            assert np.array_equal(a[0], b[0])
            for x, y in zip(a[1:], b[1:]):
                np.testing.assert_allclose(x, y, rtol=1e-10)
    for (backend, alpha), (best, med) in results.items():
        print(f"  {backend:<7} alpha={alpha:<4} best {best * 1e3:8.2f} ms  median {med * 1e3:8.2f} ms")
    if kernels.compiled_slot_kernel is None:
        print("  compiled kernel not built; only the fallback was timed")
    else:
        for alpha in (4.0, 3.5):
            print(f"  speed-up alpha={alpha}: {results['python', alpha][0] / results['cython', alpha][0]:.2f}x")


if __name__ == "__main__":
    main()
