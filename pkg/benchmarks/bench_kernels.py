"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row reports the best wall time of N runs per backend and the largest
elementwise difference between the two results.
"""
import argparse
import timeit

import numpy as np

from qclass import _pykernels

try:
    from qclass import _kernels
except ImportError:
    _kernels = None


def random_hermitian(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (m + m.conj().T) / 2


def projector_stack(rng, d):
    _, v = np.linalg.eigh(random_hermitian(rng, d))
    return np.ascontiguousarray(np.einsum("ik,jk->kij", v, v.conj()))


def cases(rng):
    for d in (4, 8, 16, 32):
        a = random_hermitian(rng, d)
        yield f"jacobi_eigh d={d}", "jacobi_eigh", (a, 100 * d * d)
    for d, n in ((2, 3), (3, 4), (4, 4), (3, 5), (2, 8)):
        stacks = [projector_stack(rng, d) for _ in range(n)]
        yield f"sym_product_table d={d} n={n}", "sym_product_table", (stacks,)


def first_array(result):
    return result[0] if isinstance(result, tuple) else result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    rng = np.random.default_rng(args.seed)
    print(f"{'case':32s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for label, fn, call in cases(rng):
        py = getattr(_pykernels, fn)
        t_py = min(timeit.repeat(lambda: py(*call), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{label:32s} {t_py * 1e3:12.3f}")
            continue
        cy = getattr(_kernels, fn)
        t_cy = min(timeit.repeat(lambda: cy(*call), number=1, repeat=args.repeat))
        diff = float(np.max(np.abs(first_array(py(*call)) - first_array(cy(*call)))))
        print(f"{label:32s} {t_py * 1e3:12.3f} {t_cy * 1e3:12.3f} {t_py / t_cy:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
