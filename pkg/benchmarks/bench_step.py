"""Time one synchronous step with the numba kernels against the numpy fallback.

    python3 benchmarks/bench_step.py [--levels 6] [--repeat 200]

The workload is a ball sprinkled with black cells at a fixed density, so
the active set is large; both backends must return identical results.
"""

import argparse
import time

import numpy as np

from hypeca import kernels
from hypeca.rules import load_rules
from hypeca.tiling import build_ball


def bench(fn, repeat):
    fn()  # warm-up, includes jit compilation
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--levels", type=int, default=6)
    ap.add_argument("--density", type=float, default=0.05)
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    ball = build_ball(args.levels)
    table = load_rules()
    rng = np.random.default_rng(args.seed)
    states = (rng.random(ball.size) < args.density).astype(np.uint8)
    orient = rng.integers(0, 8, ball.size).astype(np.int8)
    watch = np.zeros(ball.size, dtype=np.uint8)
    nbr = ball.nbr

    def numpy_step():
        act = kernels._active_numpy(states, nbr, watch)
        return act, kernels._evaluate_numpy(states, nbr, orient, act, table.lut_id, table.lut_next)

    print(f"ball: {ball.size} cells, {int(states.sum())} black")
    t_np = bench(numpy_step, args.repeat)
    print(f"numpy  {t_np * 1e3:8.3f} ms/step")
    if kernels.active_cells_numba is None:
        print("numba disabled (HYPECA_DISABLE_NUMBA or numba missing)")
        return

    def numba_step():
        act = kernels.active_cells_numba(states, nbr, watch)
        return act, kernels.evaluate_numba(states, nbr, orient, act, table.lut_id, table.lut_next)

    a1, r1 = numpy_step()
    a2, r2 = numba_step()
    assert np.array_equal(a1, a2) and all(np.array_equal(x, y) for x, y in zip(r1, r2))
    t_nb = bench(numba_step, args.repeat)
    print(f"numba  {t_nb * 1e3:8.3f} ms/step  ({t_np / t_nb:.1f}x)")


if __name__ == "__main__":
    main()
