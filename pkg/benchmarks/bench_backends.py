#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Times the full shadow-free pipeline and the individual hot kernels on a
synthetic image. The numba backend is warmed up first so JIT compilation
is not measured.

    python benchmarks/bench_backends.py [--height 475] [--width 500] [--runs 10]
"""

import argparse
import time

import numpy as np

from orthoshadow import kernels, params, pipeline


def median_time(fn, runs):
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def kernel_cases(image, model):
    impl = kernels.active()
    v = image.reshape(-1, 3).astype(np.float64)
    u = impl.log_transform(v)
    u0 = model.u0
    dist = impl.neutral_distance(u, u0)
    up, _ = impl.project_pixels(u, u0)
    t = np.array([0.02, -0.01, 0.015])
    lab = impl.srgb_to_lab(image.reshape(-1, 3))
    ramp = np.linspace(0.0, 1.0, len(v))
    shift = np.log(np.array([2.0, 1.9, 1.7])) / 2.4
    return {
        "log_transform": lambda: impl.log_transform(v),
        "project_pixels": lambda: impl.project_pixels(u, u0),
        "neutral_distance": lambda: impl.neutral_distance(u, u0),
        "masked_deviation_sum": lambda: impl.masked_deviation_sum(
            u, u0, dist <= 0.15
        ),
        "color_correct": lambda: impl.color_correct(up, dist, t, 0.02),
        "exp_transform": lambda: impl.exp_transform(up + 8.5 * u0),
        "srgb_to_lab": lambda: impl.srgb_to_lab(image.reshape(-1, 3)),
        "lab_to_rgb": lambda: impl.lab_to_rgb(lab),
        "apply_shadow": lambda: impl.apply_shadow(v, ramp, shift),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--height", type=int, default=475)
    parser.add_argument("--width", type=int, default=500)
    parser.add_argument("--runs", type=int, default=10)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    image = rng.integers(25, 250, (args.height, args.width, 3)).astype(np.uint8)
    model = params.preset("mean")
    pixels = args.height * args.width

    results = {}
    for backend in ("numba", "numpy"):
        kernels.use(backend)
        pipeline.run(image, model)  # warm-up (JIT compile + caches)
        rows = {"pipeline": median_time(lambda: pipeline.run(image, model), args.runs)}
        for name, fn in kernel_cases(image, model).items():
            rows[name] = median_time(fn, args.runs)
        results[backend] = rows
    kernels.use("auto")

    print(f"\n{args.width}x{args.height} image ({pixels / 1e6:.2f} MP), "
          f"median of {args.runs} runs\n")
    print(f"{'stage':<22}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name in results["numba"]:
        nb = results["numba"][name]
        np_ = results["numpy"][name]
        print(f"{name:<22}{nb * 1e3:>10.2f}ms{np_ * 1e3:>10.2f}ms{np_ / nb:>9.1f}x")


if __name__ == "__main__":
    main()
