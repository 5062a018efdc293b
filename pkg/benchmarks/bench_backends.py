"""Benchmark the compiled H1 reduction kernel against the pure-Python fallback.

Usage: python benchmarks/bench_backends.py [--full]

Runs identical reductions through both kernels on reference clouds and
prints a timing table. --full adds the larger (slow in pure Python) sizes.
"""

import argparse
import sys
import time

import numpy as np

import pmg.topology._reduction_py as pure
from pmg.analysis import sample_manifold
from pmg.pointcloud import PointCloud
from pmg.topology import build_filtration
from pmg.topology._core import _edge_index_matrix, _enclosing_radius

try:
    import pmg.topology._reduction as compiled
except ImportError:
    compiled = None


def two_circles(n_each):
    theta = np.linspace(0, 2 * np.pi, n_each, endpoint=False)
    ring = np.column_stack([np.cos(theta), np.sin(theta)])
    return PointCloud(np.vstack([ring, ring + np.array([6.0, 0.0])]))


def cases(full: bool):
    yield "circle n=100", sample_manifold("circle", 100, seed=1)
    yield "two circles n=120", two_circles(60)
    yield "blob n=150", sample_manifold("gaussian_blob", 150, {"dim": 2}, seed=2)
    yield "sphere n=200", sample_manifold("sphere", 200, seed=3)
    if full:
        yield "blob n=300", sample_manifold("gaussian_blob", 300, {"dim": 2}, seed=4)
        yield "circle n=400", sample_manifold("circle", 400, seed=5)


def run(kernel, filtration):
    eidx = _edge_index_matrix(filtration)
    t_cap = min(filtration.epsilon_max, _enclosing_radius(filtration))
    start = time.perf_counter()
    edges, deaths = kernel.reduce_h1(
        filtration.vertex_count,
        filtration.edge_i,
        filtration.edge_j,
        filtration.edge_length,
        eidx,
        t_cap,
    )
    return time.perf_counter() - start, (edges, deaths)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--full", action="store_true", help="include the larger sizes")
    args = parser.parse_args()

    if compiled is None:
        print("compiled kernel not available; install with the extension built")
        sys.exit(1)

    header = f"{'case':<22}{'compiled':>12}{'python':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, cloud in cases(args.full):
        filtration = build_filtration(cloud, "auto")
        t_compiled, result_c = run(compiled, filtration)
        t_python, result_p = run(pure, filtration)
        assert np.array_equal(result_c[0], result_p[0]), f"{name}: pair mismatch"
        assert np.array_equal(result_c[1], result_p[1]), f"{name}: death mismatch"
        print(
            f"{name:<22}{t_compiled:>11.3f}s{t_python:>11.3f}s"
            f"{t_python / max(t_compiled, 1e-9):>9.1f}x"
        )
    print("\nboth kernels produced identical persistence pairs on every case")


if __name__ == "__main__":
    main()
