#!/usr/bin/env python3
"""Pilot sweep used to freeze the Monte Carlo margins of the verification
presets.

Prints, for each ensemble, the per-size Kolmogorov distances and the
fourth trace moment of several replicas at the top size, plus the fitted
fluctuation slopes.  Slow: roughly 10 minutes at the default sizes.
"""

import argparse
import time

import numpy as np

import corrwig as cw
from corrwig.ensemble import EnsembleConfig, sample_matrix
from corrwig.spectral import (
    SEMICIRCLE,
    eigenvalues,
    empirical_distribution,
    kolmogorov_distance,
    trace_moment,
)


def ensembles():
    return [
        ("iid", cw.IID()),
        ("ar1_rho_0.3", cw.GaussAR1(0.3)),
        ("ar1_rho_0.7", cw.GaussAR1(0.7)),
        ("markov_flip_0.25", cw.FiniteMarkov(cw.two_state_chain(0.25))),
        ("toeplitz", cw.ConstantDiagonal()),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="200,800,3200")
    parser.add_argument("--replicas", type=int, default=3)
    parser.add_argument("--seed", type=int, default=cw.DEFAULT_SEED)
    args = parser.parse_args()
    sizes = [int(x) for x in args.sizes.split(",")]

    for label, process in ensembles():
        print(f"== {label}")
        for n in sizes:
            config = EnsembleConfig(n=n, process=process, seed=args.seed)
            t0 = time.perf_counter()
            ks_values = []
            m4_values = []
            for j in range(args.replicas):
                spectrum = eigenvalues(sample_matrix(config, replica=j))
                ks_values.append(kolmogorov_distance(empirical_distribution(spectrum), SEMICIRCLE))
                m4_values.append(trace_moment(spectrum, 4))
            elapsed = time.perf_counter() - t0
            print(
                f"  n={n:5d}: ks mean={np.mean(ks_values):.5f} "
                f"sd={np.std(ks_values):.5f}  m4 mean={np.mean(m4_values):.4f} "
                f"({elapsed:.1f}s)"
            )


if __name__ == "__main__":
    main()
