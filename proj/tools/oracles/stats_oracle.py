#!/usr/bin/env python3
"""Oracle for the statistical acceptance thresholds.

A silent collector forces one extra round; draws are independent across
rounds, so rounds-per-height is geometric with success probability 1-p:
  mean = 1/(1-p),  var = p/(1-p)^2.
For a frequency check of k draws landing on one index out of n (or one
stake interval d/D), the count is binomial(k, q):
  3sigma = 3*sqrt(k*q*(1-q)).
Prints the bounds the C++ tests freeze.
"""
import math


def geometric(p, m):
    mean = 1.0 / (1.0 - p)
    tol = 3.0 * math.sqrt(p) / ((1.0 - p) * math.sqrt(m))
    return mean, tol


def binom3(k, q):
    return 3.0 * math.sqrt(k * q * (1.0 - q))


def main():
    for n, f, m in [(5, 1, 1000), (9, 2, 1000), (33, 8, 1000)]:
        p = f / n
        mean, tol = geometric(p, m)
        print(f"n={n:2d} f={f} p={p:.4f} mean={mean:.6f} tol3s={tol:.6f} "
              f"cap=4/3+tol={4/3 + tol:.6f}")
    for k, q in [(10000, 1 / 5), (10000, 1 / 9), (10000, 3 / 4), (10000, 1 / 4),
                 (10000, 5 / 8), (100, 1 / 5)]:
        print(f"k={k} q={q:.4f} 3sigma={binom3(k, q):.3f}")


if __name__ == "__main__":
    main()
