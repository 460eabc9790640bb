"""Freeze Shapiro-Wilk reference values for the C++ test suite.

The vectors are regenerated on the C++ side from the same splitmix64 stream,
so only (family, n, seed) and the reference W/p are stored. scipy's shapiro
wraps the Fortran AS R94 routine and serves as the independent reference.

    python3 tests/oracle/shapiro_reference.py > tests/data/shapiro_reference.json
"""
import json
import math

from scipy import stats

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self):
        # (0, 1]: never returns 0 so log() is safe.
        return ((self.next() >> 11) + 1) * 2.0 ** -53

    def normal(self):
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def draw(family, n, seed):
    rng = SplitMix64(seed)
    if family == "normal":
        return [rng.normal() for _ in range(n)]
    if family == "uniform":
        return [10.0 * rng.uniform() for _ in range(n)]
    if family == "exponential":
        return [-math.log(rng.uniform()) for _ in range(n)]
    if family == "lognormal":
        return [math.exp(0.5 * rng.normal()) for _ in range(n)]
    if family == "student3":
        # normal / sqrt(chi2_3 / 3), heavy tails
        out = []
        for _ in range(n):
            z = rng.normal()
            chi = sum(rng.normal() ** 2 for _ in range(3))
            out.append(z / math.sqrt(chi / 3.0))
        return out
    raise ValueError(family)


def main():
    families = ["normal", "uniform", "exponential", "lognormal", "student3"]
    sizes = [10, 50, 500, 4999]
    cases = []
    for fi, family in enumerate(families):
        for si, n in enumerate(sizes):
            seed = 1000 + 17 * fi + si
            res = stats.shapiro(draw(family, n, seed))
            cases.append({"family": family, "n": n, "seed": seed,
                          "w": float(res.statistic), "p": float(res.pvalue)})
    print(json.dumps({"generator": "splitmix64", "cases": cases}, indent=1))


if __name__ == "__main__":
    main()
