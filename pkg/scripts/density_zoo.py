#!/usr/bin/env python3
"""Exact integrals of the catalog densities over Z_p: geometric shell tails
for |x|^s ord(x)^t and exact character-sum cancellation for psi(1/x)."""

from fractions import Fraction

from padlab.cexp import parse
from padlab.dist import density_distribution
from padlab.padic import Box, ClopenSet
from padlab.schwartz import SchwartzBruhat


def main(p=3):
    region = ClopenSet.single(Box(p, (Fraction(0),), 0))
    one = SchwartzBruhat.indicator(region)
    print(f"integrals over Z_{p} (vol = 1):")
    for src in ("abs(x1)", "abs(x1)^2", "abs(x1)*ord(x1)",
                "abs(x1)^2*ord(x1)^2", "psi(1/x1)", "psi(1/x1)*ord(x1)"):
        mu = density_distribution(parse(src, p), region)
        val = mu.eval(one)
        print(f"  {src:24s} -> {val.to_string():>20s}  ({val.to_complex().real:+.6f})")
    closed = Fraction(1 - Fraction(1, p), 1 - Fraction(1, p * p))
    print(f"closed form for |x|: (1 - 1/p)/(1 - 1/p^2) = {closed}")


if __name__ == "__main__":
    main()
