#!/usr/bin/env python3
"""Monomialization certificates: a unit-swallowing chart for
x1^3 x2^2 (1 + 5 x1) over Q_5, and square-class power charts for x1^2."""

from fractions import Fraction

from padlab.cexp import parse_ratterm
from padlab.charts import Poly, certify_resolution, unit_swallow_chart
from padlab.cli import build_power_charts


def main():
    p = 5
    f = [parse_ratterm("x1^3*x2^2*(1+5*x1)")]
    u = Poly(2, {(0, 0): Fraction(1), (1, 0): Fraction(5)})
    chart, nf = unit_swallow_chart(u, (3, 2), p, prec=16)
    print(f"swallowing chart over Q_{p}: pullback normal form "
          f"d={nf.coef}, exponents={nf.exps}, unit=1")
    cert = certify_resolution([chart], f, p, sampling_level=5, prec=16, samples=60)
    print(cert.summary())
    print()
    for p in (3, 5):
        charts = build_power_charts(2, p, 1, prec=16)
        print(f"square charts over Q_{p}: {', '.join(str(c) for c in charts)}")
        cert = certify_resolution(charts, [parse_ratterm("x1^2")], p,
                                  sampling_level=5, prec=16, samples=60)
        print(cert.summary())
        print()


if __name__ == "__main__":
    main()
