#!/usr/bin/env python3
"""Wave-front scan of the measure carried by the parabola x2 = x1^2 over Z_3:
the nonvanishing cells line up with the conormal bundle, and the
holonomicity check accepts the parabola and rejects a flat line."""

from fractions import Fraction

from padlab.dist import graph_measure
from padlab.graphs import GraphManifold
from padlab.micro import ConormalPresentation, ScanParams, holonomicity_check, wf_scan
from padlab.padic import Box, ClopenSet
from padlab.ratterm import RatTerm


def main(p=3):
    base = ClopenSet.single(Box(p, (Fraction(0),), 0))
    W = GraphManifold(p, base, (RatTerm.var(0) ** 2,))
    xi = graph_measure(W)
    region = ClopenSet.single(Box(p, (Fraction(0), Fraction(0)), 0))
    params = ScanParams(k_x=1, k_y=1, k_test=2, n_min=1, n_max=3)
    report = wf_scan(xi, region, params)
    bad = report.nonvanishing()
    print(f"scanned {len(report.cells)} cells; {len(bad)} nonvanishing:")
    for x_rep, y_rep in bad:
        xs = ",".join(map(str, x_rep))
        ys = ",".join(map(str, y_rep))
        print(f"  x in ({xs}) + {p}^{params.k_x} Z, direction ({ys})")
    good = holonomicity_check(report, [ConormalPresentation(W)])
    print("holonomicity with the parabola conormal:", "PASS" if good.passes else "FAIL")
    flat = ConormalPresentation(GraphManifold(p, base, (RatTerm.const(0),)))
    wrong = holonomicity_check(report, [flat])
    print("holonomicity with a flat line instead:  ",
          "PASS" if wrong.passes else f"FAIL ({len(wrong.violations)} violations)")


if __name__ == "__main__":
    main()
