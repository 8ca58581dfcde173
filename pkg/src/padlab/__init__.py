"""padlab: exact harmonic and micro-local analysis on Q_p^n.

Everything computes in exact arithmetic: rationals inside Q_p, values in
the cyclotomic field Q(i, zeta_{p^r}).  Floats appear only in reports.
"""

from .cexp import (
    CexpExpr,
    CexpMonomialData,
    CexpSyntaxError,
    bounded_rewrite,
    constancy_level,
    parse,
    parse_ratterm,
)
from .charts import (
    HenselChart,
    PowerChart,
    certify_resolution,
    chart_image_membership,
    fiber_size,
    hensel_root,
    nth_power_test,
    unit_swallow_chart,
)
from .cyclotomic import ExactComplex, field_ops, is_zero, zeta
from .dist import (
    Distribution,
    NonIntegrable,
    UnsupportedShape,
    b_function,
    density_distribution,
    dirac,
    graph_measure,
    haar_on,
    loci_distribution,
    pushforward_chart,
)
from .extend import (
    MinCoordMap,
    TestSplit,
    extend_min_coord,
    graph_section_nu,
    min_coord_lift,
    regularize,
    test_split,
)
from .graphs import GraphManifold, point_manifold
from .micro import (
    ConormalPresentation,
    ScanParams,
    ScanReport,
    conormal_contains,
    holonomicity_check,
    smooth_locus_scan,
    wf_scan,
)
from .padic import (
    Box,
    ClopenSet,
    clopen_algebra,
    coset_rep,
    enumerate_cosets,
    norm,
    refine_partition,
    urysohn_clopen,
    valuation,
)
from .ratterm import NotInDomain, Poly, RatTerm
from .scene import Scene, SceneError, load_scene
from .schwartz import Character, SchwartzBruhat, fourier, integrate, plancherel_pairing, psi_eval

__all__ = [name for name in dir() if not name.startswith("_")]
