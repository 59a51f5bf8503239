"""Point counts, zeta functions, and slope invariants for the Dwork pencil
and its toric mirror over finite fields."""

__version__ = "0.1.0"

from .ff import PrimePower, FieldCtx, FqElem, build_field, extend, trace, dlog
from .padic import (
    TowerCtx,
    TowerElem,
    Valuation,
    build_tower,
    digit_sum,
    gauss_sum,
    pi_valuation,
    teich,
)
from .counting import (
    CountRecord,
    DworkInstance,
    SolutionVector,
    charsum_qcounts,
    count_affine_brute,
    count_record,
    count_torus_brute,
    count_X,
    count_Y,
    count_Y_strata_brute,
    enumerate_solutions,
    smoothness_probe,
)
from .zeta import (
    IntPoly,
    ZetaData,
    divide_check,
    expected_degree_P,
    power_sums_from_counts,
    r_poly,
    recover_mirror_zeta,
    recover_numerator,
    recover_pencil_zeta,
    weight_purity_check,
)
from .slope import (
    HodgeData,
    NewtonPolygon,
    PadicFactor,
    SlopeZeta,
    hodge_numbers_dwork,
    newton_above_hodge,
    newton_polygon,
    ordinarity_test,
    ordinary_slope_zeta,
    slope_factorization,
    slope_fe_check,
    slope_part,
    slope_zeta,
)

import types as _types

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, _types.ModuleType)]
