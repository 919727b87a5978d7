"""p-adic linearization, gap certificates and tower counting for orbits of
split maps on (P^1)^g."""
from .errors import PadicGapError
from .kernels import BACKEND
from .padic_core import PadicInt, Prime, from_rational, vp
from .power_series import TruncatedSeries
from .dynamics import INF, ProjPoint, RationalMap
from .growth import MultiIndex, RationalPower, SlotSeries, verify_gap
from .pipeline import (
    Config,
    GapCertificate,
    MultiPoly,
    PeriodicWitness,
    ProblemInstance,
    analyze,
    boost,
    curve_case_analyze,
)
from .tower_counting import L_C, counting_check, up_arrow

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "PadicGapError",
    "PadicInt",
    "Prime",
    "from_rational",
    "vp",
    "TruncatedSeries",
    "INF",
    "ProjPoint",
    "RationalMap",
    "MultiIndex",
    "RationalPower",
    "SlotSeries",
    "verify_gap",
    "Config",
    "GapCertificate",
    "MultiPoly",
    "PeriodicWitness",
    "ProblemInstance",
    "analyze",
    "boost",
    "curve_case_analyze",
    "L_C",
    "counting_check",
    "up_arrow",
]
