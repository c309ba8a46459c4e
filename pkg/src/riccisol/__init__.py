"""riccisol: numerical verification of curvature identities on gradient
Ricci solitons.

The engine evaluates metrics given in closed form through truncated
Taylor-jet arithmetic, builds the full curvature pipeline (Riemann, Ricci,
Weyl, Cotton, Bach and their divergences up to fourth order) and certifies
the soliton identities and integrability conditions numerically.

Typical use:

    >>> from riccisol import zoo
    >>> from riccisol.soliton import SolitonBundle
    >>> entry = zoo.builtin("cigar_cross_line")
    >>> sb = SolitonBundle(entry.spec, entry.spec.sample_points(20, 0), 6)
    >>> sb.integrability_report().all_pass
    True
"""

from riccisol.curvature import CurvatureBundle
from riccisol.jet import InsufficientOrderError, Jet, JetDomainError
from riccisol.report import CheckRecord, CheckReport
from riccisol.soliton import SolitonBundle
from riccisol.tensor import JetTensor, MetricSpec

__all__ = [
    "CheckRecord",
    "CheckReport",
    "CurvatureBundle",
    "InsufficientOrderError",
    "Jet",
    "JetDomainError",
    "JetTensor",
    "MetricSpec",
    "SolitonBundle",
]

__version__ = "0.1.0"
