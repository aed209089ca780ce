"""Structured singular value for the block structure [w] (+) z I_{n-1}, its quotient
coordinates, and matrix-valued Nevanlinna-Pick interpolation through the quotient."""

from .errors import InputError, MuQuotientError, NumericalError
from .matrices import GroupElement, MinorMode, companion, char_poly, conjugate, minor_sum
from .mu import MuResult, WitnessPair, in_omega, mu_brute, mu_eval, mu_eval_batch, mu_feasible, witness_pair
from .numerics import ComplexPoly, poly_roots, resultant
from .pick import (
    LiftArtifacts,
    NecessaryReport,
    PickDataset,
    QuotientMap,
    lift,
    lift_report,
    necessary_report,
    synthesize_instance,
)
from .quotient import (
    QuotientPoint,
    genericity,
    membership_char1,
    membership_char2,
    membership_reference,
    membership_scan,
    pi_n,
    realize,
)
from .verdict import MembershipVerdict, Verdict

__version__ = "0.1.0"
