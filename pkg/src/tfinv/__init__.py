"""Numerical lab for translation- and modulation-invariant Hilbert spaces of functions."""
from .hermite import (DEFAULT_TOLERANCES, Grid, GridFunction, HermiteExpansion, SupportLeakageError,
                      Tolerances, analyze, evaluate, gauss_hermite_rule, hermite_table, multi_indices,
                      oscillator_power, pairing, synthesize)
from .growth import CHAIN, SpaceClass, canonical_expansion, classify, profile, report
from .fock import (BargmannFunction, bargmann, covariance_check, fock_seminorm, weyl,
                   weighted_sup_estimate)
from .spaces import (PlainL2, SobolevHs, WeightedL2, admissibility, estimate_v0, exact_v0_estimate,
                     make_model, mod_translate, submultiplicativity_defect)
from .averaging import (CubeSpec, averaged_inner, averaged_norm, invariance_defect, run_schedule)

__version__ = "0.1.0"
