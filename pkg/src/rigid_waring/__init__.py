"""Rigid homotopy continuation for polynomial systems given as sums of powers of linear forms."""

from .conditioning import gamma_estimate, gamma_frob_exact, kappa, split_gamma
from .continuation import TrackConfig, TrackResult, certified_track, heuristic_track, newton_correct
from .errors import (ArgumentError, BranchAmbiguityError, CapacityError, DomainError, SamplingError,
                     SingularPointError)
from .geometry import RigidPath, haar_unitary, principal_log
from .sampling import StartPair, sample_start_pair
from .waring import WaringPolynomial, WaringSystem, random_system, unitary_action

__version__ = "0.1.0"
