"""Quadratic dynamics, inducing-scheme pressure and zero-temperature Gibbs states."""
from .errors import (AmbiguousPrediction, BracketExhausted, DomainError, NoConvergence,
                     OrbitOverflow, PrecisionExhausted, SingularityError, ZerotempError)
from .dynamics import QuadraticMap, fixed_points, green_potential, boettcher, trace_external_ray
from .puzzle import RealTrace, cantor_data, critical_itinerary, find_parameter, kn_membership
from .deformation import build_deformation, deformation_data, verify_interpolation_identities
from .logscalar import Interval, LogEnclosure, LogScalar
from .appendix import PartitionScheme, block_sums, lambda_of_s, series_totals, verify_appendix_lemmas
from .pressure import (bowen_pressure, enumerate_landing_branches, enumerate_return_branches,
                       gibbs_mass_report, partition_function, peierls_margin, postcritical_series,
                       preimage_pressure)
from .scheduler import (build_hat_sequence, check_compatibility, dominant_block_prediction,
                        pressure_band, project_itinerary, schedule_from_temperatures,
                        temperature_window)

__version__ = "0.1.0"
