"""Online matching under general vertex arrivals."""

from .fractional import KAPPA_OPT, WWParams, beta_star, f_kappa, run_fractional, solve_theta
from .graph_core import ArrivalInstance, EdgeArrivalInstance, maximum_matching, parse_instance, dump_instance
from .hardness import dual_certificate, generate_hard_instance, prefix_competitive_ratio, verify_certificate
from .harness import ExperimentSpec, generate_family, run_trials, summarize
from .rounding import RoundingConfig, exact_free_distribution, run_improved, run_warmup

__version__ = "0.1.0"
