"""Throughput-delay simulation and scaling laws for socially paired ad hoc networks."""
from .errors import (ClusterSizeError, ConfigurationError, DegeneratePairError, DomainError,
                     EmptyCellError, NumericError, RangeError, SocialHCError)
from .geometry import Deployment, NetworkConfig, deploy, distance, substream
from .hc import (FALLBACK, HcResult, MimoLink, SubnetworkPlan, assign_slots, decompose,
                 decompose_by_count, hc_power_per_node, mimo_capacity, side_length, simulate_hc)
from .harness import SlopeEstimate, SweepSpec, estimate_slope, fig8_experiment, run_sweep, trial_seed
from .mh import CellGrid, MhResult, build_cells, cell_load, route, simulate_mh
from .scaling import (TradeoffPoint, bursty_fraction, classify_regime, dominant_protocol,
                      hc_tradeoff_dense, hc_tradeoff_extended, mh_tradeoff_dense,
                      mh_tradeoff_extended)
from .social import (SocialAssignment, SocialParams, assign_social, empirical_mean_sd_distance,
                     sample_social_group, sd_tail_fraction, select_destination)

__version__ = "0.1.0"
