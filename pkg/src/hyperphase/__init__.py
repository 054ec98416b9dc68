"""Phase transitions of j-tuple components in random k-uniform hypergraphs."""
from .combinat import binom, rank_colex, unrank_colex, supersets
from .model import (threshold_p, critical_window_p, giant_fraction, chernoff_upper,
                    chernoff_lower, bdl_constants, ModelParams)
from .hypergraph import sample, aux_params, components_oracle, degree_profile
from .exploration import (ExplorationConfig, run_exploration, replay, classify_event,
                          extract_active_walk, certify_walk)
from .diagnostics import window_scan, concentration_scan, audit_degrees
from .branching import (OffspringLaw, simulate_total, survival_estimate, pgf_survival,
                        domination_check)

__version__ = "0.1.0"
