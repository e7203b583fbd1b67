"""Loss analysis and cache optimization for interference-cancelling
cellular networks.

Receivers that cache popular packets can reconstruct and subtract the
interference those packets create when nearby base stations serve them to
others.  This package computes the typical user's packet loss rate for such
networks three ways, and keeps them honest against each other:

* closed forms and quadrature for the loss rate of a Poisson network with
  distance-limited interference cancellation (:mod:`cachecancel.analytics`);
* a reproducible Monte Carlo simulator of the same network
  (:mod:`cachecancel.montecarlo`);
* a linear-programming optimizer for the distributed caching distribution
  that minimizes the average loss rate (:mod:`cachecancel.optimizer`).

See the ``cachecancel`` command line tool for ready-made experiments.
"""

from .analytics import (PlrQuery, average_plr, plr_full_cancellation,
                        plr_gain, plr_no_csi, plr_pair, plr_partial_csi,
                        plr_uniform)
from .config import (ExperimentSpec, load_config, parse_config, preset,
                     reference_network)
from .exceptions import (CacheCancelError, ConfigError, FullyCachedNetwork,
                         NumericalError, QuadratureError,
                         SeriesConvergenceError, SubsetCapError)
from .model import (CachingScheme, DerivedLoad, NetworkParams, PacketLibrary,
                    alpha_fractions, dbm_to_watts, derived_load, eta, q_bar,
                    sinr_threshold, zipf_popularity)
from .montecarlo import (PlrEstimate, SweepPoint, TrialConfig, TrialOutcome,
                         active_backend, available_backends,
                         average_plr_sim, default_window_radius,
                         estimate_plr, estimate_plr_labeled, run_trial,
                         sample_trials, sweep)
from .optimizer import (LpProblem, OptimizationResult, build_lp,
                        canonicalize, enumerate_subsets,
                        optimize_distributed_caching, result_from_json,
                        result_to_json, solve_lp)
from .specfun import (DEFAULT_QUADRATURE, LaplaceExponent, QuadratureSpec,
                      hyp2f1_real, interference_exponent_tail, z1)
from .svgplot import Series, render_chart

__version__ = "0.1.0"
