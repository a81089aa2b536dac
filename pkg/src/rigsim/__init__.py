"""Random intersection graphs G(n, m, p): sampling, exploration and giant-component analysis."""

from .analysis import (
    GiantPrediction,
    behrisch_bound,
    edge_probability,
    er_bracket,
    expected_phi,
    pair_dependence,
    phi0_moments,
    solve_zeta,
)
from .errors import *  # noqa: F401,F403
from .genbip import BipartiteIncidence, incidence_stats, sample, sample_incidence
from .graph import (
    ComponentSummary,
    ExplorationTrace,
    IntersectionGraph,
    build_intersection,
    components,
    explore_faithful,
)
from .model import (
    AttributeProfile,
    RigConfig,
    ThresholdStat,
    make_uniform_profile,
    make_weighted_profile,
    validate_profile,
)
from .surrogate import marginal_alive_law, run_surrogate, thinning_sampler

__version__ = "0.1.0"
