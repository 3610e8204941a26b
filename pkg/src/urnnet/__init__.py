"""Reinforcing-urn opinion dynamics on finite connected graphs.

Agents hold urns of black (wrong-state) and white (true-state) balls, draw
with replacement each step, and reinforce with one ball per observed neighbor
draw. The package provides the exact stochastic process, brute-force exact
enumeration on tiny instances, the mean-field ODE limit with its consensus
prediction, a deterministic Monte Carlo replica harness, and beta/normal
fitting of the resulting limit-belief samples.
"""

from .graph import (
    DisconnectedError,
    Graph,
    GraphError,
    from_edge_list,
    laplacian,
    make_circulant_regular,
    make_complete,
    make_path,
    make_star,
    read_edge_list,
    write_edge_list,
)
from .montecarlo import (
    NoiseDiagnostics,
    ReplicaResult,
    RunConfig,
    derive_seed,
    noise_diagnostics,
    run_replica,
    run_sweep,
    write_samples_csv,
)
from .ode import (
    IntegrationError,
    OdeTrajectory,
    finite_time_field,
    integrate,
    mean_field,
    predicted_consensus,
    step_weight,
)
from .oracle import (
    DrawPath,
    EnumerationLimitError,
    enumerate_outcomes,
    enumerate_paths,
    one_step_expectation,
)
from .stats import (
    BetaFit,
    FitError,
    GofReport,
    NormalFit,
    SweepReport,
    alpha_sweep_report,
    digamma,
    fit_beta_mle,
    fit_normal,
    goodness_of_fit,
    ks_statistic,
    log_beta_fn,
    regularized_incomplete_beta,
    trigamma,
)
from .urns import (
    UrnState,
    degree_weighted_mean,
    init_fixed,
    init_signals,
    make_rng,
    proportions,
    run_steps,
    run_with_draws,
    spread,
    step,
)

__version__ = "0.1.0"
