"""Near-field localization with a moving antenna array.

Modules
-------
geometry    platform trajectory, distances, aperture diagnostics
channel     spherical-wavefront steering vectors and derivatives
waveform    SEM / isotropic transmit designs and covariances
crb         Fisher information and position CRBs (exact and closed-form)
simulate    noisy received-signal synthesis
estimate    concentrated ML grid search, refinement, Monte-Carlo harness
experiments scenario configs, sweep/map/Monte-Carlo runners, CSV output
cli         command-line front end
"""

from .geometry import (
    ArrayConfig,
    DistanceField,
    Scene,
    antenna_position,
    array_size,
    distance_field,
    element_positions,
    extended_array_positions,
    platform_size,
    rayleigh_distance,
)
from .channel import (
    ResponsePair,
    SteeringBundle,
    extended_steering,
    extended_steering_bundle,
    response_pair,
    steering,
    steering_bundle,
    steering_bundle_all,
    steering_derivative,
)
from .waveform import (
    CovarianceSpec,
    WaveformSet,
    iso_extended,
    iso_fixed,
    iso_moving,
    iso_waveforms,
    sample_covariance,
    sem_extended,
    sem_fixed,
    sem_moving,
    sem_waveforms,
)
from .crb import (
    CrbReport,
    DegenerateGeometryError,
    Fim,
    GTerms,
    SingularFimError,
    asymptotic_ratio,
    crb_extended,
    crb_fixed,
    crb_from_fim,
    crb_moving_closed,
    crb_sem_approx,
    fim_moving,
    gterms_sem_approx,
)
from .simulate import Observation, load_observation, mean_vector, save_observation, synthesize
from .estimate import (
    DegenerateHypothesisError,
    EstimateResult,
    LikelihoodMap,
    MonteCarloResult,
    SearchRegion,
    b_tilde,
    concentrated_loglik,
    grid_search,
    monte_carlo_rmse,
    refine,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
