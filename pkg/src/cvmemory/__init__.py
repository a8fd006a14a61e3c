"""Simulation and certification of continuous-variable quantum memories."""
from .bounds import eb_bound, equivalent_sigma, fisher_gaussian, fisher_smoothflat, smooth_indicator
from .channels import (
    ChannelClassification,
    ConsistencyError,
    GIBChannelError,
    RecalibrationPlan,
    amplifier,
    classify,
    compose,
    photon_loss,
    synthesize_recalibration,
)
from .experiment import ExperimentConfig, WitnessResult, estimate_witness
from .phasespace import (
    GaussianChannel,
    GaussianState,
    apply_channel,
    balanced_beamsplitter,
    coherent_state,
    identity_channel,
    sample_heterodyne,
    sample_homodyne,
    tensor,
    williamson_1mode,
)
from .protocol import (
    GaussianPrior,
    JointStrategy,
    OneWayLOCCStrategy,
    QuantumProbe,
    SmoothFlatPrior,
    eb_prior_mean_strategy,
    eb_shrinkage_strategy,
    generic_recalibrated_strategy,
    honest_strategy,
    run_round,
    run_rounds,
    tailored_loss_strategy,
)

__version__ = "0.1.0"
