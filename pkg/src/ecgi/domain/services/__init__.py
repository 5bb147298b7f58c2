"""Domain services."""

from .geometry import (
    build_lattice_mesh,
    center_rows,
    fibonacci_sphere_leads,
    graph_laplacian,
    synthesize_lead_field,
)
from .simulation import (
    activation_times,
    apd,
    pacing_for_origin,
    reference_cell_trajectory,
    scar_config_for_region,
    simulate,
    stability_limit,
)
from .corpus import (
    add_noise,
    default_corpus_spec,
    generate_corpus,
    make_test_cases,
    plan_held_out,
    split,
    validate_setting,
)
from .neural import (
    AdamState,
    DenseHead,
    GradCheckReport,
    LSTMLayer,
    adam_step,
    dense_backward,
    dense_forward,
    grad_check,
    init_dense,
    init_lstm,
    lstm_backward,
    lstm_forward,
)
from .svae import (
    decode,
    decoder_backward,
    decoder_forward,
    elbo_and_gradients,
    encode,
    estimate_z_prior,
    init_weights,
    kl_term,
    plausibility_fraction,
    reconstruction_rmse,
    reconstruction_term,
    sample_sequences,
    train,
)
from .regularization import LCurve, filter_factors, l_curve, ridge_solve
from .inversion import (
    MStepOutcome,
    NoiseEstimate,
    e_step,
    em_infer,
    estimate_beta,
    estimate_noise,
    expected_log_joint,
    initial_latent,
    log_prior_density,
    m_step_gradient,
    m_step_objective,
    m_step_update,
)
from .baselines import (
    FixedEPEstimate,
    GreensiteEstimate,
    fixed_ep_reconstruct,
    greensite_reconstruct,
    minimum_z_face,
)
from .metrics import (
    GroupSummary,
    MetricSummary,
    PairedComparison,
    aggregate,
    detect_scar,
    dice,
    nrmse,
    origin_error,
    paired_statistics,
    reconstructed_origin,
)

__all__ = [
    "build_lattice_mesh",
    "center_rows",
    "fibonacci_sphere_leads",
    "graph_laplacian",
    "synthesize_lead_field",
    "activation_times",
    "apd",
    "pacing_for_origin",
    "reference_cell_trajectory",
    "scar_config_for_region",
    "simulate",
    "stability_limit",
    "add_noise",
    "default_corpus_spec",
    "generate_corpus",
    "make_test_cases",
    "plan_held_out",
    "split",
    "validate_setting",
    "AdamState",
    "DenseHead",
    "GradCheckReport",
    "LSTMLayer",
    "adam_step",
    "dense_backward",
    "dense_forward",
    "grad_check",
    "init_dense",
    "init_lstm",
    "lstm_backward",
    "lstm_forward",
    "decode",
    "decoder_backward",
    "decoder_forward",
    "elbo_and_gradients",
    "encode",
    "estimate_z_prior",
    "init_weights",
    "kl_term",
    "plausibility_fraction",
    "reconstruction_rmse",
    "reconstruction_term",
    "sample_sequences",
    "train",
    "LCurve",
    "filter_factors",
    "l_curve",
    "ridge_solve",
    "MStepOutcome",
    "NoiseEstimate",
    "e_step",
    "em_infer",
    "estimate_beta",
    "estimate_noise",
    "expected_log_joint",
    "initial_latent",
    "log_prior_density",
    "m_step_gradient",
    "m_step_objective",
    "m_step_update",
    "FixedEPEstimate",
    "GreensiteEstimate",
    "fixed_ep_reconstruct",
    "greensite_reconstruct",
    "minimum_z_face",
    "GroupSummary",
    "MetricSummary",
    "PairedComparison",
    "aggregate",
    "detect_scar",
    "dice",
    "nrmse",
    "origin_error",
    "paired_statistics",
    "reconstructed_origin",
]
