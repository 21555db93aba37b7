"""Binary classification with randomly flipped training labels.

The package splits into five parts:

* ``calculus``    — closed-form clean/noisy posterior relations, corrected
                    decision thresholds, flipped-Bernoulli rate recovery
* ``synthdata``   — Gaussian-mixture problems with exact posteriors,
                    sampling, label flipping, CSV round trip
* ``mlp``         — small tanh network, hand-written backprop, training,
                    bias-shift/threshold duality
* ``experiments`` — the two deterministic study grids with CSV/SVG output
* ``cli``         — batch command-line front end
"""

__version__ = "0.1.0"

from .calculus import (
    ClassPriors,
    NoiseParams,
    bernoulli_grid_mle,
    clamp01,
    corrupt_posterior,
    error_amplification,
    logit_shift,
    mle_flipped_bernoulli,
    noisy_decision_threshold,
    propagate_priors,
    recover_posterior,
    threshold_from_priors,
    threshold_from_shift,
)
from .mlp import (
    Architecture,
    Gradients,
    MlpParams,
    ModelFormatError,
    TrainConfig,
    TrainingDivergedError,
    TrainResult,
    classify,
    forward,
    grad,
    init_params,
    load_model,
    loss,
    save_model,
    score,
    shift_bias,
    sigmoid,
    train,
)
from .seeding import derive_seed, make_rng
from .synthdata import (
    Dataset,
    DatasetFormatError,
    GmmClassModel,
    LabeledSample,
    ProblemInstance,
    bayes_accuracy,
    clean_posterior,
    flip_labels,
    gmm_density,
    gmm_log_density,
    load_dataset_csv,
    make_random_problem,
    sample_dataset,
    save_dataset_csv,
)
from .experiments import (
    EfficiencyGridConfig,
    FlipRatioGridConfig,
    ResultRow,
    SummaryRow,
    run_efficiency_grid,
    run_flip_ratio_grid,
    summarize,
    write_results_csv,
    write_summary_csv,
)
