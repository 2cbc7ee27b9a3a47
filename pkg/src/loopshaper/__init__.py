"""Model-free loop-shaping controller design via iterative learning control.

Design a feedback controller matching a desired loop gain using only
input/output trials of the plant: learn an inverse FIR learning filter,
track the desired loop gain's impulse response with ILC, and reduce the
learned FIR controller to a low-order IIR for real-time use.
"""

from .errors import (
    AnticausalController,
    AssumptionViolation,
    BoundCertificationWarning,
    ConfigError,
    DegenerateOracle,
    DivergenceError,
    ImproperTransferFunction,
    LoopShaperError,
    NoCrossover,
    PoleOnGrid,
    RootFindingError,
    SampleRateMismatch,
    SettlingHorizonWarning,
    TailSettlingWarning,
    UnstableReduction,
    UnstableReference,
    UnstableSystem,
)
from .ilc import IlcConfig, IlcResult, empirical_convergence_rate, ilc_run
from .inverse_filter import (
    InverseLearnConfig,
    ReferenceShaping,
    initial_learning_filter,
    learn_inverse,
)
from .lti import (
    Cascade,
    RationalTf,
    aberth_roots,
    feedback_unity,
    freq_response,
    impulse_response,
    load_tf,
    poles,
    save_tf,
    series,
    simulate,
    step_response,
    zeros,
)
from .metrics import (
    DesignSpec,
    SpecReport,
    StepMetrics,
    check_specs,
    closed_loop,
    loop_step_metrics,
    stability_margins,
    step_metrics,
)
from .pipeline import (
    LoopShapeConfig,
    LoopShapeResult,
    build_reference,
    check_assumption_2,
    reconstruct_controller,
    run_loopshaping,
    split_frequency_weight,
)
from .plant import PlantOracle, SubprocessPlant, TfPlant, probe_relative_order
from .reduction import (
    ReductionResult,
    balanced_reduce,
    grid_hinf_error,
    hankel_singular_values,
)
from .signals import (
    Sequence,
    TwoSidedFir,
    convolve,
    delta,
    l2_norm,
    load_fir,
    load_sequence,
    rewindow,
    rms,
    save_fir,
    save_sequence,
    to_db,
    zero_phase_lowpass,
)

__version__ = "0.1.0"

__all__ = [
    "AnticausalController",
    "AssumptionViolation",
    "BoundCertificationWarning",
    "Cascade",
    "ConfigError",
    "DegenerateOracle",
    "DesignSpec",
    "DivergenceError",
    "IlcConfig",
    "IlcResult",
    "ImproperTransferFunction",
    "InverseLearnConfig",
    "LoopShapeConfig",
    "LoopShapeResult",
    "LoopShaperError",
    "NoCrossover",
    "PlantOracle",
    "PoleOnGrid",
    "RationalTf",
    "ReductionResult",
    "ReferenceShaping",
    "RootFindingError",
    "SampleRateMismatch",
    "Sequence",
    "SettlingHorizonWarning",
    "SpecReport",
    "StepMetrics",
    "SubprocessPlant",
    "TailSettlingWarning",
    "TfPlant",
    "TwoSidedFir",
    "UnstableReduction",
    "UnstableReference",
    "UnstableSystem",
    "aberth_roots",
    "balanced_reduce",
    "build_reference",
    "check_assumption_2",
    "check_specs",
    "closed_loop",
    "convolve",
    "delta",
    "empirical_convergence_rate",
    "feedback_unity",
    "freq_response",
    "grid_hinf_error",
    "hankel_singular_values",
    "ilc_run",
    "impulse_response",
    "initial_learning_filter",
    "l2_norm",
    "learn_inverse",
    "load_fir",
    "load_sequence",
    "load_tf",
    "loop_step_metrics",
    "poles",
    "probe_relative_order",
    "reconstruct_controller",
    "rewindow",
    "rms",
    "run_loopshaping",
    "save_fir",
    "save_sequence",
    "save_tf",
    "series",
    "simulate",
    "split_frequency_weight",
    "stability_margins",
    "step_metrics",
    "step_response",
    "to_db",
    "zero_phase_lowpass",
    "zeros",
]
