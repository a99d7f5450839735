"""Adaptive CP tensor completion: complete a few slices, diagonalize, fill in by fibers."""

from .censored import lstsq_shared, restricted_khatri_rao, solve_C
from .errors import (
    BudgetExceeded,
    DegenerateEigenvalues,
    IllConditionedFibers,
    NonRealSpectrum,
    PreconditionError,
    RankCapExceeded,
    RankDeficient,
    StructuralError,
    TensorSandwichError,
)
from .fibers import fibers_to_omega2, select_fibers
from .jennrich import JennrichResult, aggregate, draw_sphere, jennrich_factors
from .oracle import SampleReport, SampleSet, SamplingOracle
from .sandwich import (
    CompletionReport,
    SandwichConfig,
    masked_als,
    masked_als_entries,
    random_init,
    tensor_sandwich,
)
from .slices import (
    SliceCompletion,
    SliceCompletionConfig,
    column_samples_for_budget,
    complete_slice,
    complete_slices,
    default_column_samples,
    default_slice_budget,
)
from .tensor import (
    CPModel,
    add_noise_snr,
    coherence,
    cp_to_dense,
    fold3,
    generate_synthetic,
    khatri_rao,
    kruskal_rank_at_least_2,
    relative_error,
    subspace_coherence,
    unfold3,
    vec_slice,
)

__version__ = "0.1.0"
