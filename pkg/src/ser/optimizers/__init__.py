from .baselines import ga_optimize, gwo_optimize, pso_optimize
from .common import (
    FitnessError,
    FitnessRecord,
    MrfoConfig,
    OptimizerConfig,
    Population,
    SearchAgent,
    SearchSpace,
)
from .mrfo import chain_step, cyclone_step, mrfo_init, mrfo_optimize, somersault_step
from .selection import (
    ALGORITHMS,
    FeatureMask,
    SelectionObjective,
    SelectionResult,
    binarize,
    feature_selection_fitness,
    get_optimizer,
    select_features,
)
