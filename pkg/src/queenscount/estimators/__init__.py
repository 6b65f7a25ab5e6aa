"""Solution-count estimators."""
from .ce import ce_count
from .naive import naive_count
from .nested import nested_sampling_count
from .replicas import merge_estimates, run_replicas
from .split_sampling import split_sampling_count
from .splitting import splitting_count
from .types import (DensityOfStates, Estimate, LevelSchedule, LevelWeight, ensemble_weight,
                    product_variance)
from .wang_landau import wang_landau_count

__all__ = [
    "Estimate", "LevelSchedule", "DensityOfStates", "LevelWeight", "product_variance", "ensemble_weight",
    "naive_count", "splitting_count", "ce_count", "nested_sampling_count", "split_sampling_count",
    "wang_landau_count", "run_replicas", "merge_estimates",
]
