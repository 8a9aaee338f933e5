"""Counting and random generation of Git feature-branch graphs."""

from .counting import (
    CountTable,
    StirlingTable,
    build_count_table,
    build_stirling_table,
    count_closed_form,
    count_row,
    free_vertex_distribution,
    k_distribution,
    superset_count_h,
)
from .graph import (
    Branch,
    Cyclarium,
    GitGraph,
    InvalidGraph,
    canonical_encode,
    check,
    cyclarium_to_git_graph,
    validate,
)
from .sampling import (
    RandomSource,
    sample_boltzmann,
    sample_exact,
    sample_exact_size_only,
    sample_rejection,
)
from .tuning import BoltzmannParams, tune

__version__ = "0.1.0"
