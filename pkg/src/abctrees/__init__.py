"""ABC index of trees: evaluation, extremal search and lemma verification."""
from ._backend import BACKEND
from .branches import (
    B,
    B1Minus,
    B3StarStar,
    BranchKind,
    BStar,
    C,
    FamilyConfig,
    assemble,
    build_branch,
    closed_form_abc,
    recognize,
)
from .enumeration import SearchResult, brute_force_min, free_trees, min_by_degree_sequence
from .graph import (
    DegreeSequence,
    RootedTree,
    Tree,
    abc_index,
    canonical_code,
    compare_subtrees,
    degree_sequence,
    edge_weight,
    free_code,
    path_tree,
    root_at,
    root_by_max_degree,
    star_tree,
)
from .lemmas import (
    SweepReport,
    SweepSpec,
    aux_deltas,
    delta_7k8,
    delta_ck_split,
    delta_compactify,
    delta_dis2,
    delta_kk,
    delta_uexc,
    lemma_ids,
    sweep,
)
from .search import (
    C0,
    FamilySearchResult,
    GammaBounds,
    family_search,
    gamma_bounds,
    greedy_tree,
    transition_scan,
)
from .structure import validate_structure
from .transforms import Move, exchange, extremal_canonicalize, legal_similarity, local_search

__version__ = "0.1.0"
