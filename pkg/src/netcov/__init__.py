"""Compatibility tests for network topologies with independent sources.

The central object is the covariance matrix of feature-mapped outcomes:
a distribution compatible with a hypothesized network decomposes it as a
block-diagonal PSD term plus one PSD term per source, each supported on
that source's children.  This package builds the covariances, runs the
semidefinite tests (with and without measurement settings), extracts and
evaluates dual witnesses, simulates small quantum scenarios, and compares
against the Finner, entropic, and inflation baselines.
"""

from .baselines import (AsymmetricDistribution, entropic_test, finner_dichotomic_opt,
                        finner_indicator, inflation_test)
from .covariance import (BlockMatrix, FeatureMapSet, covariance_from_distribution,
                         observable_covariance, orthonormal_maps,
                         pq_covariance_closed_form, reflect)
from .distributions import (DistributionTable, joint_table, load_distribution,
                            pq_distribution, save_distribution)
from .net_tests import (DecompositionInfeasible, FeasibilityCertificate,
                        InconclusiveError, TestVerdict, Verdict, bisect_threshold,
                        dual_witness, inputs_feasibility, primal_feasibility,
                        random_selection_test, selection_test)
from .quantum_sim import (NetworkRealization, conditional_distribution, distribution,
                          ghz_state, lemma1_check, lemma2_completion, pr_box_mixture,
                          random_realization, singlet, w_state)
from .sdp_core import hermitian_real_embedding
from .topology import (BlockLayout, NetworkTopology, all_bipartite, all_k_partite,
                       layout_for, load_topology, orphan_children, parent_support,
                       star, triangle, validate)
from .witnesses import (Witness, analytic_boundary, evaluate, kappa, q0,
                        validate_witness, w_2n, w_ghz)

__version__ = "0.1.0"

__all__ = [
    "AsymmetricDistribution", "BlockLayout", "BlockMatrix",
    "DecompositionInfeasible", "DistributionTable", "FeasibilityCertificate",
    "FeatureMapSet", "InconclusiveError", "NetworkRealization",
    "NetworkTopology", "TestVerdict", "Verdict", "Witness", "all_bipartite",
    "all_k_partite", "analytic_boundary", "bisect_threshold",
    "conditional_distribution", "covariance_from_distribution", "distribution",
    "dual_witness", "entropic_test", "evaluate", "finner_dichotomic_opt",
    "finner_indicator", "ghz_state", "hermitian_real_embedding",
    "inflation_test", "inputs_feasibility", "joint_table", "kappa",
    "layout_for", "lemma1_check", "lemma2_completion", "load_distribution",
    "load_topology", "observable_covariance", "orphan_children",
    "orthonormal_maps", "parent_support", "pq_covariance_closed_form",
    "pq_distribution", "pr_box_mixture", "primal_feasibility", "q0",
    "random_realization", "random_selection_test", "reflect",
    "save_distribution", "selection_test", "singlet", "star", "triangle",
    "validate", "validate_witness", "w_2n", "w_ghz", "w_state",
]
