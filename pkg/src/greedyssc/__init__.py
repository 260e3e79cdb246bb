"""Greedy (MP/OMP) sparse subspace clustering under bounded noise."""

__version__ = "0.1.0"

from .clustering import build_similarity, ccr, compute_metrics, spectral_cluster
from .estimator import GreedySubspaceClustering
from .extremal import f_extremes, mc_validate, noisy_inner_bounds
from .geometry import DataSet, SubspaceModel, aod, inradius_cluster, inradius_hull
from .greedy import GreedyConfig, GreedyTrace, mp_regress, omp_regress, regress, regress_all
from .guarantees import certify_run, check_first_selection, check_next_selection
from .synth import SynthSpec, generate

__all__ = [
    "DataSet",
    "GreedyConfig",
    "GreedySubspaceClustering",
    "GreedyTrace",
    "SubspaceModel",
    "SynthSpec",
    "aod",
    "build_similarity",
    "ccr",
    "certify_run",
    "check_next_selection",
    "check_first_selection",
    "compute_metrics",
    "f_extremes",
    "generate",
    "inradius_cluster",
    "inradius_hull",
    "mc_validate",
    "mp_regress",
    "noisy_inner_bounds",
    "omp_regress",
    "regress",
    "regress_all",
    "spectral_cluster",
]
