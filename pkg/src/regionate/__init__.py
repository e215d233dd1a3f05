"""regionate: spatially constrained spectral clustering for landscapes.

Partition the units of a geographic dataset into regions that are
homogeneous in feature space and (softly) contiguous on a must-link
adjacency graph. Partitional methods (``ssc``, ``bssc``, ``scm``) cut
once at a chosen k; hierarchical ones (``hssc`` plus four constrained
agglomerative linkages) produce a replayable merge tree. A metric suite
(ssw, pct_ml, contiguity_c, cbalance, adjusted_rand) scores the results.

Both a functional API (``delineate``, ``hssc``, ``agglomerative``,
``preprocess``, ``evaluate``) and sklearn-style estimators
(``SpectralRegions``, ``DivisiveSpectralRegions``,
``ConstrainedAgglomerative``, ``FeaturePreprocessor``) are provided.
"""

from .affinity import (LaplacianPair, combine_hadamard, combine_weighted,
                       laplacian, median_bandwidth, rbf_similarity,
                       support_components)
from .data import (Dataset, FeatureMatrix, SyntheticSpec, generate_synthetic,
                   lattice_graph, load_dataset, read_labels, save_dataset,
                   write_labels)
from .embedding import (SpectralEmbedding, fix_signs, generalized_eigs,
                        spectral_embedding)
from .errors import (DataFormatError, DegenerateAffinityWarning,
                     NumericalError, RegionateError)
from .graph import (ConstraintGraph, ConstraintKernel, binarized_kernel,
                    exponential_kernel, linear_kernel,
                    truncated_exponential_kernel)
from .hierarchy import (LINKAGES, ConstrainedAgglomerative,
                        DivisiveSpectralRegions, MergeRecord, MergeTree,
                        SplitRecord, agglomerative, canonical_labels, hssc,
                        read_tree_log, replay_merges, replay_splits)
from .metrics import (MetricReport, adjusted_rand, cbalance, contiguity_c,
                      evaluate, pct_ml, region_connectivity, ssw)
from .partitional import (METHODS, DelineationResult, KMeansResult,
                          MethodConfig, SpectralRegions, delineate, kmeans)
from .preprocess import FeaturePreprocessor, preprocess

__version__ = "0.1.0"

__all__ = [
    "ConstrainedAgglomerative",
    "ConstraintGraph",
    "ConstraintKernel",
    "DataFormatError",
    "Dataset",
    "DegenerateAffinityWarning",
    "DelineationResult",
    "DivisiveSpectralRegions",
    "FeatureMatrix",
    "FeaturePreprocessor",
    "KMeansResult",
    "LINKAGES",
    "LaplacianPair",
    "METHODS",
    "MergeRecord",
    "MergeTree",
    "MethodConfig",
    "MetricReport",
    "NumericalError",
    "RegionateError",
    "SpectralEmbedding",
    "SpectralRegions",
    "SplitRecord",
    "SyntheticSpec",
    "adjusted_rand",
    "agglomerative",
    "binarized_kernel",
    "canonical_labels",
    "cbalance",
    "combine_hadamard",
    "combine_weighted",
    "contiguity_c",
    "delineate",
    "evaluate",
    "exponential_kernel",
    "fix_signs",
    "generalized_eigs",
    "generate_synthetic",
    "hssc",
    "kmeans",
    "laplacian",
    "lattice_graph",
    "linear_kernel",
    "load_dataset",
    "median_bandwidth",
    "pct_ml",
    "preprocess",
    "rbf_similarity",
    "read_labels",
    "read_tree_log",
    "region_connectivity",
    "replay_merges",
    "replay_splits",
    "save_dataset",
    "spectral_embedding",
    "ssw",
    "support_components",
    "truncated_exponential_kernel",
    "write_labels",
]
