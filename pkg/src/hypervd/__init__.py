"""HyperVD: weakly supervised audio-visual violence detection in hyperbolic space.

Lorentz-model manifold calculus, fully hyperbolic graph convolution over dual
feature-similarity / temporal-relation branches, detour multimodal fusion, a
hyperbolic classifier, and MIL training — all verifiable at desk scale on
synthetic data via the ``hypervd`` CLI.
"""

from .backend import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
