"""eqlab: a numerical laboratory for equality reasoning in two-layer MLPs.

Subpackages cover the vector same-different task (`sdtask`), the
gamma-scaled MLP and its training loop (`mlp`), closed-form theory
(`theory`), Bayes-optimal baselines (`bayes`), the random-walker
approximation of rich dynamics (`markov`), weight diagnostics
(`analysis`), image tasks (`visiontask`), and sweep orchestration
(`harness`).  The hot training kernels live in a compiled extension
with a pure-NumPy fallback; see `eqlab.backend`.
"""

from .backend import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
