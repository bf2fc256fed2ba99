"""Kernel backend selection.

The SGD inner loop dominates sweep runtime, so it is implemented twice:
a Cython extension (`eqlab._ckernels`, BLAS-backed) and a pure-NumPy
fallback (`eqlab._pykernels`).  The compiled one is used when it
imports; set EQLAB_BACKEND=python to force the fallback, or
EQLAB_BACKEND=c to fail loudly if the extension is missing.
`scripts/benchmark_kernels.py` compares the two.
"""

import os

from . import _pykernels

_choice = os.environ.get("EQLAB_BACKEND", "").lower()

if _choice == "python":
    _impl = _pykernels
elif _choice == "c":
    from . import _ckernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

forward_centered_batch = _impl.forward_centered_batch
sgd_step_inplace = _impl.sgd_step_inplace


def backend_name():
    return _impl.BACKEND


def available_backends():
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401

        names.insert(0, "c")
    except ImportError:
        pass
    return names
