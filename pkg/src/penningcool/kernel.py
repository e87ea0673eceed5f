"""Trajectory kernel selection.

Prefers the compiled Cython extension and falls back to the pure-Python
implementation when the extension is unavailable.  Both expose the same
`simulate_core` and produce bit-identical output for a given seed.

Set PENNINGCOOL_PURE_PYTHON=1 to force the fallback (used by the parity
tests and the benchmark).
"""

import os

if os.environ.get("PENNINGCOOL_PURE_PYTHON"):
    from . import _kernel_py as _impl
else:
    try:
        from . import _kernel as _impl
    except ImportError:
        from . import _kernel_py as _impl

simulate_core = _impl.simulate_core
USING_COMPILED = bool(_impl.COMPILED)
