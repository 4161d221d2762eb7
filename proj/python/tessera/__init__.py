"""Stencil computation engine bindings.

The C++ core provides a reference executor plus tessellated, vectorized,
matrix-multiply and heterogeneous execution paths; this package re-exports
the compiled module.
"""

from ._tessera import *  # noqa: F401,F403
from ._tessera import __doc__ as _core_doc

__version__ = "0.1.0"
__doc__ = _core_doc
