"""Essay scoring with character n-gram string kernels, bags of super word
embeddings and nu-SVR. The heavy lifting lives in the compiled ``_kaes``
extension; this package re-exports it."""

from ._kaes import *  # noqa: F401,F403

__version__ = "0.1.0"
