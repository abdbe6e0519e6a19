"""pufkit: RO-PUF secret-key generation toolkit.

Multiplication-free orthogonal sign transforms, bit extraction with
histogram equalization and Gray-coded quantization, BCH-based fuzzy
commitment, and analytic reliability / rate-region evaluation.
"""

__version__ = "0.1.0"

from . import analysis, bch, fcs, pipeline, rodata, transforms  # noqa: F401
