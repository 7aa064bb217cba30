"""Rational number backend selection.

``DIRACGB_RATIONAL=gmpy2`` (default when importable) uses ``gmpy2.mpq``;
``DIRACGB_RATIONAL=fraction`` forces the pure-Python ``fractions.Fraction``
path.  Both expose ``numerator``/``denominator`` and render as ``num/den``.
"""

import os
from fractions import Fraction

_requested = os.environ.get("DIRACGB_RATIONAL", "gmpy2").strip().lower()

if _requested not in ("gmpy2", "fraction"):
    raise ImportError(f"DIRACGB_RATIONAL must be 'gmpy2' or 'fraction', got {_requested!r}")

BACKEND = "fraction"
Q = Fraction

if _requested == "gmpy2":
    try:
        from gmpy2 import mpq as Q  # noqa: F811

        BACKEND = "gmpy2"
    except ImportError:  # pragma: no cover - depends on environment
        pass

RATIONAL_TYPES = (int, Fraction) if BACKEND == "fraction" else (int, Fraction, type(Q(1)))
