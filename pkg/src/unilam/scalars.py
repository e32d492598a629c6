"""Complex scalar helpers: tolerance-based comparison and formatting.

Coefficients are plain Python ``complex`` values.  Arithmetic is ordinary
floating point; the tolerance only enters in comparisons.
"""

from __future__ import annotations

import cmath
import math
import os

DEFAULT_EPS = 1e-9

_ENV_VAR = "UNILAM_EPS"


def default_eps() -> float:
    """Comparison tolerance, overridable through UNILAM_EPS."""
    raw = os.environ.get(_ENV_VAR)
    if raw is None:
        return DEFAULT_EPS
    return float(raw)


def check_finite(c: complex) -> complex:
    """Reject NaN and infinite components."""
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError(f"non-finite scalar: {c!r}")
    return complex(c)


def approx(a: complex, b: complex, eps: float | None = None) -> bool:
    """|a - b| <= eps, the calculus-wide notion of scalar equality."""
    if eps is None:
        eps = default_eps()
    return abs(complex(a) - complex(b)) <= eps


def is_zero(a: complex, eps: float | None = None) -> bool:
    return approx(a, 0.0, eps)


def is_one(a: complex, eps: float | None = None) -> bool:
    return approx(a, 1.0, eps)


def format_scalar(c: complex, digits: int = 8) -> str:
    """Render a coefficient with ``digits`` significant digits.

    Pure reals print without an imaginary part, pure imaginaries as ``bi``.
    """
    c = complex(c)

    def fmt(x: float) -> str:
        if x == int(x) and abs(x) < 1e15:
            return str(int(x))
        return f"{x:.{digits}g}"

    if c.imag == 0.0:
        return fmt(c.real)
    if c.real == 0.0:
        if c.imag == 1.0:
            return "i"
        if c.imag == -1.0:
            return "-i"
        return fmt(c.imag) + "i"
    sign = "+" if c.imag >= 0 else "-"
    im = abs(c.imag)
    im_str = "i" if im == 1.0 else fmt(im) + "i"
    return f"({fmt(c.real)} {sign} {im_str})"


def phase_to_real(c: complex) -> complex:
    """Unit scalar u with u*c real nonnegative (u = conj(c)/|c|)."""
    r = abs(c)
    if r == 0.0:
        return 1.0 + 0.0j
    return c.conjugate() / r


SQRT2_INV = 1.0 / math.sqrt(2.0)


def cis(theta: float) -> complex:
    return cmath.exp(1j * theta)
