"""Extended-real helpers.

Values in R U {+inf} are plain floats. The helpers here are the only
places that build them, so NaN never leaks into objectives or gaps.
"""
import math
from typing import Iterable

ExtReal = float

INF = math.inf


def ext_real(value: float) -> ExtReal:
    """Validate a float as an extended real (finite or +/-inf, never NaN)."""
    value = float(value)
    if math.isnan(value):
        raise ValueError("extended real value cannot be NaN")
    return value


def ext_sum(values: Iterable[float]) -> ExtReal:
    """Sum with +inf absorbing; a -inf term is an error unless no +inf is present."""
    total = 0.0
    has_pos_inf = False
    for v in values:
        v = ext_real(v)
        if v == INF:
            has_pos_inf = True
        else:
            total += v
    if has_pos_inf:
        if total == -INF:
            raise ValueError("cannot add +inf and -inf")
        return INF
    return ext_real(total)
