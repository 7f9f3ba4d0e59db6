""" Contains some shared types for report models """
import math
from typing import Any, Literal, Optional


class Unset:
    def __bool__(self) -> Literal[False]:
        return False

    def __repr__(self) -> str:
        return "UNSET"


UNSET: Unset = Unset()


def finite_or_none(value: Any) -> Optional[float]:
    """Return `value` as a float, or None when it is missing or not finite."""
    if value is None or isinstance(value, Unset):
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def none_to_nan(value: Any) -> float:
    return math.nan if value is None else float(value)


__all__ = ["Unset", "UNSET", "finite_or_none", "none_to_nan"]
