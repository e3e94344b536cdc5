"""Integer-microsecond time base and its text form.

All engine arithmetic happens on integer microsecond ticks so runs are
byte-reproducible. Text surfaces (CSV, JSON, logs) express time in seconds
with at most six decimal places, which maps onto ticks exactly.
"""

from __future__ import annotations

TICKS_PER_SECOND = 1_000_000


def parse_seconds(text: str) -> int:
    """Parse a seconds value such as ``2``, ``0.5`` or ``1.234567`` into ticks.

    Raises ValueError for negative, malformed, or more-than-6-decimal input.
    """
    s = text.strip()
    if s.startswith("+"):
        s = s[1:]
    if not s:
        raise ValueError(f"empty time value: {text!r}")
    if s.startswith("-"):
        raise ValueError(f"negative time value: {text!r}")
    whole, dot, frac = s.partition(".")
    if len(frac) > 6:
        raise ValueError(f"more than 6 decimal places: {text!r}")
    if whole == "" and frac == "":
        raise ValueError(f"malformed time value: {text!r}")
    whole = whole or "0"
    frac = frac.ljust(6, "0") if dot else "000000"
    if not whole.isdigit() or not frac.isdigit():
        raise ValueError(f"malformed time value: {text!r}")
    return int(whole) * TICKS_PER_SECOND + int(frac)


def format_seconds(ticks: int) -> str:
    """Render ticks as seconds, trailing zeros trimmed (canonical form)."""
    if ticks < 0:
        raise ValueError(f"negative tick count: {ticks}")
    whole, frac = divmod(ticks, TICKS_PER_SECOND)
    if frac == 0:
        return str(whole)
    return f"{whole}.{frac:06d}".rstrip("0")


def format_float_seconds(seconds: float) -> str:
    """Render a non-integral seconds quantity (e.g. a mean) with <=6 decimals."""
    text = f"{seconds:.6f}".rstrip("0").rstrip(".")
    return text or "0"


def format_fixed3(value: float) -> str:
    """Three fixed decimals, used for percentages, utilization and joules."""
    return f"{value:.3f}"


def parse_watts(text: str) -> float:
    """Parse a finite non-negative power value in watts."""
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"malformed power value: {text!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(f"power value must be finite: {text!r}")
    if value < 0:
        raise ValueError(f"power value must be non-negative: {text!r}")
    return value


def format_watts(value: float) -> str:
    return format_float_seconds(value)
