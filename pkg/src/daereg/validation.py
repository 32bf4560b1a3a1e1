"""Input checks shared by the estimator and the CLI."""

from __future__ import annotations

import numbers
from fractions import Fraction
from typing import Any, Sequence

from .dae import DaeSystem


def check_rational(x: Any) -> Fraction:
    """Exact rational from an int, Fraction, integral float or ``"p/q"`` string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip().replace("−", "-"))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational: {x!r}") from None
    if isinstance(x, numbers.Real):
        f = float(x)
        if f.is_integer():
            return Fraction(int(f))
        raise TypeError(f"non-integral float {x!r} is not accepted; pass a Fraction or 'p/q'")
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def check_rational_matrix(M: Any, shape: tuple[int, int] | None = None,
                          square: bool = False, name: str = "matrix") -> list:
    if hasattr(M, "tolist"):
        M = M.tolist()
    rows = [list(r) for r in M]
    if rows and len({len(r) for r in rows}) != 1:
        raise ValueError(f"{name} is ragged")
    out = [[check_rational(x) for x in r] for r in rows]
    nr, nc = len(out), (len(out[0]) if out else 0)
    if square and nr != nc:
        raise ValueError(f"{name} must be square, got {nr}x{nc}")
    if shape is not None and (nr, nc) != tuple(shape):
        raise ValueError(f"{name} must be {shape[0]}x{shape[1]}, got {nr}x{nc}")
    return out


def check_priority(p: Sequence[int], n: int, name: str = "priority") -> tuple:
    vals = tuple(p)
    if len(vals) != n:
        raise ValueError(f"{name} must have length {n}")
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, numbers.Integral) or v < 0:
            raise ValueError(f"{name} entries must be nonnegative integers, got {v!r}")
    return tuple(int(v) for v in vals)


def check_dae(X: Any) -> DaeSystem:
    """Accept a :class:`DaeSystem`, a preset/path string or a DAE-file dict."""
    if isinstance(X, DaeSystem):
        return X
    from .io import load_dae, parse_dae_file

    if isinstance(X, str):
        return load_dae(X).target
    if isinstance(X, dict):
        return parse_dae_file(X).target
    raise TypeError(f"expected a DaeSystem, preset name, path or DAE-file dict, got {type(X).__name__}")
