"""The DAE container shared by every stage of the pipeline."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .symexpr import Expr, canonicalize, max_order, params_of, to_sexpr


@dataclass(frozen=True)
class DaeSystem:
    """``n`` equations ``f_i = 0`` in ``n`` unknown functions of time.

    Variable ``j`` (1-based) of every equation refers to ``variables[j-1]``.
    ``functions`` holds float evaluators for opaque function names, used
    only by numeric diagnostics.
    """

    equations: tuple
    variables: tuple
    functions: Mapping[str, Callable[[float], float]] = field(default_factory=dict,
                                                             compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(self.equations))
        object.__setattr__(self, "variables", tuple(self.variables))
        if len(self.equations) != len(self.variables):
            raise ValueError(f"{len(self.equations)} equations for "
                             f"{len(self.variables)} variables")
        n = len(self.variables)
        for i, e in enumerate(self.equations):
            if not isinstance(e, Expr):
                raise TypeError(f"equation {i + 1} is not an Expr")
            for j, _ in e.vars:
                if not 1 <= j <= n:
                    raise ValueError(f"equation {i + 1} references variable {j} of {n}")

    @property
    def n(self) -> int:
        return len(self.equations)

    @property
    def order(self) -> int:
        """Highest derivative order occurring anywhere (``k``)."""
        return max((max_order(e) for e in self.equations), default=0)

    @property
    def parameters(self) -> tuple:
        names: set[str] = set()
        for e in self.equations:
            names |= params_of(e)
        return tuple(sorted(names))

    def replace(self, equations: Sequence[Expr] | None = None,
                variables: Sequence[str] | None = None, name: str | None = None) -> "DaeSystem":
        return DaeSystem(self.equations if equations is None else tuple(equations),
                         self.variables if variables is None else tuple(variables),
                         self.functions,
                         self.name if name is None else name)

    def canonical(self) -> "DaeSystem":
        return self.replace([canonicalize(e) for e in self.equations])

    def pretty(self) -> str:
        return "\n".join(f"  f{i + 1}: {to_sexpr(e, self.variables)}"
                         for i, e in enumerate(self.equations))


def generic_function(name: str) -> Callable[[float], float]:
    """Deterministic smooth stand-in for an opaque function without evaluator."""
    h = zlib.crc32(name.encode("utf-8"))
    phase = (h % 1000) / 1000.0 * math.pi
    scale = 0.5 + ((h >> 10) % 1000) / 1000.0
    return lambda z: math.sin(scale * z + phase) + 1.7 + 0.1 * z
