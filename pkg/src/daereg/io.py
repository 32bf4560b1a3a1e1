"""DAE files (JSON, ``schema: 1``) and serialisation helpers."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import exactla as la
from .dae import DaeSystem
from .symexpr import (BUILTIN_FUNCTIONS, Apply, SExprError, atoms_of, params_of,
                      parse_sexpr, to_sexpr)

__all__ = ["DaeFileError", "DaeFile", "parse_dae_file", "load_dae", "dae_to_json",
           "dump_json", "function_names"]

SCHEMA = 1


class DaeFileError(ValueError):
    pass


@dataclass
class DaeFile:
    """A parsed DAE; with a decomposition, the layer form is what gets analysed."""

    dae: DaeSystem
    decomposition: tuple | None = None  # (list of A_l, list of g_i)
    layer: Any = None

    def __post_init__(self):
        if self.layer is None and self.decomposition is not None:
            from .jacobian import layer_form

            A, g = self.decomposition
            self.layer = layer_form(self.dae, A, g)

    @property
    def target(self) -> DaeSystem:
        return self.layer.dae if self.layer is not None else self.dae


def function_names(dae: DaeSystem) -> list[str]:
    names: set[str] = set()
    for e in dae.equations:
        names |= {a.name for a in atoms_of(e, Apply) if a.name not in BUILTIN_FUNCTIONS}
    return sorted(names)


def _base_name(name: str) -> str:
    return name.rstrip("'")


def parse_dae_file(doc: dict[str, Any], source: str = "<input>") -> DaeFile:
    if not isinstance(doc, dict):
        raise DaeFileError(f"{source}: top level must be a JSON object")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise DaeFileError(f"{source}: unsupported schema {doc.get('schema')!r}")
    try:
        variables = [str(v) for v in doc["variables"]]
        equations = list(doc["equations"])
    except KeyError as exc:
        raise DaeFileError(f"{source}: missing field {exc.args[0]!r}") from None
    if len(variables) != len(equations):
        raise DaeFileError(f"{source}: {len(equations)} equations for {len(variables)} variables")
    if len(set(variables)) != len(variables):
        raise DaeFileError(f"{source}: duplicate variable names")
    params = [str(p) for p in doc.get("parameters", [])]
    declared = set()
    for f in doc.get("functions", []):
        declared.add(f["name"] if isinstance(f, dict) else str(f))

    def parse(text: str, where: str):
        try:
            e = parse_sexpr(text, variables, params, strict=True)
        except SExprError as exc:
            raise DaeFileError(f"{source}: {where}: {exc}") from None
        for a in atoms_of(e, Apply):
            if a.name not in BUILTIN_FUNCTIONS and _base_name(a.name) not in declared:
                raise DaeFileError(f"{source}: {where}: undeclared function {a.name!r}")
        return e

    eqs = [parse(str(t), f"equation {i + 1}") for i, t in enumerate(equations)]
    dae = DaeSystem(eqs, variables, name=str(doc.get("name", "")))
    decomp = None
    if doc.get("decomposition") is not None:
        dd = doc["decomposition"]
        try:
            A = [la.from_strings(Al) for Al in dd["A"]]
            g = [parse(str(t), f"decomposition g[{i + 1}]") for i, t in enumerate(dd["g"])]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DaeFileError):
                raise
            raise DaeFileError(f"{source}: bad decomposition: {exc}") from None
        decomp = (A, g)
    return DaeFile(dae, decomp)


def load_dae(spec: str) -> DaeFile:
    """A preset (``robot:N=2``, ``toy``, ...) or a path to a DAE file."""
    from .models import PRESETS, preset, toy_decomposition, toy_example

    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        try:
            doc = json.loads(path.read_text())
        except FileNotFoundError:
            raise DaeFileError(f"{spec}: no such file") from None
        except json.JSONDecodeError as exc:
            raise DaeFileError(f"{spec}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return parse_dae_file(doc, spec)
    if spec == "toy":
        return DaeFile(toy_example(), toy_decomposition())
    if spec.partition(":")[0] in PRESETS:
        return DaeFile(preset(spec), None)
    raise DaeFileError(f"{spec!r} is neither a file nor a preset ({', '.join(sorted(PRESETS))})")


def dae_to_json(dae: DaeSystem, decomposition: tuple | None = None) -> dict:
    names = list(dae.variables)
    params = set()
    for e in dae.equations:
        params |= params_of(e)
    doc = {
        "schema": SCHEMA,
        "name": dae.name,
        "variables": names,
        "parameters": sorted(params),
        "functions": [{"name": f, "derivative": f + "'"}
                      for f in sorted({_base_name(f) for f in function_names(dae)})],
        "equations": [to_sexpr(e, names) for e in dae.equations],
    }
    if decomposition is not None:
        A, g = decomposition
        doc["decomposition"] = {"A": [la.to_strings(Al) for Al in A],
                                "g": [to_sexpr(e, names) for e in g]}
    return doc


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
