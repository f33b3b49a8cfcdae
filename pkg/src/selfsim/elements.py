"""Graded elements from a small TOML description.

Each ``[[component]]`` table has a ``level``.  Level 0 carries ``poly``, a
scalar polynomial; higher levels carry ``f`` and ``g``, one polynomial per
vector entry, and contribute the rank-one operator ``theta_{f,g}``.
Components sharing a level are summed.

A polynomial is either a number (a constant) or a list of ``[coef, exponents]``
terms, where ``coef`` is a number or ``[re, im]``.  Vector fields must satisfy
the identification equations unless ``project = true`` asks for projection.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .bimodule import POINT_TOL, membership_defect, project_to_z, rank_one
from .core_rep import GradedCoreElement
from .fields import Polynomial, ScalarField, VectorField
from .ifs import SelfSimilarSystem

__all__ = ["ElementSpecError", "element_from_dict", "load_element", "parse_polynomial"]


class ElementSpecError(ValueError):
    pass


def _coef(c) -> complex:
    if isinstance(c, bool):
        raise ElementSpecError("coefficients must be numbers")
    if isinstance(c, (int, float)):
        return complex(c)
    if isinstance(c, list) and len(c) == 2 and all(isinstance(x, (int, float)) for x in c):
        return complex(c[0], c[1])
    raise ElementSpecError(f"bad coefficient {c!r}; use a number or [re, im]")


def parse_polynomial(spec, d: int) -> Polynomial:
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Polynomial.constant(_coef(spec), d)
    if isinstance(spec, list) and len(spec) == 2 and all(isinstance(x, (int, float)) for x in spec):
        # a bare [re, im] pair reads as a complex constant
        return Polynomial.constant(_coef(spec), d)
    if not isinstance(spec, list):
        raise ElementSpecError(f"bad polynomial {spec!r}")
    terms = []
    for term in spec:
        if not (isinstance(term, list) and len(term) == 2 and isinstance(term[1], list)):
            raise ElementSpecError(f"bad term {term!r}; expected [coef, [exponents]]")
        exps = term[1]
        if len(exps) != d or not all(isinstance(e, int) and e >= 0 for e in exps):
            raise ElementSpecError(f"exponents {exps!r} must be {d} nonnegative integers")
        terms.append((_coef(term[0]), tuple(exps)))
    if not terms:
        raise ElementSpecError("empty polynomial")
    return Polynomial(tuple(terms))


def _vector(system: SelfSimilarSystem, level: int, spec, project: bool, name: str) -> VectorField:
    size = system.N ** level
    if not isinstance(spec, list) or len(spec) != size:
        raise ElementSpecError(f"{name} at level {level} needs {size} polynomials")
    polys = [parse_polynomial(p, system.dimension) for p in spec]
    f = VectorField(system, level, lambda X: np.stack([p(X) for p in polys], axis=1))
    if project:
        return project_to_z(f)
    if membership_defect(f) > POINT_TOL:
        raise ElementSpecError(f"{name} at level {level} violates the identification equations "
                               "(set project = true to project it)")
    f.in_z = True
    return f


def element_from_dict(system: SelfSimilarSystem, data: dict) -> GradedCoreElement:
    comps = data.get("component")
    if not isinstance(comps, list) or not comps:
        raise ElementSpecError("an element needs at least one [[component]]")
    by_level: dict = {}
    for c in comps:
        if not isinstance(c, dict) or not isinstance(c.get("level"), int) or c["level"] < 0:
            raise ElementSpecError("every component needs an integer level >= 0")
        r = c["level"]
        if r == 0:
            if "poly" not in c:
                raise ElementSpecError("a level-0 component needs poly")
            M = ScalarField.polynomial(parse_polynomial(c["poly"], system.dimension)).as_matrix(system)
        else:
            if "f" not in c or "g" not in c:
                raise ElementSpecError(f"a level-{r} component needs f and g")
            project = bool(c.get("project", False))
            M = rank_one(_vector(system, r, c["f"], project, "f"),
                         _vector(system, r, c["g"], project, "g"))
        by_level[r] = M if r not in by_level else by_level[r] + M
    top = max(by_level)
    return GradedCoreElement(system, [by_level.get(r) for r in range(top + 1)])


def load_element(system: SelfSimilarSystem, path: str) -> GradedCoreElement:
    import tomli

    try:
        data = tomli.loads(Path(path).read_text())
    except OSError as exc:
        raise ElementSpecError(f"cannot read {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ElementSpecError(f"cannot parse {path}: {exc}") from exc
    return element_from_dict(system, data)
