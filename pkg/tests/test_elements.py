from fractions import Fraction

import numpy as np
import pytest

from selfsim.attractor import float_grid
from selfsim.elements import ElementSpecError, element_from_dict, load_element, parse_polynomial
from selfsim.ideals import Discrete, trace_eval


def test_parse_polynomial_forms():
    X = np.array([[2.0, 3.0]])
    assert parse_polynomial(2, 2)(X)[0] == 2
    assert parse_polynomial([1, -1], 2)(X)[0] == 1 - 1j
    p = parse_polynomial([[1, [1, 0]], [[0, 2], [0, 1]]], 2)
    assert p(X)[0] == 2 + 6j


@pytest.mark.parametrize("bad", ["x", [[1, [1]]], [], [[1, [1, -1]]], True, [[1, 2]]])
def test_parse_polynomial_rejects(bad):
    with pytest.raises(ElementSpecError):
        parse_polynomial(bad, 2)


def test_unit_element(tent):
    T = element_from_dict(tent, {"component": [{"level": 0, "poly": 1}]})
    assert trace_eval(tent, Discrete((Fraction(1, 2),), 0), T) == pytest.approx(1)


def test_rank_one_component(tent):
    data = {"component": [{"level": 0, "poly": [[1, [1]]]},
                          {"level": 1, "f": [1, 1], "g": [[[1, [1]]], [[1, [1]]]]}]}
    T = element_from_dict(tent, data)
    assert T.level == 1
    X = float_grid(tent, 3)
    vals = T.components[1](X)
    assert np.allclose(vals, np.broadcast_to(X[:, 0, None, None], vals.shape))


def test_identification_enforced(tent):
    data = {"component": [{"level": 1, "f": [1, 2], "g": [1, 1]}]}
    with pytest.raises(ElementSpecError):
        element_from_dict(tent, data)
    data["component"][0]["project"] = True
    assert element_from_dict(tent, data).level == 1


@pytest.mark.parametrize("data", [{}, {"component": []}, {"component": [{"poly": 1}]},
                                  {"component": [{"level": 0}]}, {"component": [{"level": 1, "f": [1, 1]}]},
                                  {"component": [{"level": 1, "f": [1], "g": [1]}]}])
def test_malformed_specs(tent, data):
    with pytest.raises(ElementSpecError):
        element_from_dict(tent, data)


def test_load_element(tmp_path, tent):
    p = tmp_path / "e.toml"
    p.write_text("[[component]]\nlevel = 0\npoly = 1\n\n[[component]]\nlevel = 0\npoly = 2\n")
    T = load_element(tent, str(p))
    assert np.allclose(T.components[0](float_grid(tent, 2)), 3)
    (tmp_path / "bad.toml").write_text("[[component]\n")
    with pytest.raises(ElementSpecError):
        load_element(tent, str(tmp_path / "bad.toml"))
    with pytest.raises(ElementSpecError):
        load_element(tent, str(tmp_path / "missing.toml"))
