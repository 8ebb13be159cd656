# tests/test_convergence.py
import numpy as np
import pytest

from src.geometry.builtins import builtin_domain
from src.utils.errors import InvalidInputError
from src.verify.convergence import aitken, convergence_study


def test_square_converges_at_second_order(unit_square):
    study = convergence_study(unit_square, 3, 0.25)
    assert study.reference == pytest.approx(np.pi ** 2)
    assert study.reference_source == "analytic"
    assert len(study.table) == 3
    assert 1.7 <= study.observed_order <= 2.3
    assert study.monotone
    assert list(study.table["vertices"]) == [25, 81, 289]


def test_extrapolated_reference():
    study = convergence_study(builtin_domain("double_triangle", {}), 3, 0.5)
    assert study.reference_source == "extrapolated"
    out = study.to_dict()
    assert out["rows"][0]["order"] is None
    assert len(out["rows"]) == 3


def test_aitken_recovers_a_geometric_limit():
    assert aitken([1.5, 1.25, 1.125]) == pytest.approx(1.0)
    assert aitken([2.0, 2.0, 2.0]) == 2.0


def test_study_arguments():
    square = builtin_domain("rectangle", {})
    with pytest.raises(InvalidInputError):
        convergence_study(square, 2, 0.25)
    with pytest.raises(InvalidInputError):
        convergence_study(square, 3, 0.25, quantity="tau1")
