# tests/test_symmetric.py
import numpy as np
import pytest

from src.geometry.builtins import builtin_domain
from src.utils.errors import InvalidInputError, PreconditionError
from src.verify.checks import PASS, POSITIVE
from src.verify.symmetric import symmetric_pipeline


@pytest.fixture(scope="module")
def square_report():
    square = builtin_domain("rectangle", {"a": 2.0, "b": 2.0, "centered": True})
    return symmetric_pipeline(square, 1, 0.25)


def test_half_and_orthant_agree(square_report):
    assert square_report.agreement < 1e-9
    assert square_report.orthant_eigenvalues[0] == pytest.approx(np.pi ** 2 / 4, rel=0.05)
    assert square_report.simplicity_gap > 0.5


def test_orthant_eigenfunction_is_monotone(square_report):
    directions = square_report.trichotomy["directions"]
    assert directions[0]["verdict"] == POSITIVE
    assert square_report.trichotomy["status"] == PASS


def test_reconstruction(square_report):
    assert square_report.reconstruction_residual < 1e-6
    assert square_report.reconstruction_status == PASS
    assert square_report.to_dict()["reconstruction"]["tolerance"] == pytest.approx(1e-7)
    assert square_report.hot_spots["status"] == PASS
    assert square_report.zero_set["status"] == PASS
    assert square_report.pattern_consistent
    assert set(square_report.orthant_patterns) == {"+1,+1", "+1,-1", "-1,+1", "-1,-1"}
    assert square_report.status == PASS


def test_report_layout(square_report):
    out = square_report.to_dict()
    assert out["axis"] == 1
    assert set(out["mesh"]) == {"orthant", "half", "full"}
    assert out["mesh"]["full"]["cells"] == 4 * out["mesh"]["orthant"]["cells"]


def test_needs_full_symmetry(unit_square):
    with pytest.raises(PreconditionError):
        symmetric_pipeline(unit_square, 1, 0.25)


def test_axis_out_of_range(centered_square):
    with pytest.raises(InvalidInputError):
        symmetric_pipeline(centered_square, 3, 0.25)


@pytest.mark.slow
def test_disk_second_axis():
    report = symmetric_pipeline(builtin_domain("disk", {}), 2, 0.1)
    assert report.agreement < 1e-6
    assert report.orthant_eigenvalues[0] == pytest.approx(1.841183781 ** 2, rel=0.03)
