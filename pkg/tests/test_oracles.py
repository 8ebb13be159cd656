# tests/test_oracles.py
import numpy as np
import pytest

from src.geometry.builtins import builtin_domain
from src.verify.oracles import (
    bessel_j_root,
    bessel_jp_root,
    box_divfree_eigenvalues,
    box_eigenvalues,
    disk_dirichlet_eigenvalues,
    disk_neumann_eigenvalues,
    divfree_oracle,
    reference_oracle,
)
from src.utils.errors import InvalidInputError

PI2 = np.pi ** 2


def test_bessel_roots():
    assert bessel_jp_root(1, 1) == pytest.approx(1.841183781, abs=1e-8)
    assert bessel_j_root(0, 1) == pytest.approx(2.404825558, abs=1e-8)
    assert bessel_jp_root(0, 1) == pytest.approx(3.831705970, abs=1e-8)
    with pytest.raises(InvalidInputError):
        bessel_j_root(0, 0)


def test_disk_neumann_list():
    values = disk_neumann_eigenvalues(1.0, 4)
    assert values[0] == 0.0
    assert values[1] == pytest.approx(1.841183781 ** 2)
    assert values[2] == values[1]


def test_box_eigenvalues():
    assert box_eigenvalues([1.0, 2.0], 3) == pytest.approx([0.0, PI2 / 4, PI2])
    assert box_eigenvalues([1.0, 1.0], 1, dirichlet_axis=1) == pytest.approx([PI2 / 4])
    assert box_eigenvalues([1.0, 1.0], 1, dirichlet_everywhere=True) == pytest.approx([2 * PI2])


def test_divergence_free_modes():
    assert box_divfree_eigenvalues([1.0, 1.0, 1.0], 4) == pytest.approx([2 * PI2] * 3 + [3 * PI2])
    assert box_divfree_eigenvalues([1.0, 1.0], 1) == pytest.approx([2 * PI2])


def test_reference_oracle_lookup():
    rect = builtin_domain("rectangle", {"a": 1.0, "b": 2.0})
    assert reference_oracle(rect) == pytest.approx(PI2 / 4)
    mixed = builtin_domain("rectangle", {}).with_labels({"f3": "dirichlet"})
    assert reference_oracle(mixed) == pytest.approx(PI2 / 4)
    disk = builtin_domain("disk", {"radius": 2.0})
    assert reference_oracle(disk) == pytest.approx((1.841183781 / 2.0) ** 2)
    assert divfree_oracle(disk) == pytest.approx((2.404825558 / 2.0) ** 2)
    assert divfree_oracle(builtin_domain("box", {})) == pytest.approx(2 * PI2)


def test_no_oracle_for_other_shapes():
    assert reference_oracle(builtin_domain("l_shape", {})) is None
    assert reference_oracle(builtin_domain("double_prism", {})) is None
    assert divfree_oracle(builtin_domain("rectangle", {}).with_labels({"f0": "dirichlet"})) is None


def test_disk_dirichlet_values_carry_multiplicity():
    values = disk_dirichlet_eigenvalues(1.0, 4)
    assert values[0] == pytest.approx(2.404825558 ** 2)
    assert values[1] == pytest.approx(3.831705970 ** 2)
    assert values[2] == pytest.approx(values[1])
    assert values[3] == pytest.approx(5.135622302 ** 2)
    assert disk_dirichlet_eigenvalues(2.0, 1)[0] == pytest.approx(values[0] / 4)
