"""
Tests for projective curvature.

Tests:
- The flat connection has no curvature.
- The algebraic identities of W hold for random Thomas jets.
- Pushforwards of linear webs are projectively flat.
- W agrees with finite differences of pointwise connections.
- Tensor transformation helpers.
"""

import numpy as np
import pytest

from app.core.exceptions import OrderExhausted
from app.dsl.field import parse_fields
from app.geometry.connection import ThomasSymbols, solve_canonical
from app.geometry.curvature import liouville_components, tensors
from app.geometry.tensors import (
    equation_count,
    free_unknowns,
    transform_tensor,
    unknown_count,
)
from app.jets.basis import basis_size, get_basis
from app.selftest import TENSOR_WEB
from app.webs.builtins import builtin_spec, diffeo_fields, random_linear_spec
from app.webs.model import Web, foliation_from_first_integrals, pushforward


def _random_thomas(n, order, seed):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(unknown_count(n), basis_size(n, order)))
    return ThomasSymbols.from_free(values, n, order)


def test_counts():
    """Unknown and equation counts of small webs."""
    assert [unknown_count(n) for n in (2, 3, 4)] == [4, 15, 36]
    assert len(free_unknowns(3)) == 15
    assert equation_count(3, [1] * 5) == 15
    assert equation_count(3, [2] * 8) == 16
    assert equation_count(3, [1, 1, 1, 2, 2, 2]) == 15


def test_flat_connection_has_no_curvature():
    """Zero Thomas symbols give zero W, Ricci and Liouville tensors."""
    curv = tensors(ThomasSymbols.zero(3, 2))
    for part in (curv.riemann, curv.ricci, curv.weyl, curv.liouville):
        assert np.all(part == 0.0)


def test_curvature_needs_second_order():
    """Liouville tensors need two derivatives of the Thomas symbols."""
    with pytest.raises(OrderExhausted):
        tensors(ThomasSymbols.zero(2, 1))


@pytest.mark.parametrize("n", [3, 4])
def test_weyl_identities(n):
    """W is antisymmetric, trace-free and satisfies the cyclic identity."""
    curv = tensors(_random_thomas(n, 2, seed=n))
    w = curv.weyl[..., 0]
    scale = np.max(np.abs(w))
    assert np.max(np.abs(w + np.swapaxes(w, 2, 3))) < 1e-12 * scale
    assert np.max(np.abs(np.einsum("iikl->kl", w))) < 1e-10 * scale
    assert np.max(np.abs(np.einsum("ijki->jk", w))) < 1e-10 * scale
    assert curv.bianchi_residual() < 1e-9 * scale


def test_planar_weyl_vanishes():
    """In the plane W is identically zero; only the Liouville tensor remains."""
    curv = tensors(_random_thomas(2, 2, seed=5))
    assert np.max(np.abs(curv.weyl)) < 1e-10
    components = liouville_components(curv)
    assert set(components) == {"Pi_112", "Pi_212"}
    assert max(components.values()) > 0.0


def test_liouville_components_in_user_coordinates():
    """With user x twice the frame x, each lower x index contributes a factor 1/2."""
    curv = tensors(_random_thomas(2, 2, seed=6))
    plain = liouville_components(curv)
    scaled = liouville_components(curv, np.diag([2.0, 1.0]))
    assert scaled["Pi_112"] == pytest.approx(plain["Pi_112"] / 4)
    assert scaled["Pi_212"] == pytest.approx(plain["Pi_212"] / 2)


@pytest.mark.parametrize("n,x0", [(2, [0.3, 0.2]), (3, [0.3, 0.2, 0.1])])
def test_pushforward_of_linear_web_is_flat(n, x0):
    """Images of linear webs have curved Thomas symbols but no curvature."""
    phi, phi_inv = diffeo_fields(n)
    image = pushforward(random_linear_spec(n, n + 2, seed=11).to_web(), phi_inv)
    y0 = [f.value_at(x0) for f in phi]
    connection = solve_canonical(image, y0, order=4)
    curv = tensors(connection.thomas)
    assert connection.thomas.max_abs() > 1e-2
    if n == 2:
        assert max(liouville_components(curv).values()) < 1e-8
    else:
        assert np.max(np.abs(curv.weyl[..., 0])) < 1e-8


def test_bol_web_is_flat_on_pencils():
    """The four pencils of Bol's web have a flat connection."""
    spec = builtin_spec("bol")
    web = spec.to_web().subweb([0, 1, 2, 3])
    curv = tensors(solve_canonical(web, spec.base_point, order=4).thomas)
    assert max(liouville_components(curv).values()) < 1e-8


def test_transform_tensor():
    """Identity maps leave tensors alone; scalings weigh each index."""
    rng = np.random.default_rng(0)
    tensor = rng.normal(size=(3, 3, 3))
    assert np.allclose(transform_tensor(tensor, np.eye(3), up=1), tensor)
    scaled = transform_tensor(tensor, 2.0 * np.eye(3), up=1)
    assert np.allclose(scaled, tensor / 2.0)
    back = transform_tensor(scaled, 0.5 * np.eye(3), up=1)
    assert np.allclose(back, tensor)


def test_weyl_matches_finite_differences():
    """W of the order-3 solve matches W built from central differences of order-1 solves."""
    fields = parse_fields(TENSOR_WEB[:5], nvars=3)
    web = Web(3, tuple(foliation_from_first_integrals([f], 3) for f in fields), "tensor-5")
    n, h = 3, 1e-3
    x0 = np.array([0.3, 0.2, 0.1])
    basis = get_basis(n, 2)
    pi = np.zeros((n, n, n, basis.size))
    pi[..., 0] = solve_canonical(web, x0, order=1).thomas.pi[..., 0]
    for i in range(n):
        step = h * np.eye(n)[i]
        plus = solve_canonical(web, x0 + step, order=1).thomas.pi[..., 0]
        minus = solve_canonical(web, x0 - step, order=1).thomas.pi[..., 0]
        pi[..., basis.powers[i]] = (plus - minus) / (2 * h)
    expected = tensors(ThomasSymbols(pi, n, 2)).weyl[..., 0]
    weyl = tensors(solve_canonical(web, x0, order=3).thomas).weyl[..., 0]
    assert np.max(np.abs(weyl - expected)) < 1e-4
