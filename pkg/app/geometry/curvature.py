"""
Projective curvature of a connection given by its Thomas coefficients.

With summation over repeated indices:

    Pi^i_{jkl} = d_k Pi^i_{jl} - d_l Pi^i_{jk} + Pi^m_{jl} Pi^i_{mk} - Pi^m_{jk} Pi^i_{ml}
    Pi_{jk}    = Pi^m_{jmk}
    W^i_{jkl}  = Pi^i_{jkl} + (delta^i_l Pi_{jk} - delta^i_k Pi_{jl}) / (n - 1)
    Pi_{iuv}   = (d_v Pi_{iu} - d_u Pi_{iv} + Pi^m_{iu} Pi_{mv} - Pi^m_{iv} Pi_{mu}) / 2

The connection is flat exactly when ``W`` vanishes (``n > 2``) or, in the
plane, when ``Pi_{iuv}`` vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.core.exceptions import OrderExhausted
from app.geometry.connection import ThomasSymbols
from app.geometry.tensors import transform_tensor
from app.jets.basis import basis_size, get_basis


@dataclass(frozen=True)
class CurvatureTensors:
    """
    Curvature families of a projective connection, as jet coefficient arrays.

    Attributes:
        riemann (np.ndarray): ``Pi^i_{jkl}`` as ``[i, j, k, l, :]``, order ``q - 1``.
        ricci (np.ndarray): ``Pi_{jk}`` as ``[j, k, :]``, order ``q - 1``.
        weyl (np.ndarray): ``W^i_{jkl}`` as ``[i, j, k, l, :]``, order ``q - 1``.
        liouville (np.ndarray): ``Pi_{iuv}`` as ``[i, u, v, :]``, order ``q - 2``.
        nvars (int): Dimension ``n``.
        order (int): Order ``q`` of the input Thomas jets.
    """

    riemann: np.ndarray = field(repr=False)
    ricci: np.ndarray = field(repr=False)
    weyl: np.ndarray = field(repr=False)
    liouville: np.ndarray = field(repr=False)
    nvars: int
    order: int

    def bianchi_residual(self) -> float:
        """Largest constant term of the cyclic sum of ``W`` over its last three indices."""
        w = self.weyl[..., 0]
        cyclic = w + np.transpose(w, (0, 2, 3, 1)) + np.transpose(w, (0, 3, 1, 2))
        return float(np.max(np.abs(cyclic)))


def _derivatives(values: np.ndarray, n: int, order: int) -> np.ndarray:
    """Stack the partial derivatives along a new leading axis."""
    basis = get_basis(n, order)
    out = []
    for var in range(n):
        source, factor = basis.partial_table(var)
        out.append(values[..., source] * factor)
    return np.array(out)


def tensors(thomas: ThomasSymbols) -> CurvatureTensors:
    """
    Compute all curvature families of ``thomas``.

    Raises:
        OrderExhausted: The Thomas jets have order below 2.
    """
    n, q = thomas.nvars, thomas.order
    if q < 2:
        raise OrderExhausted(f"curvature needs Thomas jets of order >= 2, got {q}")
    pi = thomas.pi
    low = pi[..., : basis_size(n, q - 1)]
    basis = get_basis(n, q - 1)

    d_pi = _derivatives(pi, n, q)  # [d, k, i, j]
    # derivative part: d_k Pi^i_{jl} - d_l Pi^i_{jk}, indexed [i, j, k, l]
    deriv = np.einsum("kijl...->ijkl...", d_pi)
    deriv = deriv - np.swapaxes(deriv, 2, 3)
    # quadratic part: sum_m Pi^m_{jl} Pi^i_{mk}
    first = np.transpose(low, (1, 2, 0, 3))[None, :, None, :, :, :]  # [., j, ., l, m]
    second = np.transpose(low, (0, 2, 1, 3))[:, None, :, None, :, :]  # [i, ., k, ., m]
    quad = basis.mul(first, second).sum(axis=4)
    quad = quad - np.swapaxes(quad, 2, 3)
    riemann = deriv + quad

    ricci = np.einsum("mjmk...->jk...", riemann)
    delta = np.eye(n)
    weyl = riemann + (
        np.einsum("il,jk...->ijkl...", delta, ricci) - np.einsum("ik,jl...->ijkl...", delta, ricci)
    ) / (n - 1)

    ric_low = ricci[..., : basis_size(n, q - 2)]
    pi_low = pi[..., : basis_size(n, q - 2)]
    basis2 = get_basis(n, q - 2)
    d_ric = _derivatives(ricci, n, q - 1)  # [d, i, u]
    # d_v Pi_{iu} - d_u Pi_{iv}, indexed [i, u, v]
    grad = np.einsum("viu...->iuv...", d_ric)
    grad = grad - np.swapaxes(grad, 1, 2)
    # sum_m Pi^m_{iu} Pi_{mv}
    first = np.transpose(pi_low, (1, 2, 0, 3))[:, :, None, :, :]  # [i, u, ., m]
    second = ric_low[None, None, :, :, :].transpose(0, 1, 3, 2, 4)  # [., ., v, m]
    cross = basis2.mul(first, second).sum(axis=3)
    cross = cross - np.swapaxes(cross, 1, 2)
    liouville = 0.5 * (grad + cross)
    return CurvatureTensors(riemann, ricci, weyl, liouville, n, q)


def liouville_components(
    curv: CurvatureTensors, to_user: Optional[np.ndarray] = None
) -> dict[str, float]:
    """
    Magnitudes of the constant terms of ``Pi_{112}`` and ``Pi_{212}`` of a planar connection.

    ``to_user`` is the inverse frame matrix when the connection was solved in
    a generic frame; the components are then returned in user coordinates.
    """
    lv = curv.liouville[..., 0]
    if to_user is not None:
        lv = transform_tensor(lv, to_user, up=0)
    return {"Pi_112": float(abs(lv[0, 0, 1])), "Pi_212": float(abs(lv[1, 0, 1]))}
