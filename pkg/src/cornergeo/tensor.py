"""Chart-level tensor calculus: connection, brackets, exterior calculus, cross product.

All operations work on the field containers from :mod:`cornergeo.fields`.
Direction arguments may be plain component arrays (treated as constant
fields) wherever only pointwise tensorial data is needed.

Conventions (see :mod:`cornergeo.conventions`): the wedge of 1-forms and the
exterior derivative carry the 1/2 alternation factor, degree-(1,2) products
and d on 2-forms carry 1/3, and the cross product uses the unnormalized
volume form sqrt(det g) dx1^dx2^dx3 so that d1 x d2 = d3 in the flat metric.
"""

from __future__ import annotations

import numpy as np

from .fields import (
    ChartDomain,
    MetricField,
    OneFormField,
    ScalarField,
    SingularMetricError,
    TensorField11,
    VectorField,
    as_point,
)

__all__ = [
    "christoffel",
    "covariant_deriv_vec",
    "nabla_matrix",
    "lie_bracket",
    "exterior_d_oneform",
    "d_oneform_matrix",
    "wedge11_matrix",
    "wedge12_coeff",
    "d_twoform_coeff",
    "two_form_coeff",
    "divergence",
    "volume_form",
    "volume_cross",
    "probe_vectors",
    "ChartDomain",
    "MetricField",
    "OneFormField",
    "ScalarField",
    "SingularMetricError",
    "TensorField11",
    "VectorField",
    "as_point",
]

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS3[_i, _j, _k] = 1.0
    _EPS3[_j, _i, _k] = -1.0


def _as_vector_field(X) -> VectorField:
    if isinstance(X, VectorField):
        return X
    return VectorField.constant(X)


def christoffel(g: MetricField, p) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[k, i, j]`` of ``g`` at ``p``."""
    return g.christoffel(p)


def nabla_matrix(g: MetricField, Y: VectorField, p) -> np.ndarray:
    """The endomorphism ``A[k, i] = (nabla_{d_i} Y)^k`` at ``p``."""
    gam = g.christoffel(p)
    yv = Y.values(p)
    return Y.jacobian(p) + np.einsum("kij,j->ki", gam, yv)


def covariant_deriv_vec(g: MetricField, X, Y: VectorField, p) -> np.ndarray:
    """Components of ``nabla_X Y`` at ``p``; X may be a field or a direction."""
    xv = X.values(p) if isinstance(X, VectorField) else np.asarray(X, dtype=float)
    return nabla_matrix(g, Y, p) @ xv


def lie_bracket(X, Y, p) -> np.ndarray:
    """Components of ``[X, Y]`` at ``p``."""
    Xf, Yf = _as_vector_field(X), _as_vector_field(Y)
    xv, yv = Xf.values(p), Yf.values(p)
    return Yf.jacobian(p) @ xv - Xf.jacobian(p) @ yv


def exterior_d_oneform(theta: OneFormField, X, Y, p) -> float:
    """``d theta(X, Y)`` via the invariant formula (1/2 convention)."""
    Xf, Yf = _as_vector_field(X), _as_vector_field(Y)
    xv, yv = Xf.values(p), Yf.values(p)
    d_thY = theta.pair(Yf).jet(p).grad
    d_thX = theta.pair(Xf).jet(p).grad
    br = lie_bracket(Xf, Yf, p)
    return 0.5 * float(xv @ d_thY - yv @ d_thX - theta.values(p) @ br)


def d_oneform_matrix(theta: OneFormField, p) -> np.ndarray:
    """Coefficients ``(d theta)_ij = (d_i theta_j - d_j theta_i) / 2``."""
    J = theta.jacobian(p)  # J[k, i] = d_i theta_k
    return 0.5 * (J.T - J)


def wedge11_matrix(a, b) -> np.ndarray:
    """Coefficient matrix of ``a ^ b`` for 1-form component arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 0.5 * (np.outer(a, b) - np.outer(b, a))


def wedge12_coeff(a, B) -> float:
    """dx1^dx2^dx3 coefficient of ``a ^ B`` (1-form wedge 2-form)."""
    a = np.asarray(a, dtype=float)
    B = np.asarray(B, dtype=float)
    return (a[0] * B[1, 2] + a[1] * B[2, 0] + a[2] * B[0, 1]) / 3.0


def d_twoform_coeff(entries, p) -> float:
    """dx1^dx2^dx3 coefficient of dB for a 2-form given as scalar-field entries.

    ``entries[i][j]`` must be the (antisymmetric) coefficient fields B_ij.
    """
    d1 = entries[1][2].jet(p).grad[0]
    d2 = entries[0][2].jet(p).grad[1]
    d3 = entries[0][1].jet(p).grad[2]
    return float(d1 - d2 + d3) / 3.0


def two_form_coeff(B, x, y) -> float:
    """Evaluate a 2-form coefficient matrix on a pair of vectors."""
    return float(np.asarray(x) @ np.asarray(B) @ np.asarray(y))


def divergence(g: MetricField, X: VectorField, p) -> float:
    """``div X = d_k X^k + Gamma^k_{ki} X^i`` at ``p``."""
    gam = g.christoffel(p)
    J = X.jacobian(p)
    return float(np.trace(J) + np.einsum("kki,i->", gam, X.values(p)))


def volume_form(g: MetricField, X, Y, Z, p) -> float:
    """``dv_g(X, Y, Z) = sqrt(det g) det[X Y Z]`` (unnormalized volume form)."""
    xv = _as_vector_field(X).values(p)
    yv = _as_vector_field(Y).values(p)
    zv = _as_vector_field(Z).values(p)
    det = g.det(p)
    if det <= 0.0:
        raise SingularMetricError(p, det)
    return float(np.sqrt(det) * np.linalg.det(np.column_stack([xv, yv, zv])))


def volume_cross(g: MetricField, X, Y, p) -> np.ndarray:
    """The metric cross product defined by ``g(X x Y, Z) = dv_g(X, Y, Z)``."""
    xv = _as_vector_field(X).values(p)
    yv = _as_vector_field(Y).values(p)
    det = g.det(p)
    if det <= 0.0:
        raise SingularMetricError(p, det)
    lower = np.sqrt(det) * np.einsum("mnl,m,n->l", _EPS3, xv, yv)
    return g.inverse(p) @ lower


def probe_vectors(g: MetricField, p, rng=None, n_random: int = 4, extra=()) -> list:
    """Deterministic g-unit probe directions: coordinate axes, extras, randoms."""
    out = []
    for k in range(3):
        v = np.zeros(3)
        v[k] = 1.0
        out.append(v / g.norm(p, v))
    for v in extra:
        v = np.asarray(v, dtype=float)
        n = g.norm(p, v)
        if n > 0.0:
            out.append(v / n)
    if rng is not None and n_random > 0:
        for _ in range(n_random):
            v = rng.standard_normal(3)
            n = g.norm(p, v)
            if n > 0.0:
                out.append(v / n)
    return out
