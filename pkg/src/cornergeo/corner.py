"""Corner-type structures: defining residuals, fundamental frame, structure identities.

A corner structure is an almost contact metric structure whose connection
satisfies ``nabla_X xi = -eta(X) psi`` with ``psi = -nabla_xi xi`` (equivalently
``nabla_{phi X} xi = 0``, equivalently ``d eta = omega ^ eta``, ``d Phi = 0``
and ``N_phi = 0``).  Away from the degenerate locus ``psi = 0`` it carries the
orthonormal frame ``(xi, V, phi V)`` with ``V = e^{-rho} psi``,
``e^rho = |psi|``, and the dual coframe ``(eta, theta1, theta2)``.

Everything here is evaluated through jets: the frame components of a
structure with expression-backed data carry exact first derivatives, so the
exterior derivatives of ``theta1``, ``theta2`` and ``omega`` need no finite
differencing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acms import AcmStructure, fundamental_two_form_fields, fundamental_two_form_matrix, nijenhuis
from .expr import jet_log, jet_sqrt
from .fields import OneFormField, ScalarField, VectorField, as_point, jet_partial
from .report import ResidualReport, ResidualTracker
from .tensor import (
    d_oneform_matrix,
    d_twoform_coeff,
    nabla_matrix,
    probe_vectors,
    wedge11_matrix,
)

__all__ = [
    "DEGENERACY_TOL",
    "DegenerateCornerError",
    "CornerFrame",
    "CornerFields",
    "corner_frame",
    "corner_residual",
    "corner_residual_forms",
    "connection_table_residuals",
    "frame_residuals",
    "form_identities_residuals",
    "closed_omega_check",
    "phi_derivative_residual",
]

# |psi| at or below this counts as a degenerate corner point (frame undefined)
DEGENERACY_TOL = 1e-8

_BASIS = [np.eye(3)[k] for k in range(3)]


class DegenerateCornerError(RuntimeError):
    """|psi| fell under the degeneracy threshold; the frame is undefined."""

    def __init__(self, point, psi_norm: float):
        super().__init__(
            f"degenerate corner point {np.asarray(point).tolist()}: "
            f"|psi| = {psi_norm:.3e}"
        )
        self.point = np.asarray(point, dtype=float)
        self.psi_norm = float(psi_norm)


@dataclass(frozen=True)
class CornerFrame:
    """Pointwise fundamental frame data of a corner structure."""

    point: np.ndarray
    psi: np.ndarray
    omega: np.ndarray
    rho: float
    e_rho: float
    v: np.ndarray
    phi_v: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    sigma: float
    div_v: float
    phi_v_rho: float


class _Bundle:
    """Jets of the derived frame quantities at one point."""

    __slots__ = (
        "xi", "eta", "psi", "omega", "norm2", "e_rho", "rho",
        "v", "phi_v", "theta1", "theta2",
    )


def _psi_omega_jets(s: AcmStructure, p):
    """Jets (value + gradient) of psi and omega; no degeneracy assumption."""
    xi = s.xi.jets(p)
    gam = s.g.christoffel_jets(p)
    g_jets = s.g.jets(p)
    psi = []
    for k in range(3):
        acc = None
        for i in range(3):
            inner = jet_partial(xi[k], i)
            for j in range(3):
                inner = inner + gam[k][i][j] * xi[j]
            term = xi[i] * inner
            acc = term if acc is None else acc + term
        psi.append(-acc)
    omega = []
    for j in range(3):
        acc = None
        for k in range(3):
            term = g_jets[j][k] * psi[k]
            acc = term if acc is None else acc + term
        omega.append(acc)
    return xi, psi, omega


class CornerFields:
    """Derived frame fields of a corner structure, memoized per point.

    The accessors (``v``, ``phi_v``, ``theta1``, ``theta2``, ``rho``, ...)
    are ordinary field objects whose jets read from the per-point bundle, so
    they compose with every operation in :mod:`cornergeo.tensor`.
    """

    def __init__(self, s: AcmStructure, degeneracy_tol: float = DEGENERACY_TOL):
        self.structure = s
        self.degeneracy_tol = float(degeneracy_tol)
        self._bundles: dict = {}

        def vec(pick):
            return VectorField(
                [ScalarField(lambda p, k=k: pick(self.bundle(p))[k]) for k in range(3)]
            )

        def form(pick):
            return OneFormField(
                [ScalarField(lambda p, k=k: pick(self.bundle(p))[k]) for k in range(3)]
            )

        self.psi = vec(lambda b: b.psi)
        self.v = vec(lambda b: b.v)
        self.phi_v = vec(lambda b: b.phi_v)
        self.omega = form(lambda b: b.omega)
        self.theta1 = form(lambda b: b.theta1)
        self.theta2 = form(lambda b: b.theta2)
        self.rho = ScalarField(lambda p: self.bundle(p).rho)

    def bundle(self, p) -> _Bundle:
        key = as_point(p).tobytes()
        hit = self._bundles.get(key)
        if hit is not None:
            return hit

        s = self.structure
        b = _Bundle()
        b.xi, b.psi, b.omega = _psi_omega_jets(s, p)
        b.eta = s.eta.jets(p)

        norm2 = None
        for k in range(3):
            term = b.psi[k] * b.omega[k]
            norm2 = term if norm2 is None else norm2 + term
        b.norm2 = norm2
        if norm2.value <= self.degeneracy_tol**2:
            raise DegenerateCornerError(p, float(np.sqrt(max(norm2.value, 0.0))))

        b.e_rho = jet_sqrt(norm2)
        b.rho = jet_log(norm2) * 0.5
        b.v = [b.psi[k] / b.e_rho for k in range(3)]
        phi = s.phi.jets(p)
        b.phi_v = []
        for k in range(3):
            acc = None
            for j in range(3):
                term = phi[k][j] * b.v[j]
                acc = term if acc is None else acc + term
            b.phi_v.append(acc)
        b.theta1 = [b.omega[j] / b.e_rho for j in range(3)]
        b.theta2 = []
        for j in range(3):
            acc = None
            for k in range(3):
                term = b.omega[k] * phi[k][j]
                acc = term if acc is None else acc + term
            b.theta2.append(-acc / b.e_rho)

        self._bundles[key] = b
        return b

    # -- pointwise frame scalars -------------------------------------------

    def frame(self, p) -> CornerFrame:
        b = self.bundle(p)
        s = self.structure
        G = s.g.matrix(p)
        gam = s.g.christoffel(p)

        xi_v = np.array([j.value for j in b.xi])
        v = np.array([j.value for j in b.v])
        phi_v = np.array([j.value for j in b.phi_v])
        jac_v = np.array([j.grad for j in b.v])

        nabla_xi_v = jac_v @ xi_v + np.einsum("kij,i,j->k", gam, xi_v, v)
        sigma = float(nabla_xi_v @ G @ phi_v)
        div_v = float(np.trace(jac_v) + np.einsum("kki,i->", gam, v))
        phi_v_rho = float(phi_v @ b.rho.grad)

        return CornerFrame(
            point=as_point(p),
            psi=np.array([j.value for j in b.psi]),
            omega=np.array([j.value for j in b.omega]),
            rho=b.rho.value,
            e_rho=b.e_rho.value,
            v=v,
            phi_v=phi_v,
            theta1=np.array([j.value for j in b.theta1]),
            theta2=np.array([j.value for j in b.theta2]),
            sigma=sigma,
            div_v=div_v,
            phi_v_rho=phi_v_rho,
        )


def corner_frame(s: AcmStructure, p) -> CornerFrame:
    """The fundamental frame at one point (degenerate points raise)."""
    return CornerFields(s).frame(p)


def _gnorm(G, v) -> float:
    return float(np.sqrt(max(v @ G @ v, 0.0)))


def corner_residual(
    s: AcmStructure, points, rng=None, n_random: int = 4, tol: float = 1e-8
) -> ResidualReport:
    """Worst violation of the defining condition ``nabla_X xi = -eta(X) psi``.

    Two routes are tracked: the defining equation over probe directions, and
    the equivalent ``nabla_{phi X} xi = 0``.  A flat structure (psi = 0)
    scores zero; no frame is required.
    """
    tracker = ResidualTracker()
    for p in np.atleast_2d(points):
        G = s.g.matrix(p)
        P = s.phi.matrix(p)
        eta = s.eta.values(p)
        xi = s.xi.values(p)
        A = nabla_matrix(s.g, s.xi, p)
        psi = -(A @ xi)
        for x in probe_vectors(s.g, p, rng, n_random, extra=[xi]):
            tracker.update("nabla_xi", _gnorm(G, A @ x + (eta @ x) * psi), p)
            tracker.update("nabla_phi_xi", _gnorm(G, A @ (P @ x)), p)
    return tracker.report("corner", tol)


def corner_residual_forms(s: AcmStructure, points, tol: float = 1e-7) -> ResidualReport:
    """Worst violation of the form characterization ``d eta = omega ^ eta``,
    ``d Phi = 0``, ``N_phi = 0``.

    ``omega`` is computed as ``-(nabla_xi xi)^flat`` directly, so the check is
    meaningful whether or not the defining condition holds.
    """
    tracker = ResidualTracker()
    phi_fields = fundamental_two_form_fields(s)
    for p in np.atleast_2d(points):
        G = s.g.matrix(p)
        eta = s.eta.values(p)
        xi = s.xi.values(p)
        A = nabla_matrix(s.g, s.xi, p)
        omega = G @ (-(A @ xi))
        deta = d_oneform_matrix(s.eta, p)
        tracker.update(
            "d_eta_vs_omega_wedge_eta",
            np.max(np.abs(deta - wedge11_matrix(omega, eta))),
            p,
        )
        tracker.update("d_phi", abs(d_twoform_coeff(phi_fields, p)), p)
        worst = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                worst = max(worst, _gnorm(G, nijenhuis(s, _BASIS[i], _BASIS[j], p)))
        tracker.update("nijenhuis", worst, p)
    return tracker.report("corner_forms", tol)


def connection_table_residuals(
    s: AcmStructure, points, rng=None, n_random: int = 2, tol: float = 1e-8
) -> ResidualReport:
    """The seven frame covariant-derivative identities of a corner structure.

    In the fundamental frame: ``nabla_X xi = -e^rho eta(X) V``;
    ``nabla_xi V = e^rho xi + sigma phi V``; ``nabla_V V = phiV(rho) phi V``;
    ``nabla_{phi V} V = (div V - e^rho) phi V``; ``nabla_xi phiV = -sigma V``;
    ``nabla_V phiV = -phiV(rho) V``; ``nabla_{phi V} phiV = (e^rho - div V) V``.
    """
    cf = CornerFields(s)
    tracker = ResidualTracker()
    for p in np.atleast_2d(points):
        f = cf.frame(p)
        G = s.g.matrix(p)
        xi = s.xi.values(p)
        eta = s.eta.values(p)
        A = nabla_matrix(s.g, s.xi, p)
        Mv = nabla_matrix(s.g, cf.v, p)
        Mpv = nabla_matrix(s.g, cf.phi_v, p)

        for x in probe_vectors(s.g, p, rng, n_random, extra=[xi]):
            tracker.update(
                "nabla_xi", _gnorm(G, A @ x + f.e_rho * (eta @ x) * f.v), p
            )
        tracker.update(
            "nabla_xi_v", _gnorm(G, Mv @ xi - f.e_rho * xi - f.sigma * f.phi_v), p
        )
        tracker.update(
            "nabla_v_v", _gnorm(G, Mv @ f.v - f.phi_v_rho * f.phi_v), p
        )
        tracker.update(
            "nabla_phiv_v",
            _gnorm(G, Mv @ f.phi_v - (f.div_v - f.e_rho) * f.phi_v),
            p,
        )
        tracker.update(
            "nabla_xi_phiv", _gnorm(G, Mpv @ xi + f.sigma * f.v), p
        )
        tracker.update(
            "nabla_v_phiv", _gnorm(G, Mpv @ f.v + f.phi_v_rho * f.v), p
        )
        tracker.update(
            "nabla_phiv_phiv",
            _gnorm(G, Mpv @ f.phi_v - (f.e_rho - f.div_v) * f.v),
            p,
        )
    return tracker.report("connection_table", tol)


def frame_residuals(
    s: AcmStructure, points, tol: float = 1e-9, grad_tol: float = 1e-7
) -> ResidualReport:
    """Orthonormality and duality of the fundamental frame, plus the
    reconstruction of grad rho from its frame components."""
    cf = CornerFields(s)
    tracker = ResidualTracker()
    for p in np.atleast_2d(points):
        b = cf.bundle(p)
        f = cf.frame(p)
        G = s.g.matrix(p)
        xi = s.xi.values(p)
        eta = s.eta.values(p)

        tracker.update("v_unit", abs(f.v @ G @ f.v - 1.0), p)
        tracker.update("phiv_unit", abs(f.phi_v @ G @ f.phi_v - 1.0), p)
        tracker.update("xi_v_orth", abs(xi @ G @ f.v), p)
        tracker.update("xi_phiv_orth", abs(xi @ G @ f.phi_v), p)
        tracker.update("v_phiv_orth", abs(f.v @ G @ f.phi_v), p)
        tracker.update("eta_v", abs(eta @ f.v), p)
        tracker.update("eta_phiv", abs(eta @ f.phi_v), p)
        tracker.update("theta1_v", abs(f.theta1 @ f.v - 1.0), p)
        tracker.update("theta1_phiv", abs(f.theta1 @ f.phi_v), p)
        tracker.update("theta1_xi", abs(f.theta1 @ xi), p)
        tracker.update("theta2_v", abs(f.theta2 @ f.v), p)
        tracker.update("theta2_phiv", abs(f.theta2 @ f.phi_v - 1.0), p)
        tracker.update("theta2_xi", abs(f.theta2 @ xi), p)
        tracker.update(
            "phi_v_coherent", _gnorm(G, s.phi.matrix(p) @ f.v - f.phi_v), p
        )

        grad_rho = b.rho.grad
        sharp = s.g.inverse(p) @ grad_rho
        frame_sum = (
            float(xi @ grad_rho) * xi
            + float(f.v @ grad_rho) * f.v
            + f.phi_v_rho * f.phi_v
        )
        tracker.update("grad_rho_frame", _gnorm(G, frame_sum - sharp), p)

    tolerances = {r: tol for r in [
        "v_unit", "phiv_unit", "xi_v_orth", "xi_phiv_orth", "v_phiv_orth",
        "eta_v", "eta_phiv", "theta1_v", "theta1_phiv", "theta1_xi",
        "theta2_v", "theta2_phiv", "theta2_xi", "phi_v_coherent",
    ]}
    tolerances["grad_rho_frame"] = grad_tol
    return tracker.report("frame", tolerances)


def form_identities_residuals(s: AcmStructure, points, tol: float = 1e-8) -> ResidualReport:
    """Structure equations of the coframe.

    ``Phi = 2 theta2 ^ theta1``;
    ``d theta1 = sigma eta ^ theta2 + phiV(rho) theta1 ^ theta2``;
    ``d theta2 = -sigma eta ^ theta1 - (e^rho - div V) theta1 ^ theta2``;
    and the mixed identity
    ``d theta2 = sigma e^{-rho} d eta + (e^rho - div V)/2 Phi``.
    """
    cf = CornerFields(s)
    tracker = ResidualTracker()
    for p in np.atleast_2d(points):
        f = cf.frame(p)
        eta = s.eta.values(p)
        phi_mat = fundamental_two_form_matrix(s, p)
        deta = d_oneform_matrix(s.eta, p)
        dth1 = d_oneform_matrix(cf.theta1, p)
        dth2 = d_oneform_matrix(cf.theta2, p)
        w_eta_th2 = wedge11_matrix(eta, f.theta2)
        w_eta_th1 = wedge11_matrix(eta, f.theta1)
        w_th1_th2 = wedge11_matrix(f.theta1, f.theta2)

        tracker.update(
            "phi_as_two_theta2_theta1",
            np.max(np.abs(phi_mat - 2.0 * wedge11_matrix(f.theta2, f.theta1))),
            p,
        )
        tracker.update(
            "d_theta1",
            np.max(np.abs(dth1 - f.sigma * w_eta_th2 - f.phi_v_rho * w_th1_th2)),
            p,
        )
        tracker.update(
            "d_theta2",
            np.max(
                np.abs(dth2 + f.sigma * w_eta_th1 + (f.e_rho - f.div_v) * w_th1_th2)
            ),
            p,
        )
        tracker.update(
            "d_theta2_via_d_eta",
            np.max(
                np.abs(
                    dth2
                    - (f.sigma / f.e_rho) * deta
                    - 0.5 * (f.e_rho - f.div_v) * phi_mat
                )
            ),
            p,
        )
    return tracker.report("form_identities", tol)


def closed_omega_check(
    s: AcmStructure, points, closed_tol: float = 1e-8, sigma_tol: float = 1e-6
) -> ResidualReport:
    """Check the implication: omega closed (d omega = 0) forces sigma = 0."""
    cf = CornerFields(s)
    tracker = ResidualTracker()
    degenerate = 0
    for p in np.atleast_2d(points):
        try:
            f = cf.frame(p)
        except DegenerateCornerError:
            degenerate += 1
            continue
        tracker.update("d_omega", np.max(np.abs(d_oneform_matrix(cf.omega, p))), p)
        tracker.update("sigma", abs(f.sigma), p)
    report = tracker.report("closed_omega")
    d_max = report.max_abs("d_omega") if report.residuals else 0.0
    s_max = report.max_abs("sigma") if report.residuals else 0.0
    omega_closed = d_max < closed_tol
    implication = (not omega_closed) or s_max < sigma_tol
    report.details.update(
        {
            "omega_closed": omega_closed,
            "implication_holds": implication,
            "degenerate_points": degenerate,
            "failed": not implication,
        }
    )
    return report


def phi_derivative_residual(
    s: AcmStructure, points, rng=None, n_random: int = 2, tol: float = 1e-8
) -> ResidualReport:
    """Residual of the covariant-derivative characterization
    ``(nabla_X phi) Y = eta(X) (omega(phi Y) xi + eta(Y) phi psi)``.

    Optional companion to :func:`corner_residual`; kept separate so the
    defining Eq-style residual stays canonical.
    """
    tracker = ResidualTracker()
    for p in np.atleast_2d(points):
        G = s.g.matrix(p)
        P = s.phi.matrix(p)
        eta = s.eta.values(p)
        xi = s.xi.values(p)
        gam = s.g.christoffel(p)
        A = nabla_matrix(s.g, s.xi, p)
        psi = -(A @ xi)
        omega = G @ psi
        phi_psi = P @ psi
        # nabla phi as a (1,2)-tensor: D[i,k,j] = (nabla_i phi)^k_j
        phi_jets = s.phi.jets(p)
        dphi = np.empty((3, 3, 3))
        for k in range(3):
            for j in range(3):
                dphi[:, k, j] = phi_jets[k][j].grad
        D = (
            dphi
            + np.einsum("kim,mj->ikj", gam, P)
            - np.einsum("mij,km->ikj", gam, P)
        )
        probes = probe_vectors(s.g, p, rng, n_random, extra=[xi])
        for x in probes:
            for y in probes:
                lhs = np.einsum("ikj,i,j->k", D, x, y)
                rhs = (eta @ x) * ((omega @ (P @ y)) * xi + (eta @ y) * phi_psi)
                tracker.update("nabla_phi", _gnorm(G, lhs - rhs), p)
    return tracker.report("phi_derivative", tol)
