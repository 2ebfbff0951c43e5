"""Derived structures: the two frame twins and the contact-form deformation.

Twins.  On a non-degenerate corner structure the frame (xi, V, phi V) admits
two companion almost contact metric structures with the same metric:

  * the V-twin:     phi' X = theta2(X) xi - eta(X) phi V,  Reeb field V,
                    contact form theta1;
  * the phiV-twin:  phi' X = eta(X) V - theta1(X) xi,      Reeb field phi V,
                    contact form theta2.

The V-twin is beta-Kenmotsu with beta = e^rho exactly when
div V = 2 e^rho and sigma = phiV(rho) = 0; the phiV-twin is cosymplectic
exactly when div V = e^rho and sigma = phiV(rho) = 0.  Both theorems are
checked along two independent routes (conditions vs. classifier).

Deformation.  For a positive factor f the deformed structure is

    phi~ X = phi X + theta1(X) xi,   xi~ = xi,   eta~ = eta - theta2,
    g~ = f g - f eta (x) eta + eta~ (x) eta~.

Its fundamental form scales exactly (Phi~ = f Phi), its normality tensor has
a closed form proportional to (1 - sigma e^{-rho}), and when sigma = e^rho it
is trans-Sasakian of type (alpha~, beta~) with

    alpha~ = (div V - e^rho) / (2 f),    beta~ = xi(ln f) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .acms import (
    AcmStructure,
    COSYMPLECTIC,
    KENMOTSU,
    SASAKIAN,
    TRANS_SASAKIAN,
    classify,
    fundamental_two_form_fields,
    fundamental_two_form_matrix,
    n1_tensor,
    normality_residual,
    olszak_alpha_beta,
)
from .corner import CornerFields
from .expr import ScalarExpr, as_expr
from .fields import MetricField, OneFormField, ScalarField, TensorField11
from .report import ResidualReport, ResidualTracker
from .tensor import d_oneform_matrix, d_twoform_coeff, wedge12_coeff

__all__ = [
    "TwinKind",
    "twin",
    "TwinTheoremVerdict",
    "thken_check",
    "thcos_check",
    "NonPositiveFError",
    "DeformationParams",
    "deform",
    "ntilde_identity_residual",
    "DeformedTypeReport",
    "deformed_type",
    "corollary_case",
    "GateReport",
    "corollary_gate",
]


class TwinKind(str, Enum):
    """Which frame field becomes the Reeb field of the twin."""

    V = "v"
    PHI_V = "phi_v"


def twin(s: AcmStructure, kind: TwinKind, fields: CornerFields | None = None) -> AcmStructure:
    """Build the V-twin or the phiV-twin of a corner structure."""
    cf = fields if fields is not None else CornerFields(s)
    kind = TwinKind(kind)
    if kind is TwinKind.V:
        new_phi = [
            [
                cf.theta2.components[j] * s.xi.components[k]
                - s.eta.components[j] * cf.phi_v.components[k]
                for j in range(3)
            ]
            for k in range(3)
        ]
        new_xi, new_eta = cf.v, cf.theta1
    else:
        new_phi = [
            [
                s.eta.components[j] * cf.v.components[k]
                - cf.theta1.components[j] * s.xi.components[k]
                for j in range(3)
            ]
            for k in range(3)
        ]
        new_xi, new_eta = cf.phi_v, cf.theta2
    return AcmStructure(
        phi=TensorField11(new_phi),
        xi=new_xi,
        eta=OneFormField(list(new_eta.components)),
        g=s.g,
        domain=s.domain,
    )


@dataclass
class TwinTheoremVerdict:
    """Two-route check of a twin theorem.

    ``conditions_hold`` comes from the frame scalars of the base structure;
    ``twin_matches`` from classifying the twin itself.  The theorem predicts
    they coincide, which is what ``routes_agree`` records.
    """

    theorem: str
    conditions_hold: bool
    condition_residuals: dict
    twin_matches: bool
    twin_verdict: str
    twin_residuals: dict
    routes_agree: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "conditions_hold": self.conditions_hold,
            "condition_residuals": self.condition_residuals,
            "twin_matches": self.twin_matches,
            "twin_verdict": self.twin_verdict,
            "twin_residuals": self.twin_residuals,
            "routes_agree": self.routes_agree,
            "tolerance": self.tolerance,
        }


def _twin_olszak_errors(t: AcmStructure, points, beta_target=None):
    """Pointwise |alpha| and |beta - target| maxima for a twin structure."""
    a_max = b_err = 0.0
    for p in np.atleast_2d(points):
        a, b = olszak_alpha_beta(t, p)
        a_max = max(a_max, abs(a))
        target = 0.0 if beta_target is None else beta_target(p)
        b_err = max(b_err, abs(b - target))
    return a_max, b_err


def thken_check(
    s: AcmStructure, points, tol: float = 1e-6, fields: CornerFields | None = None
) -> TwinTheoremVerdict:
    """V-twin theorem: beta-Kenmotsu with beta = e^rho iff
    div V = 2 e^rho and sigma = phiV(rho) = 0."""
    cf = fields if fields is not None else CornerFields(s)
    points = np.atleast_2d(points)

    cond = {"div_v_minus_2_erho": 0.0, "sigma": 0.0, "phi_v_rho": 0.0}
    frames = [cf.frame(p) for p in points]
    for f in frames:
        cond["div_v_minus_2_erho"] = max(
            cond["div_v_minus_2_erho"], abs(f.div_v - 2.0 * f.e_rho)
        )
        cond["sigma"] = max(cond["sigma"], abs(f.sigma))
        cond["phi_v_rho"] = max(cond["phi_v_rho"], abs(f.phi_v_rho))
    conditions_hold = all(v < tol for v in cond.values())

    t = twin(s, TwinKind.V, fields=cf)
    normality, _ = normality_residual(t, points)
    e_rho_at = {p.tobytes(): f.e_rho for p, f in zip(points, frames)}
    a_max, b_err = _twin_olszak_errors(
        t, points, beta_target=lambda p: e_rho_at[np.asarray(p).tobytes()]
    )
    twin_matches = normality < tol and a_max < tol and b_err < tol
    verdict = classify(t, points=points).verdict

    return TwinTheoremVerdict(
        theorem="v_twin_beta_kenmotsu",
        conditions_hold=conditions_hold,
        condition_residuals=cond,
        twin_matches=twin_matches,
        twin_verdict=verdict,
        twin_residuals={
            "normality": float(normality),
            "alpha": float(a_max),
            "beta_minus_erho": float(b_err),
        },
        routes_agree=conditions_hold == twin_matches,
        tolerance=tol,
    )


def thcos_check(
    s: AcmStructure, points, tol: float = 1e-6, fields: CornerFields | None = None
) -> TwinTheoremVerdict:
    """phiV-twin theorem: cosymplectic iff div V = e^rho and
    sigma = phiV(rho) = 0."""
    cf = fields if fields is not None else CornerFields(s)
    points = np.atleast_2d(points)

    cond = {"div_v_minus_erho": 0.0, "sigma": 0.0, "phi_v_rho": 0.0}
    for p in points:
        f = cf.frame(p)
        cond["div_v_minus_erho"] = max(cond["div_v_minus_erho"], abs(f.div_v - f.e_rho))
        cond["sigma"] = max(cond["sigma"], abs(f.sigma))
        cond["phi_v_rho"] = max(cond["phi_v_rho"], abs(f.phi_v_rho))
    conditions_hold = all(v < tol for v in cond.values())

    t = twin(s, TwinKind.PHI_V, fields=cf)
    normality, _ = normality_residual(t, points)
    a_max, b_max = _twin_olszak_errors(t, points)
    twin_matches = normality < tol and a_max < tol and b_max < tol
    verdict = classify(t, points=points).verdict

    return TwinTheoremVerdict(
        theorem="phiv_twin_cosymplectic",
        conditions_hold=conditions_hold,
        condition_residuals=cond,
        twin_matches=twin_matches,
        twin_verdict=verdict,
        twin_residuals={
            "normality": float(normality),
            "alpha": float(a_max),
            "beta": float(b_max),
        },
        routes_agree=conditions_hold == twin_matches,
        tolerance=tol,
    )


# ---------------------------------------------------------------------------
# deformation
# ---------------------------------------------------------------------------


class NonPositiveFError(ValueError):
    """The deformation factor must stay positive on the domain."""

    def __init__(self, point, value: float):
        super().__init__(
            f"deformation factor is not positive at {np.asarray(point).tolist()}: "
            f"f = {value:.6g}"
        )
        self.point = np.asarray(point, dtype=float)
        self.value = float(value)


@dataclass(frozen=True)
class DeformationParams:
    """The conformal-like factor f (> 0) driving the deformation."""

    f: ScalarExpr

    @classmethod
    def of(cls, f) -> "DeformationParams":
        return cls(f=as_expr(f))

    def validate(self, domain, check_points: int = 50) -> None:
        for p in domain.sample(check_points, seed_or_rng=0):
            v = self.f.value(p)
            if not v > 0.0:
                raise NonPositiveFError(p, v)


def deform(
    s: AcmStructure,
    params: DeformationParams,
    fields: CornerFields | None = None,
    validate: bool = True,
) -> AcmStructure:
    """The deformed structure (phi~, xi, eta~, g~) of a corner structure."""
    cf = fields if fields is not None else CornerFields(s)
    if validate:
        params.validate(s.domain)
    f = ScalarField.from_expr(params.f)

    eta_t = [s.eta.components[j] - cf.theta2.components[j] for j in range(3)]
    phi_t = [
        [
            s.phi.entries[k][j] + cf.theta1.components[j] * s.xi.components[k]
            for j in range(3)
        ]
        for k in range(3)
    ]
    g_t = [
        [
            f * s.g.entries[i][j]
            - f * s.eta.components[i] * s.eta.components[j]
            + eta_t[i] * eta_t[j]
            for j in range(3)
        ]
        for i in range(3)
    ]
    return AcmStructure(
        phi=TensorField11(phi_t),
        xi=s.xi,
        eta=OneFormField(eta_t),
        g=MetricField(g_t),
        domain=s.domain,
    )


def ntilde_identity_residual(
    s: AcmStructure,
    params: DeformationParams,
    points,
    rng=None,
    pairs_per_point: int = 2,
    tol: float = 1e-7,
    fields: CornerFields | None = None,
) -> ResidualReport:
    """Closed form of the deformed normality tensor versus brute force.

    Closed form:  N~(X, Y) = 2 (1 - sigma e^{-rho})
    (d eta(X, Y) - d eta(phi X, xi) theta2(phi Y) - d eta(xi, phi Y) theta2(phi X)) xi.
    The brute-force route evaluates the Nijenhuis tensor of the deformed phi
    plus its d(eta~) correction.  The residual is the max-abs component gap.
    """
    cf = fields if fields is not None else CornerFields(s)
    deformed = deform(s, params, fields=cf)
    tracker = ResidualTracker()
    for p in np.atleast_2d(points):
        f = cf.frame(p)
        P = s.phi.matrix(p)
        xi = s.xi.values(p)
        deta = d_oneform_matrix(s.eta, p)
        th2 = f.theta2
        factor = 2.0 * (1.0 - f.sigma / f.e_rho)
        n_pairs = max(1, pairs_per_point)
        for _ in range(n_pairs):
            if rng is None:
                x, y = np.eye(3)[0], np.eye(3)[1]
            else:
                x, y = rng.standard_normal(3), rng.standard_normal(3)
            px, py = P @ x, P @ y
            scalar = (
                x @ deta @ y
                - (px @ deta @ xi) * (th2 @ py)
                - (xi @ deta @ py) * (th2 @ px)
            )
            closed = factor * scalar * xi
            brute = n1_tensor(deformed, x, y, p)
            tracker.update("ntilde_closed_vs_brute", np.max(np.abs(closed - brute)), p)
            tracker.update("ntilde_max", np.max(np.abs(brute)), p)
    tolerances = {"ntilde_closed_vs_brute": tol, "ntilde_max": None}
    return tracker.report("ntilde_identity", tolerances)


@dataclass
class DeformedTypeReport:
    """Trans-Sasakian type data of the deformation plus its form identities."""

    alphas: np.ndarray
    betas: np.ndarray
    residuals: ResidualReport
    gate_residual_max: float
    gate_holds: bool

    def to_dict(self) -> dict:
        return {
            "alpha": _stats(self.alphas),
            "beta": _stats(self.betas),
            "residuals": self.residuals.to_dict(),
            "normal_gate": {
                "sigma_minus_erho_max": self.gate_residual_max,
                "holds": self.gate_holds,
            },
        }


def _stats(arr: np.ndarray) -> dict:
    return {
        "mean": float(np.mean(arr)),
        "std": float(np.std(arr)),
        "min": float(np.min(arr)),
        "max": float(np.max(arr)),
    }


def deformed_type(
    s: AcmStructure,
    params: DeformationParams,
    points,
    kernel_tol: float = 1e-8,
    gate_tol: float = 1e-6,
    fields: CornerFields | None = None,
) -> DeformedTypeReport:
    """Type functions (alpha~, beta~) and the deformed structure equations.

    Checks, at every sample point: the exact scaling Phi~ = f Phi; the
    derivative identity d(ln f) ^ Phi~ = xi(ln f) eta~ ^ Phi~; and the two
    structure equations

        d eta~ = (1 - sigma e^{-rho}) d eta + (div V - e^rho)/(2f) Phi~,
        d Phi~ = xi(ln f) eta~ ^ Phi~.

    The Phi~ coefficient is forced by eta~ = eta - theta2 together with the
    exterior derivative of theta2; with it, the first equation holds for every
    corner structure, and at the gate it reduces to d eta~ = alpha~ Phi~.

    The "normal gate" records how far sigma is from e^rho; type functions are
    reported regardless, since they are defined whenever the gate holds.
    """
    cf = fields if fields is not None else CornerFields(s)
    deformed = deform(s, params, fields=cf)
    phi_t_fields = fundamental_two_form_fields(deformed)
    tracker = ResidualTracker()
    alphas, betas = [], []
    gate = 0.0
    for p in np.atleast_2d(points):
        f = cf.frame(p)
        fj = params.f.eval_jet2(p)
        xi = s.xi.values(p)
        dlnf = fj.grad / fj.value
        xi_lnf = float(xi @ dlnf)

        phi_mat = fundamental_two_form_matrix(s, p)
        phi_t_mat = fundamental_two_form_matrix(deformed, p)
        eta_t = deformed.eta.values(p)
        deta = d_oneform_matrix(s.eta, p)
        deta_t = d_oneform_matrix(deformed.eta, p)

        tracker.update(
            "phi_scaling", np.max(np.abs(phi_t_mat - fj.value * phi_mat)), p
        )
        eta_wedge = wedge12_coeff(eta_t, phi_t_mat)
        tracker.update(
            "lemma_dlnf_wedge",
            abs(wedge12_coeff(dlnf, phi_t_mat) - xi_lnf * eta_wedge),
            p,
        )
        rhs = (1.0 - f.sigma / f.e_rho) * deta + (
            (f.div_v - f.e_rho) / (2.0 * fj.value)
        ) * phi_t_mat
        tracker.update("d_eta_tilde", np.max(np.abs(deta_t - rhs)), p)
        tracker.update(
            "d_phi_tilde",
            abs(d_twoform_coeff(phi_t_fields, p) - xi_lnf * eta_wedge),
            p,
        )

        alphas.append((f.div_v - f.e_rho) / (2.0 * fj.value))
        betas.append(0.5 * xi_lnf)
        gate = max(gate, abs(f.sigma - f.e_rho))

    tolerances = {
        "phi_scaling": kernel_tol / 10.0,
        "lemma_dlnf_wedge": kernel_tol,
        "d_eta_tilde": kernel_tol * 10.0,
        "d_phi_tilde": kernel_tol * 10.0,
    }
    return DeformedTypeReport(
        alphas=np.array(alphas),
        betas=np.array(betas),
        residuals=tracker.report("deformed_type", tolerances),
        gate_residual_max=float(gate),
        gate_holds=gate < gate_tol,
    )


def corollary_case(
    e_rho: float, div_v: float, f_value: float, xi_f: float, tol: float = 1e-6
) -> str:
    """Special-case selector for a *normal* deformation (sigma = e^rho).

    cosymplectic: div V = e^rho, xi(f) = 0;  Kenmotsu: div V = e^rho,
    xi(f) = 2f;  Sasakian: div V = e^rho + 2f, xi(f) = 0 (the value of
    alpha~ = (div V - e^rho)/(2f) at 1); anything else is generic
    trans-Sasakian.
    """
    div_at_erho = abs(div_v - e_rho) < tol
    if div_at_erho and abs(xi_f) < tol:
        return COSYMPLECTIC
    if div_at_erho and abs(xi_f - 2.0 * f_value) < tol:
        return KENMOTSU
    if abs(div_v - (e_rho + 2.0 * f_value)) < tol and abs(xi_f) < tol:
        return SASAKIAN
    return TRANS_SASAKIAN


@dataclass
class GateReport:
    """Outcome of the normality gate and, if open, the special-case verdict."""

    gate_holds: bool
    gate_residual_max: float
    case: str | None
    cases_seen: list
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "gate_holds": self.gate_holds,
            "sigma_minus_erho_max": self.gate_residual_max,
            "case": self.case,
            "cases_seen": self.cases_seen,
            "tolerance": self.tolerance,
        }


def corollary_gate(
    s: AcmStructure,
    params: DeformationParams,
    points,
    tol: float = 1e-6,
    fields: CornerFields | None = None,
) -> GateReport:
    """Check sigma = e^rho; only then evaluate the special-case corollary."""
    cf = fields if fields is not None else CornerFields(s)
    points = np.atleast_2d(points)
    gate = 0.0
    cases = set()
    for p in points:
        f = cf.frame(p)
        gate = max(gate, abs(f.sigma - f.e_rho))
    gate_holds = gate < tol
    case = None
    if gate_holds:
        for p in points:
            f = cf.frame(p)
            fj = params.f.eval_jet2(p)
            xi_f = float(s.xi.values(p) @ fj.grad)
            cases.add(corollary_case(f.e_rho, f.div_v, fj.value, xi_f, tol))
        # a mixed bag of pointwise cases is only generically trans-Sasakian
        case = next(iter(cases)) if len(cases) == 1 else TRANS_SASAKIAN
    return GateReport(
        gate_holds=gate_holds,
        gate_residual_max=float(gate),
        case=case,
        cases_seen=sorted(cases),
        tolerance=tol,
    )
