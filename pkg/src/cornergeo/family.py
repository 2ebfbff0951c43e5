"""The explicit family of structures on an R^3 chart with diagonal metric.

Given three positive functions tau, kappa, mu of the chart coordinates, set

    g   = diag(tau^2, kappa^2, mu^2),
    xi  = (1/tau) d1,          eta = tau dx1,
    phi d1 = 0,  phi d2 = (kappa/mu) d3,  phi d3 = -(mu/kappa) d2.

This is always an almost contact metric structure; it satisfies the corner
condition exactly when kappa and mu do not depend on x1.  Then

    psi = (tau_2 / (tau kappa^2)) d2 + (tau_3 / (tau mu^2)) d3,
    |psi|^2 = (tau_2^2/kappa^2 + tau_3^2/mu^2) / tau^2,

and the derived frame quantities feed every construction downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acms import AcmStructure
from .expr import Call, ScalarExpr, as_expr
from .fields import ChartDomain, MetricField, OneFormField, TensorField11, VectorField
from .report import ResidualReport
from .corner import corner_residual

__all__ = [
    "FamilyParams",
    "build_family",
    "family_corner_criterion",
    "FamilyCriterionReport",
    "Preset",
    "preset",
    "preset_structure",
    "PRESET_NAMES",
    "random_family",
]


@dataclass(frozen=True)
class FamilyParams:
    """Generating functions of one member of the family."""

    tau: ScalarExpr
    kappa: ScalarExpr
    mu: ScalarExpr
    domain: ChartDomain = ChartDomain()

    @classmethod
    def of(cls, tau, kappa, mu, domain=None) -> "FamilyParams":
        return cls(
            tau=as_expr(tau),
            kappa=as_expr(kappa),
            mu=as_expr(mu),
            domain=domain or ChartDomain(),
        )


def build_family(params: FamilyParams, check_points: int = 50) -> AcmStructure:
    """Assemble the structure; validates tau > 0 and tau*kappa*mu != 0 on a sample."""
    tau, kappa, mu = params.tau, params.kappa, params.mu
    for p in params.domain.sample(check_points, seed_or_rng=0):
        t, k, m = tau.value(p), kappa.value(p), mu.value(p)
        if not t > 0.0:
            raise ValueError(
                f"family requires tau > 0; tau({p.tolist()}) = {t:.3e}"
            )
        if abs(t * k * m) < 1e-9:
            raise ValueError(
                f"family requires tau*kappa*mu != 0; value at {p.tolist()} = {t * k * m:.3e}"
            )

    zero = as_expr(0)
    one = as_expr(1)
    return AcmStructure(
        phi=TensorField11(
            [
                [zero, zero, zero],
                [zero, zero, -(mu / kappa)],
                [zero, kappa / mu, zero],
            ]
        ),
        xi=VectorField([one / tau, zero, zero]),
        eta=OneFormField([tau, zero, zero]),
        g=MetricField.diagonal(tau**2, kappa**2, mu**2),
        domain=params.domain,
    )


@dataclass
class FamilyCriterionReport:
    """The x1-independence criterion versus the connection-level residual."""

    max_kappa1: float
    max_mu1: float
    criterion_holds: bool
    corner_residual_max: float
    corner_holds: bool
    consistent: bool
    criterion_tol: float
    residual_tol: float

    def to_dict(self) -> dict:
        return {
            "max_kappa1": self.max_kappa1,
            "max_mu1": self.max_mu1,
            "criterion_holds": self.criterion_holds,
            "corner_residual_max": self.corner_residual_max,
            "corner_holds": self.corner_holds,
            "consistent": self.consistent,
            "criterion_tol": self.criterion_tol,
            "residual_tol": self.residual_tol,
        }


def family_corner_criterion(
    params: FamilyParams,
    points,
    criterion_tol: float = 1e-8,
    residual_tol: float = 1e-8,
    structure: AcmStructure | None = None,
) -> FamilyCriterionReport:
    """Evaluate d(kappa)/dx1 and d(mu)/dx1 and cross-check the corner residual."""
    points = np.atleast_2d(points)
    max_k1 = max(abs(params.kappa.eval_jet2(p).grad[0]) for p in points)
    max_m1 = max(abs(params.mu.eval_jet2(p).grad[0]) for p in points)
    criterion = max_k1 < criterion_tol and max_m1 < criterion_tol

    s = structure if structure is not None else build_family(params)
    rep: ResidualReport = corner_residual(s, points, tol=residual_tol)
    corner_holds = rep.worst() < residual_tol
    return FamilyCriterionReport(
        max_kappa1=float(max_k1),
        max_mu1=float(max_m1),
        criterion_holds=criterion,
        corner_residual_max=float(rep.worst()),
        corner_holds=corner_holds,
        consistent=criterion == corner_holds,
        criterion_tol=criterion_tol,
        residual_tol=residual_tol,
    )


@dataclass(frozen=True)
class Preset:
    """A named member of the family with its expected behavior."""

    name: str
    params: FamilyParams
    expected: dict


_PRESETS = {
    "A": Preset(
        name="family:A",
        params=FamilyParams.of("exp(x2)", "1", "exp(x2)"),
        expected={
            # div V = 2 e^rho with sigma = phiV(rho) = 0: the V-twin becomes
            # beta-Kenmotsu with beta = e^rho = 1
            "corner": True,
            "thken_conditions": True,
            "thcos_conditions": False,
            "twin_beta": "1",
            "base_verdict": "not-normal",
            "omega_closed": True,
        },
    ),
    "B": Preset(
        name="family:B",
        params=FamilyParams.of("exp(x2)", "1", "1"),
        expected={
            # div V = e^rho with sigma = phiV(rho) = 0: the phiV-twin is
            # cosymplectic
            "corner": True,
            "thken_conditions": False,
            "thcos_conditions": True,
            "base_verdict": "not-normal",
            "omega_closed": True,
        },
    ),
    "C": Preset(
        name="family:C",
        params=FamilyParams.of("exp(x2)", "exp(x1)", "1"),
        expected={
            # kappa depends on x1: the corner criterion fails
            "corner": False,
            "thken_conditions": False,
            "thcos_conditions": False,
            "base_verdict": "not-normal",
            "omega_closed": True,
        },
    ),
    "D": Preset(
        name="family:D",
        params=FamilyParams.of("exp(x2 + x3)", "1 + x2^2", "1 + x2*x3"),
        expected={
            # generic corner member: neither twin theorem's conditions hold,
            # omega is still closed so sigma vanishes
            "corner": True,
            "thken_conditions": False,
            "thcos_conditions": False,
            "base_verdict": "not-normal",
            "omega_closed": True,
        },
    ),
}

PRESET_NAMES = tuple(f"family:{k}" for k in sorted(_PRESETS))


def preset(name: str) -> Preset:
    """Look up a preset by short name ("A") or full name ("family:A")."""
    key = name.split(":", 1)[1] if name.startswith("family:") else name
    try:
        return _PRESETS[key.upper()]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None


def preset_structure(name: str) -> AcmStructure:
    return build_family(preset(name).params)


def random_family(rng: np.random.Generator, corner: bool = True, domain=None) -> FamilyParams:
    """Draw a random positive (tau, kappa, mu) triple.

    With ``corner=True`` kappa and mu are x1-free, so the structure satisfies
    the defining condition; tau may couple x1 with x2/x3, which is what makes
    sigma and d(omega) nonzero in general.
    """
    a = rng.uniform(-1.0, 1.0, size=5)
    # an exponential keeps tau positive whatever the coefficients are
    exponent = (
        as_expr("x2") * a[0]
        + as_expr("x3") * a[1]
        + as_expr("x1*x2") * a[2]
        + as_expr("x1*x3") * a[3]
        + as_expr("x1") * a[4]
    )
    tau_expr = ScalarExpr(Call("exp", exponent.root))

    k = rng.uniform(0.5, 1.5)
    k2, k3 = rng.uniform(0.0, 1.0, size=2)
    kappa = as_expr(k) + as_expr("x2^2") * k2 + as_expr("x2*x3") * k3
    m = rng.uniform(0.5, 1.5)
    m2, m3 = rng.uniform(0.0, 1.0, size=2)
    mu = as_expr(m) + as_expr("x3^2") * m2 + as_expr("x2*x3") * m3
    if not corner:
        kappa = kappa + as_expr("x1^2") * rng.uniform(0.5, 1.5)
        mu = mu + as_expr("x1") * rng.uniform(0.5, 1.5)
    return FamilyParams.of(tau_expr, kappa, mu, domain=domain)
