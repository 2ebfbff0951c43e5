"""Almost contact metric structures on a 3-dimensional chart.

A structure is a quadruple (phi, xi, eta, g) with

    eta(xi) = 1,
    phi^2 X = -X + eta(X) xi,
    g(phi X, phi Y) = g(X, Y) - eta(X) eta(Y),

from which phi(xi) = 0 and eta o phi = 0 follow.  This module checks the
axioms, evaluates the fundamental 2-form and the Nijenhuis-type tensors,
computes the Olszak normality functions (alpha, beta), and classifies a
structure within the trans-Sasakian taxonomy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    ChartDomain,
    MetricField,
    OneFormField,
    SingularMetricError,
    TensorField11,
    VectorField,
)
from .report import ResidualReport, ResidualTracker
from .tensor import (
    divergence,
    exterior_d_oneform,
    lie_bracket,
    nabla_matrix,
    probe_vectors,
)

__all__ = [
    "AcmStructure",
    "ClassificationReport",
    "check_axioms",
    "fundamental_two_form",
    "fundamental_two_form_matrix",
    "fundamental_two_form_fields",
    "nijenhuis",
    "n1_tensor",
    "n3_tensor",
    "olszak_alpha_beta",
    "trans_sasakian_residual",
    "normality_residual",
    "classify",
    "SASAKIAN",
    "ALPHA_SASAKIAN",
    "KENMOTSU",
    "BETA_KENMOTSU",
    "COSYMPLECTIC",
    "TRANS_SASAKIAN",
    "NOT_NORMAL",
]

SASAKIAN = "Sasakian"
ALPHA_SASAKIAN = "alpha-Sasakian"
KENMOTSU = "Kenmotsu"
BETA_KENMOTSU = "beta-Kenmotsu"
COSYMPLECTIC = "cosymplectic"
TRANS_SASAKIAN = "trans-Sasakian"
NOT_NORMAL = "not-normal"

_BASIS = [np.eye(3)[k] for k in range(3)]


@dataclass(frozen=True, eq=False)
class AcmStructure:
    """An almost contact metric structure given by component fields."""

    phi: TensorField11
    xi: VectorField
    eta: OneFormField
    g: MetricField
    domain: ChartDomain

    @classmethod
    def from_expressions(cls, phi, xi, eta, g, domain=None) -> "AcmStructure":
        """Build a structure from expression strings / numbers per component."""
        return cls(
            phi=TensorField11(phi),
            xi=VectorField(xi),
            eta=OneFormField(eta),
            g=MetricField(g),
            domain=domain or ChartDomain(),
        )


def _coerce_vec(X) -> VectorField:
    if isinstance(X, VectorField):
        return X
    return VectorField.constant(X)


def check_axioms(s: AcmStructure, points, tol: float = 1e-8) -> ResidualReport:
    """Max residuals of the three axioms and the two derived identities.

    Singular-metric points are skipped and counted in the report details.
    """
    tracker = ResidualTracker()
    skipped = 0
    for p in np.atleast_2d(points):
        try:
            G = s.g.matrix(p)
            Ginv = s.g.inverse(p)
        except SingularMetricError:
            skipped += 1
            continue
        P = s.phi.matrix(p)
        xi = s.xi.values(p)
        eta = s.eta.values(p)
        tracker.update("eta_xi", abs(eta @ xi - 1.0), p)
        tracker.update(
            "phi_square",
            np.linalg.norm(P @ P + np.eye(3) - np.outer(xi, eta), 2),
            p,
        )
        tracker.update(
            "metric_compat",
            np.linalg.norm(P.T @ G @ P - G + np.outer(eta, eta), 2),
            p,
        )
        pxi = P @ xi
        tracker.update("phi_xi", np.sqrt(max(pxi @ G @ pxi, 0.0)), p)
        tracker.update("eta_phi", np.linalg.norm(eta @ P), p)
        # eta must be the metric dual of xi (derived, but cheap to verify)
        tracker.update("eta_sharp_xi", np.linalg.norm(Ginv @ eta - xi), p)
    return tracker.report("axioms", tol, details={"skipped_points": skipped})


def fundamental_two_form(s: AcmStructure, X, Y, p) -> float:
    """Phi(X, Y) = g(X, phi Y)."""
    xv = _coerce_vec(X).values(p)
    yv = _coerce_vec(Y).values(p)
    return float(xv @ s.g.matrix(p) @ s.phi.matrix(p) @ yv)


def fundamental_two_form_matrix(s: AcmStructure, p) -> np.ndarray:
    """Coefficients Phi_ij = g(d_i, phi d_j)."""
    return s.g.matrix(p) @ s.phi.matrix(p)


def fundamental_two_form_fields(s: AcmStructure):
    """The coefficients Phi_ij as scalar fields (for exterior derivatives)."""
    out = []
    for i in range(3):
        row = []
        for j in range(3):
            acc = None
            for k in range(3):
                term = s.g.entries[i][k] * s.phi.entries[k][j]
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(row)
    return out


def nijenhuis(s: AcmStructure, X, Y, p) -> np.ndarray:
    """The Nijenhuis torsion of phi on (X, Y) at p."""
    Xf, Yf = _coerce_vec(X), _coerce_vec(Y)
    phiX = s.phi.apply(Xf)
    phiY = s.phi.apply(Yf)
    P = s.phi.matrix(p)
    br = lie_bracket(Xf, Yf, p)
    return (
        P @ (P @ br)
        + lie_bracket(phiX, phiY, p)
        - P @ lie_bracket(phiX, Yf, p)
        - P @ lie_bracket(Xf, phiY, p)
    )


def n1_tensor(s: AcmStructure, X, Y, p) -> np.ndarray:
    """N^(1)(X, Y) = N_phi(X, Y) + 2 d eta(X, Y) xi (normality tensor)."""
    Xf, Yf = _coerce_vec(X), _coerce_vec(Y)
    deta = exterior_d_oneform(s.eta, Xf, Yf, p)
    return nijenhuis(s, Xf, Yf, p) + 2.0 * deta * s.xi.values(p)


def n3_tensor(s: AcmStructure, X, p) -> np.ndarray:
    """N^(3)(X) = phi[X, xi] - [phi X, xi]."""
    Xf = _coerce_vec(X)
    phiX = s.phi.apply(Xf)
    return s.phi.matrix(p) @ lie_bracket(Xf, s.xi, p) - lie_bracket(phiX, s.xi, p)


def olszak_alpha_beta(s: AcmStructure, p) -> tuple[float, float]:
    """The normality functions: 2 alpha = tr(phi . nabla xi), 2 beta = div xi."""
    A = nabla_matrix(s.g, s.xi, p)
    alpha = 0.5 * float(np.trace(s.phi.matrix(p) @ A))
    beta = 0.5 * divergence(s.g, s.xi, p)
    return alpha, beta


def trans_sasakian_residual(
    s: AcmStructure, alpha, beta, points, rng=None, n_random: int = 4
) -> ResidualReport:
    """Worst g-norm of ``nabla_X xi + alpha phi X + beta phi^2 X`` over probes.

    ``alpha`` and ``beta`` may be numbers or callables of the point.  Probe
    directions are the g-normalized coordinate axes, xi itself, and optional
    seeded random unit vectors.
    """
    a_fn = alpha if callable(alpha) else (lambda _p, _a=float(alpha): _a)
    b_fn = beta if callable(beta) else (lambda _p, _b=float(beta): _b)
    tracker = ResidualTracker()
    for p in np.atleast_2d(points):
        G = s.g.matrix(p)
        P = s.phi.matrix(p)
        P2 = P @ P
        A = nabla_matrix(s.g, s.xi, p)
        a, b = a_fn(p), b_fn(p)
        R = A + a * P + b * P2
        for x in probe_vectors(s.g, p, rng, n_random, extra=[s.xi.values(p)]):
            r = R @ x
            tracker.update("trans_sasakian", np.sqrt(max(r @ G @ r, 0.0)), p)
    return tracker.report("trans_sasakian")


def normality_residual(s: AcmStructure, points) -> tuple[float, np.ndarray | None]:
    """Max g-norm of N^(1) over coordinate basis pairs and sample points."""
    worst, arg = 0.0, None
    for p in np.atleast_2d(points):
        G = s.g.matrix(p)
        for i in range(3):
            for j in range(i + 1, 3):
                v = n1_tensor(s, _BASIS[i], _BASIS[j], p)
                norm = float(np.sqrt(max(v @ G @ v, 0.0)))
                if norm > worst:
                    worst, arg = norm, np.asarray(p, dtype=float)
    return worst, arg


@dataclass
class ClassificationReport:
    """Verdict plus the (alpha, beta) statistics that produced it."""

    verdict: str
    alpha_mean: float
    alpha_std: float
    alpha_min: float
    alpha_max: float
    beta_mean: float
    beta_std: float
    beta_min: float
    beta_max: float
    normality: float
    normality_argmax: list | None
    points_used: int
    thresholds: dict
    notes: dict

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "alpha": {
                "mean": self.alpha_mean,
                "std": self.alpha_std,
                "min": self.alpha_min,
                "max": self.alpha_max,
            },
            "beta": {
                "mean": self.beta_mean,
                "std": self.beta_std,
                "min": self.beta_min,
                "max": self.beta_max,
            },
            "normality_residual": self.normality,
            "normality_argmax": self.normality_argmax,
            "points_used": self.points_used,
            "thresholds": self.thresholds,
            "notes": self.notes,
        }


def classify(
    s: AcmStructure,
    points=None,
    samples: int = 100,
    seed: int = 0,
    zero_tol: float = 1e-6,
    const_tol: float = 1e-6,
) -> ClassificationReport:
    """Place a structure in the trans-Sasakian taxonomy.

    Not-normal wins whenever the normality residual exceeds ``zero_tol``;
    otherwise the verdict follows from which of alpha, beta vanish or are
    constant across the sample.  The report keeps the statistics either way.
    """
    if points is None:
        points = s.domain.sample(samples, seed)
    points = np.atleast_2d(points)

    alphas, betas, skipped = [], [], 0
    for p in points:
        try:
            a, b = olszak_alpha_beta(s, p)
        except SingularMetricError:
            skipped += 1
            continue
        alphas.append(a)
        betas.append(b)
    if not alphas:
        raise SingularMetricError(points[0], 0.0)
    alphas = np.array(alphas)
    betas = np.array(betas)

    normality, arg = normality_residual(s, points)

    a_zero = np.max(np.abs(alphas)) < zero_tol
    b_zero = np.max(np.abs(betas)) < zero_tol
    a_const = np.std(alphas) < const_tol
    b_const = np.std(betas) < const_tol
    a_mean = float(np.mean(alphas))
    b_mean = float(np.mean(betas))

    if normality >= zero_tol:
        verdict = NOT_NORMAL
    elif a_zero and b_zero:
        verdict = COSYMPLECTIC
    elif a_zero:
        if b_const and abs(b_mean - 1.0) < zero_tol:
            verdict = KENMOTSU
        else:
            verdict = BETA_KENMOTSU
    elif b_zero:
        if a_const and abs(a_mean - 1.0) < zero_tol:
            verdict = SASAKIAN
        elif a_const:
            verdict = ALPHA_SASAKIAN
        else:
            verdict = TRANS_SASAKIAN
    else:
        verdict = TRANS_SASAKIAN

    return ClassificationReport(
        verdict=verdict,
        alpha_mean=a_mean,
        alpha_std=float(np.std(alphas)),
        alpha_min=float(np.min(alphas)),
        alpha_max=float(np.max(alphas)),
        beta_mean=b_mean,
        beta_std=float(np.std(betas)),
        beta_min=float(np.min(betas)),
        beta_max=float(np.max(betas)),
        normality=float(normality),
        normality_argmax=None if arg is None else [float(v) for v in arg],
        points_used=len(alphas),
        thresholds={"zero": zero_tol, "const": const_tol},
        notes={"skipped_points": skipped},
    )
