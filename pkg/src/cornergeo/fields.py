"""Field containers over a 3-dimensional chart.

A *field* here is a lazily evaluated map from chart points to jets (see
:mod:`cornergeo.expr`).  Fields built from parsed expressions carry exact
value/gradient/Hessian; fields derived from them (e.g. Christoffel symbols,
frame components) carry value/gradient.  The containers below are thin:
component access plus the handful of evaluation shapes the geometry needs
(values, Jacobians, jets).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Jet2, ScalarExpr, as_expr, jet_exp, jet_log, jet_sqrt

__all__ = [
    "SingularMetricError",
    "as_point",
    "ChartDomain",
    "jet_partial",
    "ScalarField",
    "VectorField",
    "OneFormField",
    "TensorField11",
    "MetricField",
]

# metric regularity guard: |det g| below this counts as singular
DET_GUARD = 1e-12


class SingularMetricError(RuntimeError):
    """Metric determinant fell under the regularity guard at a point."""

    def __init__(self, point, det: float):
        super().__init__(
            f"metric is singular at {np.asarray(point).tolist()}: det = {det:.3e}"
        )
        self.point = np.asarray(point, dtype=float)
        self.det = float(det)


def as_point(p) -> np.ndarray:
    """Validate and normalize a chart point to a float array of shape (3,)."""
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,):
        arr = arr.reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"chart point has non-finite coordinates: {arr.tolist()}")
    return arr


@dataclass(frozen=True)
class ChartDomain:
    """An axis-aligned box of chart points with seeded uniform sampling."""

    bounds: tuple = ((0.1, 1.0), (0.1, 1.0), (0.1, 1.0))

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(b) != 3:
            raise ValueError("domain needs bounds for exactly three coordinates")
        for lo, hi in b:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"invalid coordinate interval ({lo}, {hi})")
        object.__setattr__(self, "bounds", b)

    def sample(self, n: int, seed_or_rng=0) -> np.ndarray:
        """Draw ``n`` uniform points, shape (n, 3)."""
        rng = (
            seed_or_rng
            if isinstance(seed_or_rng, np.random.Generator)
            else np.random.default_rng(seed_or_rng)
        )
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return lo + (hi - lo) * rng.random((int(n), 3))

    def contains(self, p) -> bool:
        x = as_point(p)
        return all(lo <= xi <= hi for xi, (lo, hi) in zip(x, self.bounds))

    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2.0 for lo, hi in self.bounds])


def jet_partial(j: Jet2, i: int) -> Jet2:
    """The i-th coordinate derivative of a jet, one order shallower."""
    if j.grad is None:
        raise ValueError("jet carries no gradient; cannot take a partial")
    return Jet2(j.grad[i], None if j.hess is None else j.hess[i], None)


class ScalarField:
    """A scalar quantity on the chart, evaluated on demand as a jet."""

    __slots__ = ("_fn",)

    def __init__(self, fn):
        self._fn = fn

    @classmethod
    def from_expr(cls, e) -> "ScalarField":
        expr = as_expr(e)
        return cls(lambda p: expr.eval_jet2(p))

    @classmethod
    def constant(cls, c: float) -> "ScalarField":
        c = float(c)
        return cls(lambda p: Jet2.constant(c))

    def jet(self, p) -> Jet2:
        return self._fn(p)

    def value(self, p) -> float:
        return self._fn(p).value

    def partial(self, i: int) -> "ScalarField":
        return ScalarField(lambda p: jet_partial(self.jet(p), i))

    def cached(self) -> "ScalarField":
        """Memoize evaluation per point (keyed by the point's bytes)."""
        memo: dict = {}

        def fn(p):
            key = as_point(p).tobytes()
            hit = memo.get(key)
            if hit is None:
                hit = memo[key] = self._fn(p)
            return hit

        return ScalarField(fn)

    def __neg__(self):
        return ScalarField(lambda p: -self.jet(p))

    def __add__(self, other):
        o = _as_field(other)
        return ScalarField(lambda p: self.jet(p) + o.jet(p))

    __radd__ = __add__

    def __sub__(self, other):
        o = _as_field(other)
        return ScalarField(lambda p: self.jet(p) - o.jet(p))

    def __rsub__(self, other):
        o = _as_field(other)
        return ScalarField(lambda p: o.jet(p) - self.jet(p))

    def __mul__(self, other):
        o = _as_field(other)
        return ScalarField(lambda p: self.jet(p) * o.jet(p))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_field(other)
        return ScalarField(lambda p: self.jet(p) / o.jet(p))

    def __rtruediv__(self, other):
        o = _as_field(other)
        return ScalarField(lambda p: o.jet(p) / self.jet(p))

    def exp(self):
        return ScalarField(lambda p: jet_exp(self.jet(p)))

    def log(self):
        return ScalarField(lambda p: jet_log(self.jet(p)))

    def sqrt(self):
        return ScalarField(lambda p: jet_sqrt(self.jet(p)))


def _as_field(obj) -> ScalarField:
    if isinstance(obj, ScalarField):
        return obj
    if isinstance(obj, (ScalarExpr, str)):
        return ScalarField.from_expr(obj)
    return ScalarField.constant(float(obj))


def _component_fields(entries, n: int) -> tuple:
    comps = tuple(_as_field(e) for e in entries)
    if len(comps) != n:
        raise ValueError(f"expected {n} components, got {len(comps)}")
    return comps


class _ComponentsMixin:
    """Shared evaluation helpers for rank-1 fields (vector / one-form)."""

    __slots__ = ()

    def jets(self, p) -> list:
        return [c.jet(p) for c in self.components]

    def values(self, p) -> np.ndarray:
        return np.array([c.value(p) for c in self.components])

    def jacobian(self, p) -> np.ndarray:
        """Matrix of partials ``J[k, i] = d_i comp_k``."""
        return np.array([c.jet(p).grad for c in self.components])


class VectorField(_ComponentsMixin):
    __slots__ = ("components",)

    def __init__(self, components):
        self.components = _component_fields(components, 3)

    @classmethod
    def from_exprs(cls, comps) -> "VectorField":
        return cls(comps)

    @classmethod
    def constant(cls, vec) -> "VectorField":
        return cls([float(v) for v in np.asarray(vec, dtype=float).reshape(3)])


class OneFormField(_ComponentsMixin):
    __slots__ = ("components",)

    def __init__(self, components):
        self.components = _component_fields(components, 3)

    @classmethod
    def from_exprs(cls, comps) -> "OneFormField":
        return cls(comps)

    def pair(self, X: VectorField) -> ScalarField:
        """The scalar field theta(X)."""
        c, xc = self.components, X.components
        return c[0] * xc[0] + c[1] * xc[1] + c[2] * xc[2]


class TensorField11:
    """A (1,1)-tensor field; ``entries[k][j]`` maps input j to output k."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = [_component_fields(row, 3) for row in entries]
        if len(rows) != 3:
            raise ValueError("a (1,1)-tensor field needs a 3x3 entry grid")
        self.entries = tuple(rows)

    def matrix(self, p) -> np.ndarray:
        return np.array([[e.value(p) for e in row] for row in self.entries])

    def jets(self, p) -> list:
        return [[e.jet(p) for e in row] for row in self.entries]

    def apply(self, X: VectorField) -> VectorField:
        """phi(X) as a vector field (components stay symbolic jets)."""
        rows = self.entries
        return VectorField(
            [
                rows[k][0] * X.components[0]
                + rows[k][1] * X.components[1]
                + rows[k][2] * X.components[2]
                for k in range(3)
            ]
        )


class MetricField:
    """A symmetric metric field with jet-level Christoffel symbols.

    Christoffel symbols are computed through jet arithmetic, so when the
    metric entries are expression-backed the symbols carry exact first
    derivatives (used for curvature-free frame derivatives downstream).
    Results are memoized per point.
    """

    __slots__ = ("entries", "det_guard", "_cache")

    def __init__(self, entries, det_guard: float = DET_GUARD):
        rows = [_component_fields(row, 3) for row in entries]
        if len(rows) != 3:
            raise ValueError("a metric field needs a 3x3 entry grid")
        self.entries = tuple(rows)
        self.det_guard = float(det_guard)
        self._cache: dict = {}

    @classmethod
    def diagonal(cls, d0, d1, d2) -> "MetricField":
        zero = ScalarField.constant(0.0)
        return cls(
            [
                [_as_field(d0), zero, zero],
                [zero, _as_field(d1), zero],
                [zero, zero, _as_field(d2)],
            ]
        )

    # -- plain evaluation ---------------------------------------------------

    def matrix(self, p) -> np.ndarray:
        return np.array([[e.value(p) for e in row] for row in self.entries])

    def jets(self, p) -> list:
        return [[e.jet(p) for e in row] for row in self.entries]

    def det(self, p) -> float:
        return float(np.linalg.det(self.matrix(p)))

    def inverse(self, p) -> np.ndarray:
        G = self.matrix(p)
        det = float(np.linalg.det(G))
        if abs(det) < self.det_guard:
            raise SingularMetricError(p, det)
        return np.linalg.inv(G)

    def inner(self, p, a, b) -> float:
        return float(np.asarray(a) @ self.matrix(p) @ np.asarray(b))

    def norm(self, p, a) -> float:
        sq = self.inner(p, a, a)
        return float(np.sqrt(max(sq, 0.0)))

    # -- Christoffel symbols ------------------------------------------------

    def christoffel_jets(self, p):
        """Nested list ``Gamma[k][i][j]`` of jets (value + gradient)."""
        key = as_point(p).tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit

        G = self.jets(p)
        det, Ginv = _invert3_jets(G)
        if abs(det.value) < self.det_guard:
            raise SingularMetricError(p, det.value)

        # dg[a][i][j] = d_a g_ij, one jet order down from the metric entries
        dg = [
            [[jet_partial(G[i][j], a) for j in range(3)] for i in range(3)]
            for a in range(3)
        ]
        ginv_low = [[_drop_order(Ginv[i][j]) for j in range(3)] for i in range(3)]

        gamma = []
        for k in range(3):
            rows = []
            for i in range(3):
                row = []
                for j in range(3):
                    acc = None
                    for l in range(3):
                        term = ginv_low[k][l] * (
                            dg[i][j][l] + dg[j][i][l] - dg[l][i][j]
                        )
                        acc = term if acc is None else acc + term
                    row.append(acc * 0.5)
                rows.append(row)
            gamma.append(rows)

        self._cache[key] = gamma
        return gamma

    def christoffel(self, p) -> np.ndarray:
        """Values ``Gamma[k, i, j]`` of the Levi-Civita connection."""
        jets = self.christoffel_jets(p)
        return np.array(
            [[[jets[k][i][j].value for j in range(3)] for i in range(3)] for k in range(3)]
        )

    def christoffel_partials(self, p) -> np.ndarray:
        """Partials ``dGamma[a, k, i, j] = d_a Gamma^k_ij``."""
        jets = self.christoffel_jets(p)
        out = np.empty((3, 3, 3, 3))
        for k in range(3):
            for i in range(3):
                for j in range(3):
                    out[:, k, i, j] = jets[k][i][j].grad
        return out


def _drop_order(j: Jet2) -> Jet2:
    """Forget the Hessian so products stay at (value, gradient) depth."""
    return Jet2(j.value, j.grad, None)


def _invert3_jets(G):
    """Determinant and inverse of a 3x3 jet matrix via the adjugate."""
    c = [[None] * 3 for _ in range(3)]  # cofactors
    idx = ((1, 2), (0, 2), (0, 1))
    for i in range(3):
        r = idx[i]
        for j in range(3):
            s = idx[j]
            minor = G[r[0]][s[0]] * G[r[1]][s[1]] - G[r[0]][s[1]] * G[r[1]][s[0]]
            c[i][j] = minor if (i + j) % 2 == 0 else -minor
    det = G[0][0] * c[0][0] + G[0][1] * c[0][1] + G[0][2] * c[0][2]
    inv = [[c[j][i] / det for j in range(3)] for i in range(3)]
    return det, inv
