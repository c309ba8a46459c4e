"""Jet-valued dense tensor algebra on a coordinate chart.

Tensors are dense numpy arrays of jet coefficients with shape

    (npoints, dim, ..., dim, ncoeff)

so a whole batch of sample points flows through the curvature pipeline at
once.  Index variance is tracked per slot, symmetries are declared as
metadata and can be verified numerically, and every derivative-consuming
operation decrements the remaining jet order explicitly (an exhausted order
raises instead of silently truncating).

The comma convention of covariant differentiation appends the derivative
slot LAST: ``covariant_derivative(T)`` computes T_{...,a}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from riccisol import expr as ex
from riccisol import jet
from riccisol.jet import InsufficientOrderError, JetSpace, jet_space

_LETTERS = "abcdefgh"  # component-axis letters for einsum ('z' batch, 'm' dummy, 'y' derivative)


class MetricError(ValueError):
    pass


class NotPositiveDefiniteError(MetricError):
    pass


@dataclass
class MetricSpec:
    """A chart: dimension, metric component expressions, potential, soliton
    constant and the coordinate box on which the expressions are valid."""

    dim: int
    components: dict  # {(i, j): expr.Node} with 0 <= i <= j < dim
    potential: ex.Node
    lam: float
    domain: np.ndarray | None = None  # shape (dim, 2): lo/hi per coordinate
    periodic_axis: int | None = None  # circle factor, used by the quadrature
    period: float | None = None

    def __post_init__(self):
        if not 2 <= self.dim <= 5:
            raise MetricError(f"chart dimension must be in [2,5], got {self.dim}")
        for (i, j), node in self.components.items():
            if not (0 <= i <= j < self.dim):
                raise MetricError(f"metric component index ({i},{j}) out of range")
            used = ex.max_coord(node)
            if used > self.dim:
                raise MetricError(
                    f"g[{i + 1}][{j + 1}] uses x{used} but dim = {self.dim}"
                )
        if ex.max_coord(self.potential) > self.dim:
            raise MetricError("potential uses a coordinate beyond the chart dimension")
        if self.domain is None:
            self.domain = np.array([[-1.0, 1.0]] * self.dim)
        else:
            self.domain = np.asarray(self.domain, dtype=float).reshape(self.dim, 2)

    @classmethod
    def from_strings(cls, dim, components, potential, lam, domain=None, **kw):
        """Build from expression strings; component keys are 1-based (i, j)."""
        comp = {}
        for (i, j), text in components.items():
            if not (1 <= i <= j <= dim):
                raise MetricError(f"metric entries must have 1 <= i <= j <= {dim}")
            comp[(i - 1, j - 1)] = ex.parse(text) if isinstance(text, str) else text
        pot = ex.parse(potential) if isinstance(potential, str) else potential
        return cls(dim, comp, pot, float(lam), domain, **kw)

    def sample_points(self, count: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        return rng.uniform(lo, hi, size=(count, self.dim))

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        return np.all((pts >= lo - 1e-12) & (pts <= hi + 1e-12), axis=1)


class JetTensor:
    """Dense tensor of jets with per-slot variance flags."""

    __slots__ = ("data", "variance", "space", "sym")

    def __init__(self, data: np.ndarray, variance, space: JetSpace, sym=()):
        self.data = data
        self.variance = tuple(variance)
        self.space = space
        self.sym = tuple(sym)
        rank = len(self.variance)
        expected = (data.shape[0],) + (space.dim,) * rank + (space.ncoeff,)
        if data.shape != expected:
            raise ValueError(f"tensor data shape {data.shape} != expected {expected}")

    # -- structure -----------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def npoints(self) -> int:
        return self.data.shape[0]

    def values(self) -> np.ndarray:
        """Pointwise component values (the constant terms)."""
        return self.data[..., 0]

    def truncate(self, new_order: int) -> "JetTensor":
        if new_order == self.order:
            return self
        data = jet.truncate_arrays(self.space, self.data, new_order)
        return JetTensor(data, self.variance, jet_space(self.dim, new_order), self.sym)

    def transpose(self, perm) -> "JetTensor":
        perm = tuple(perm)
        axes = (0,) + tuple(p + 1 for p in perm) + (self.rank + 1,)
        sym = tuple(
            (kind, perm.index(a), perm.index(b)) for kind, a, b in self.sym
        )
        return JetTensor(
            np.ascontiguousarray(self.data.transpose(axes)),
            tuple(self.variance[p] for p in perm),
            self.space,
            sym,
        )

    def symmetry_residual(self) -> float:
        """Worst violation of the declared symmetries, hybrid-normalized."""
        worst = 0.0
        scale = 1.0 + float(np.max(np.abs(self.data))) if self.data.size else 1.0
        for kind, a, b in self.sym:
            perm = list(range(self.rank))
            perm[a], perm[b] = perm[b], perm[a]
            axes = (0,) + tuple(p + 1 for p in perm) + (self.rank + 1,)
            swapped = self.data.transpose(axes)
            if kind == "sym":
                resid = np.max(np.abs(self.data - swapped))
            elif kind == "skew":
                resid = np.max(np.abs(self.data + swapped))
            else:
                raise ValueError(f"unknown symmetry kind {kind!r}")
            worst = max(worst, float(resid) / scale)
        return worst

    def __add__(self, other):
        self._align(other)
        return JetTensor(self.data + other.data, self.variance, self.space)

    def __sub__(self, other):
        self._align(other)
        return JetTensor(self.data - other.data, self.variance, self.space)

    def __neg__(self):
        return JetTensor(-self.data, self.variance, self.space, self.sym)

    def __mul__(self, scalar):
        return JetTensor(self.data * float(scalar), self.variance, self.space, self.sym)

    __rmul__ = __mul__

    def _align(self, other):
        if not isinstance(other, JetTensor):
            raise TypeError("expected a JetTensor")
        if other.space is not self.space or other.variance != self.variance:
            raise ValueError("tensor mismatch: differing space or variance")

    def __repr__(self):
        return (
            f"JetTensor(rank={self.rank}, variance={''.join(self.variance)}, "
            f"dim={self.dim}, order={self.order}, npoints={self.npoints})"
        )


def scalar_tensor(data: np.ndarray, space: JetSpace) -> JetTensor:
    return JetTensor(data, (), space)


def zeros(npoints: int, variance, space: JetSpace, sym=()) -> JetTensor:
    rank = len(variance)
    data = np.zeros((npoints,) + (space.dim,) * rank + (space.ncoeff,))
    return JetTensor(data, variance, space, sym)


# ---------------------------------------------------------------------------
# metric assembly and inversion
# ---------------------------------------------------------------------------

def metric_at(spec: MetricSpec, points: np.ndarray, order: int):
    """Evaluate the metric and its inverse as jet tensors at a batch of points.

    The inverse is computed by jet-valued Gauss-Jordan elimination with
    partial pivoting on the constant terms (jets with a nonzero constant term
    are the units of the jet ring).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != spec.dim:
        raise MetricError(f"points must have dimension {spec.dim}")
    inside = spec.contains(points)
    if not np.all(inside):
        bad = points[~inside][0]
        raise MetricError(f"point {bad.tolist()} is outside the chart domain")
    sp = jet_space(spec.dim, order)
    nb, d = points.shape[0], spec.dim
    gdata = np.zeros((nb, d, d, sp.ncoeff))
    for (i, j), node in spec.components.items():
        vals = ex.eval_jet_arrays(node, points, sp)
        gdata[:, i, j] = vals
        if i != j:
            gdata[:, j, i] = vals

    g0 = gdata[..., 0]
    try:
        np.linalg.cholesky(g0)
    except np.linalg.LinAlgError:
        ok = np.array([_is_spd(m) for m in g0])
        bad = points[~ok][0]
        raise NotPositiveDefiniteError(
            f"metric constant part is not positive definite at {bad.tolist()}"
        ) from None

    ginv_data = _invert_jets(sp, gdata)
    g = JetTensor(gdata, ("l", "l"), sp, sym=(("sym", 0, 1),))
    ginv = JetTensor(ginv_data, ("u", "u"), sp, sym=(("sym", 0, 1),))
    return g, ginv


def _is_spd(m):
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def _invert_jets(sp: JetSpace, gdata: np.ndarray) -> np.ndarray:
    """Jet matrix inverse: LAPACK on the constant terms, then Newton
    refinement X <- X (2I - A X), which is exact after ceil(log2(order+1))
    steps because the correction is nilpotent."""
    nb, d = gdata.shape[0], gdata.shape[1]
    g0 = gdata[..., 0]
    if np.any(np.abs(np.linalg.det(g0)) < 1e-300):
        raise MetricError("singular metric: constant part is not invertible")
    x = np.zeros_like(gdata)
    x[..., 0] = np.linalg.inv(g0)
    correct = 0  # nilpotent degree through which x is exact
    while correct < sp.order:
        target = min(2 * correct + 1, sp.order)
        spt = jet_space(sp.dim, target)
        nc = spt.ncoeff
        gd = np.ascontiguousarray(gdata[..., :nc])
        xd = np.ascontiguousarray(x[..., :nc])
        ax = jet.jet_einsum(spt, "zij,zjk->zik", gd, xd)
        ax *= -1.0
        ax[:, np.arange(d), np.arange(d), 0] += 2.0
        x[..., :nc] = jet.jet_einsum(spt, "zij,zjk->zik", xd, ax)
        correct = target
    return x


# ---------------------------------------------------------------------------
# connection and covariant derivative
# ---------------------------------------------------------------------------

def christoffel(g: JetTensor, ginv: JetTensor) -> JetTensor:
    """Levi-Civita connection coefficients (upper, lower, lower); order - 1."""
    if g.order < 1:
        raise InsufficientOrderError("christoffel needs metric jets of order >= 1")
    sp = g.space
    lower = jet_space(g.dim, g.order - 1)
    dg = np.stack(
        [jet.partial_arrays(sp, g.data, a) for a in range(g.dim)], axis=1
    )  # (B, a, i, j, n')
    # d_i g_{jl} + d_j g_{il} - d_l g_{ij}, laid out as [z, i, j, l]
    s = dg + dg.transpose(0, 2, 1, 3, 4) - dg.transpose(0, 2, 3, 1, 4)
    ginv_t = jet.truncate_arrays(sp, ginv.data, g.order - 1)
    gamma = 0.5 * jet.jet_einsum(lower, "zkl,zijl->zkij", ginv_t, s)
    return JetTensor(gamma, ("u", "l", "l"), lower, sym=(("sym", 1, 2),))


def covariant_derivative(t: JetTensor, gamma: JetTensor | None = None) -> JetTensor:
    """One covariant derivative; the new lower slot is appended LAST (comma
    convention).  Scalars need no connection."""
    if t.order < 1:
        raise InsufficientOrderError(
            "covariant derivative: jet order exhausted "
            "(start from a higher-order metric for this divergence depth)"
        )
    sp = t.space
    lower = jet_space(t.dim, t.order - 1)
    grad = np.stack(
        [jet.partial_arrays(sp, t.data, a) for a in range(t.dim)], axis=-2
    )  # (B, comps..., y, n')
    if t.rank == 0:
        return JetTensor(grad, ("l",), lower)
    if gamma is None:
        raise ValueError("covariant derivative of a tensor needs the connection")
    if gamma.order < t.order - 1:
        raise InsufficientOrderError(
            f"connection order {gamma.order} < required {t.order - 1}"
        )
    gam = jet.truncate_arrays(gamma.space, gamma.data, t.order - 1)
    tdata = jet.truncate_arrays(sp, t.data, t.order - 1)
    letters = _LETTERS[: t.rank]
    out_sub = f"z{letters}y"
    for s, var in enumerate(t.variance):
        t_sub = "z" + letters[:s] + "m" + letters[s + 1 :]
        if var == "u":
            g_sub = f"z{letters[s]}ym"
            grad = grad + jet.jet_einsum(lower, f"{g_sub},{t_sub}->{out_sub}", gam, tdata)
        else:
            g_sub = f"zmy{letters[s]}"
            grad = grad - jet.jet_einsum(lower, f"{g_sub},{t_sub}->{out_sub}", gam, tdata)
    return JetTensor(grad, t.variance + ("l",), lower, sym=t.sym)


# ---------------------------------------------------------------------------
# index algebra
# ---------------------------------------------------------------------------

def _drop_sym(sym, removed):
    """Keep symmetry pairs not touching removed slots; remap the others."""
    removed = sorted(removed)
    out = []
    for kind, a, b in sym:
        if a in removed or b in removed:
            continue
        a -= sum(1 for r in removed if r < a)
        b -= sum(1 for r in removed if r < b)
        out.append((kind, a, b))
    return tuple(out)


def contract(t: JetTensor, slot_a: int, slot_b: int, metric: JetTensor | None = None) -> JetTensor:
    """Trace over a slot pair; a metric (or inverse) is required when the
    variances match."""
    if slot_a == slot_b:
        raise ValueError("contraction slots must be distinct")
    a, b = sorted((slot_a, slot_b))
    if not 0 <= a < b < t.rank:
        raise ValueError(f"slots ({slot_a},{slot_b}) out of range for rank {t.rank}")
    letters = _LETTERS[: t.rank]
    va, vb = t.variance[a], t.variance[b]
    new_var = tuple(v for s, v in enumerate(t.variance) if s not in (a, b))
    sym = _drop_sym(t.sym, (a, b))
    if va != vb:
        t_sub = "z" + letters[:b] + letters[a] + letters[b + 1 :]
        out_sub = "z" + "".join(l for s, l in enumerate(letters) if s not in (a, b))
        data = np.einsum(f"{t_sub}n->{out_sub}n", t.data)
        return JetTensor(data, new_var, t.space, sym)
    if metric is None:
        raise ValueError("matching variances need a metric to contract")
    want = ("u", "u") if va == "l" else ("l", "l")
    if metric.variance != want:
        raise ValueError(
            f"contracting two {va!r} slots needs a {''.join(want)} metric tensor"
        )
    order = min(t.order, metric.order)
    md = jet.truncate_arrays(metric.space, metric.data, order)
    td = jet.truncate_arrays(t.space, t.data, order)
    sp = jet_space(t.dim, order)
    m_sub = "z" + letters[a] + letters[b]
    t_sub = "z" + letters
    out_sub = "z" + "".join(l for s, l in enumerate(letters) if s not in (a, b))
    data = jet.jet_einsum(sp, f"{m_sub},{t_sub}->{out_sub}", md, td)
    return JetTensor(data, new_var, sp, sym)


def _musical(t: JetTensor, slot: int, metric: JetTensor, to: str) -> JetTensor:
    if not 0 <= slot < t.rank:
        raise ValueError(f"slot {slot} out of range for rank {t.rank}")
    order = min(t.order, metric.order)
    sp = jet_space(t.dim, order)
    md = jet.truncate_arrays(metric.space, metric.data, order)
    td = jet.truncate_arrays(t.space, t.data, order)
    letters = _LETTERS[: t.rank]
    m_sub = "z" + "m" + letters[slot]
    t_sub = "z" + letters[:slot] + "m" + letters[slot + 1 :]
    out_sub = "z" + letters
    data = jet.jet_einsum(sp, f"{m_sub},{t_sub}->{out_sub}", md, td)
    var = list(t.variance)
    var[slot] = to
    return JetTensor(data, tuple(var), sp, t.sym)


def raise_slot(t: JetTensor, slot: int, ginv: JetTensor) -> JetTensor:
    if t.variance[slot] != "l":
        raise ValueError(f"slot {slot} is already upper")
    if ginv.variance != ("u", "u"):
        raise ValueError("raising needs the inverse metric")
    return _musical(t, slot, ginv, "u")


def lower_slot(t: JetTensor, slot: int, g: JetTensor) -> JetTensor:
    if t.variance[slot] != "u":
        raise ValueError(f"slot {slot} is already lower")
    if g.variance != ("l", "l"):
        raise ValueError("lowering needs the metric")
    return _musical(t, slot, g, "l")
