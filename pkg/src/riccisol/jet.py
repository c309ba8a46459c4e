"""Truncated multivariate Taylor-series ("jet") arithmetic.

A jet stores the Taylor coefficients of a smooth scalar function at a point,
truncated at a fixed total order.  Coefficients are Taylor-normalized
(divided by the multi-index factorial), so multiplication is a plain
truncated convolution and the raw partial derivative is recovered as
``alpha! * coeff[alpha]``.

Layout: coefficients live in a dense 1-D array indexed by multi-index in
graded-lexicographic order (total degree first, lexicographic within a
degree).  This makes truncation to a lower order a prefix slice, which the
tensor layer relies on for its order bookkeeping.

All kernels in this module operate on numpy arrays whose LAST axis is the
coefficient axis; any leading axes (tensor components, sample points) are
broadcast.  The scalar `Jet` class is a thin wrapper used by the expression
evaluator and the tests.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

MAX_DIM = 5
MAX_ORDER = 7

# Working-set cap (floats) for the pairwise product buffer of one chunk.
_CHUNK_ELEMS = 8_000_000


class JetDomainError(ArithmeticError):
    """Evaluation left the domain of a jet operation (pole, log of a
    nonpositive value, ...)."""


class InsufficientOrderError(ValueError):
    """An operation needed more derivative orders than the jet carries."""


def _multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    """All exponent tuples with total degree <= order, graded-lex sorted."""
    out: list[tuple[int, ...]] = []

    def fill(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for k in range(remaining + 1):
            fill(prefix + (k,), remaining - k, slots - 1)

    for deg in range(order + 1):
        fill((), deg, dim)
    return out


class JetSpace:
    """Coefficient tables for jets of a fixed (dim, order).

    Instances are cached; jets belonging to different spaces must not mix.
    """

    def __init__(self, dim: int, order: int):
        if not 1 <= dim <= MAX_DIM:
            raise ValueError(f"jet dim must be in [1, {MAX_DIM}], got {dim}")
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in [0, {MAX_ORDER}], got {order}")
        self.dim = dim
        self.order = order
        self.exps = _multi_indices(dim, order)
        self.pos = {e: i for i, e in enumerate(self.exps)}
        self.ncoeff = len(self.exps)
        # ncoeff of each truncation order (prefix lengths)
        self.ncoeff_at = [math.comb(dim + o, dim) for o in range(order + 1)]
        self._build_mul_table()
        self._build_diff_tables()

    def _build_mul_table(self):
        degs = [sum(e) for e in self.exps]
        ia, ib, ig = [], [], []
        for a, ea in enumerate(self.exps):
            nb = self.ncoeff_at[self.order - degs[a]]
            for b in range(nb):
                eb = self.exps[b]
                ia.append(a)
                ib.append(b)
                ig.append(self.pos[tuple(x + y for x, y in zip(ea, eb))])
        ig = np.asarray(ig)
        order_by_target = np.argsort(ig, kind="stable")
        self.mul_ia = np.asarray(ia, dtype=np.intp)[order_by_target]
        self.mul_ib = np.asarray(ib, dtype=np.intp)[order_by_target]
        self.mul_ig = np.ascontiguousarray(ig[order_by_target])
        # first occurrence of each target; every target appears (pair with 0)
        self.mul_starts = np.searchsorted(self.mul_ig, np.arange(self.ncoeff))
        self.npairs = len(ia)

    def _build_diff_tables(self):
        # d/dx_k maps into the (order-1) space: coeff'[beta] = (beta_k+1)*coeff[beta+e_k]
        self.diff_src = []
        self.diff_fac = []
        if self.order == 0:
            return
        lower = _multi_indices(self.dim, self.order - 1)
        for k in range(self.dim):
            src = np.empty(len(lower), dtype=np.intp)
            fac = np.empty(len(lower))
            for i, beta in enumerate(lower):
                up = list(beta)
                up[k] += 1
                src[i] = self.pos[tuple(up)]
                fac[i] = beta[k] + 1
            self.diff_src.append(src)
            self.diff_fac.append(fac)

    def __repr__(self):
        return f"JetSpace(dim={self.dim}, order={self.order})"


@lru_cache(maxsize=None)
def jet_space(dim: int, order: int) -> JetSpace:
    return JetSpace(dim, order)


# ---------------------------------------------------------------------------
# batched array kernels (last axis = coefficients)
# ---------------------------------------------------------------------------

def mul_arrays(space: JetSpace, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated product of two coefficient arrays, broadcasting leading axes."""
    if a.shape != b.shape:
        a, b = np.broadcast_arrays(a, b)
    lead = a.shape[:-1]
    m = int(np.prod(lead)) if lead else 1
    a2 = np.ascontiguousarray(a).reshape(m, space.ncoeff)
    b2 = np.ascontiguousarray(b).reshape(m, space.ncoeff)
    out = np.empty((m, space.ncoeff))
    rows = max(1, _CHUNK_ELEMS // max(space.npairs, 1))
    for i in range(0, m, rows):
        s = slice(i, min(i + rows, m))
        prod = a2[s][:, space.mul_ia] * b2[s][:, space.mul_ib]
        out[s] = np.add.reduceat(prod, space.mul_starts, axis=1)
    return out.reshape(lead + (space.ncoeff,))


try:  # fused kernel; numpy einsum fallback keeps results identical
    from riccisol._kernels import pair_matmul as _pair_matmul
except Exception:  # pragma: no cover - exercised only without numba
    _pair_matmul = None


def _parse_sub(sub: str):
    lhs, out_sub = sub.split("->")
    sa, sb = lhs.split(",")
    if not (sa[0] == sb[0] == out_sub[0] == "z"):
        raise ValueError(f"jet_einsum subscripts must be batched over 'z': {sub}")
    ka = set(sa[1:]) & set(sb[1:]) - set(out_sub)
    k_letters = [c for c in sa[1:] if c in ka]
    m_letters = [c for c in sa[1:] if c not in ka]
    n_letters = [c for c in sb[1:] if c not in ka]
    if set(out_sub[1:]) != set(m_letters) | set(n_letters) or (
        set(m_letters) & set(n_letters)
    ):
        raise ValueError(f"unsupported jet_einsum pattern: {sub}")
    return sa, sb, out_sub, m_letters, k_letters, n_letters


def jet_einsum(space: JetSpace, sub: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """einsum over component axes with a jet product in the coefficient axis.

    `sub` is written without the coefficient axis, e.g. ``'zkl,zijl->zkij'``;
    every operand and the output must start with the batch axis ``z``.  The
    contraction is canonicalized to (z, M, K, coeff) x (z, K, N, coeff) and
    dispatched to a fused compiled kernel (pure-numpy fallback otherwise).
    """
    sa, sb, out_sub, m_letters, k_letters, n_letters = _parse_sub(sub)
    nz = a.shape[0]
    if b.shape[0] != nz:
        raise ValueError("batch axes disagree")
    dim, nco = space.dim, space.ncoeff

    def canon(arr, letters, want):
        perm = [0] + [1 + letters.index(c) for c in want] + [arr.ndim - 1]
        return np.ascontiguousarray(np.transpose(arr, perm))

    a3 = canon(a, list(sa[1:]), m_letters + k_letters).reshape(
        nz, dim ** len(m_letters), dim ** len(k_letters), nco
    )
    b3 = canon(b, list(sb[1:]), k_letters + n_letters).reshape(
        nz, dim ** len(k_letters), dim ** len(n_letters), nco
    )
    if _pair_matmul is not None:
        out = np.zeros((nz, a3.shape[1], b3.shape[2], nco))
        _pair_matmul(a3, b3, space.mul_ia, space.mul_ib, space.mul_ig, out)
    else:
        out = _pair_matmul_numpy(space, a3, b3)
    out = out.reshape((nz,) + (dim,) * (len(m_letters) + len(n_letters)) + (nco,))
    produced = m_letters + n_letters
    perm = [0] + [1 + produced.index(c) for c in out_sub[1:]] + [out.ndim - 1]
    return np.ascontiguousarray(np.transpose(out, perm))


def _pair_matmul_numpy(space: JetSpace, a3: np.ndarray, b3: np.ndarray) -> np.ndarray:
    nz, m, k, _ = a3.shape
    n = b3.shape[2]
    out = np.empty((nz, m, n, space.ncoeff))
    per_z = (m * k + k * n + m * n * k) * space.npairs
    zrows = max(1, _CHUNK_ELEMS // max(per_z, 1))
    for i in range(0, nz, zrows):
        s = slice(i, min(i + zrows, nz))
        ap = a3[s][..., space.mul_ia]
        bp = b3[s][..., space.mul_ib]
        prod = np.einsum("zmkZ,zknZ->zmnZ", ap, bp)
        out[s] = np.add.reduceat(prod, space.mul_starts, axis=-1)
    return out


def partial_arrays(space: JetSpace, a: np.ndarray, axis: int) -> np.ndarray:
    """d/dx_axis of the coefficient array; result lives in order-1 space."""
    if space.order == 0:
        raise InsufficientOrderError("cannot differentiate an order-0 jet")
    if not 0 <= axis < space.dim:
        raise ValueError(f"axis {axis} out of range for dim {space.dim}")
    return a[..., space.diff_src[axis]] * space.diff_fac[axis]


def gradient_arrays(space: JetSpace, a: np.ndarray) -> np.ndarray:
    """Stack of all coordinate partials, new axis before the coefficient axis."""
    return np.stack([partial_arrays(space, a, k) for k in range(space.dim)], axis=-2)


def truncate_arrays(space: JetSpace, a: np.ndarray, new_order: int) -> np.ndarray:
    if new_order > space.order:
        raise InsufficientOrderError(
            f"cannot extend a jet from order {space.order} to {new_order}"
        )
    if new_order == space.order:
        return a
    return a[..., : space.ncoeff_at[new_order]]


def compose_arrays(space: JetSpace, series: np.ndarray, nilpotent: np.ndarray) -> np.ndarray:
    """Horner evaluation of a univariate Taylor polynomial on a nilpotent jet.

    `series` has shape lead + (order+1,) holding c_0..c_order about the
    expansion value; `nilpotent` is the jet minus its constant term.
    """
    n_ord = space.order
    lead = np.broadcast_shapes(series.shape[:-1], nilpotent.shape[:-1])
    res = np.zeros(lead + (space.ncoeff,))
    res[..., 0] = series[..., n_ord]
    for k in range(n_ord - 1, -1, -1):
        res = mul_arrays(space, res, nilpotent)
        res[..., 0] += series[..., k]
    return res


# ---------------------------------------------------------------------------
# univariate Taylor series of the supported primitives (vectorized in a0)
# ---------------------------------------------------------------------------

_FACT = [math.factorial(k) for k in range(MAX_ORDER + 1)]


def _series_exp(a0, n):
    e = np.exp(a0)
    return np.stack([e / _FACT[k] for k in range(n + 1)], axis=-1)


def _series_log(a0, n):
    cols = [np.log(a0)]
    for k in range(1, n + 1):
        cols.append((-1.0) ** (k + 1) / (k * a0**k))
    return np.stack(cols, axis=-1)


def _series_inv(a0, n):
    return np.stack([(-1.0) ** k / a0 ** (k + 1) for k in range(n + 1)], axis=-1)


def _series_sqrt(a0, n):
    cols = []
    binom = 1.0
    for k in range(n + 1):
        cols.append(binom * a0 ** (0.5 - k))
        binom *= (0.5 - k) / (k + 1)
    return np.stack(cols, axis=-1)


def _series_sin(a0, n):
    return np.stack([np.sin(a0 + k * np.pi / 2) / _FACT[k] for k in range(n + 1)], axis=-1)


def _series_cos(a0, n):
    return np.stack([np.cos(a0 + k * np.pi / 2) / _FACT[k] for k in range(n + 1)], axis=-1)


def _series_sinh(a0, n):
    s, c = np.sinh(a0), np.cosh(a0)
    return np.stack([(s if k % 2 == 0 else c) / _FACT[k] for k in range(n + 1)], axis=-1)


def _series_cosh(a0, n):
    s, c = np.sinh(a0), np.cosh(a0)
    return np.stack([(c if k % 2 == 0 else s) / _FACT[k] for k in range(n + 1)], axis=-1)


def _series_tanh(a0, n):
    # y' = 1 - y^2 termwise: (k+1) y_{k+1} = [k == 0] - sum_j y_j y_{k-j}
    a0 = np.asarray(a0, dtype=float)
    y = np.zeros(a0.shape + (n + 1,))
    y[..., 0] = np.tanh(a0)
    for k in range(n):
        conv = sum(y[..., j] * y[..., k - j] for j in range(k + 1))
        y[..., k + 1] = ((1.0 if k == 0 else 0.0) - conv) / (k + 1)
    return y


def _series_atan(a0, n):
    # atan' = 1/(1 + x^2); reciprocal of the quadratic (1+a0^2) + 2 a0 t + t^2
    a0 = np.asarray(a0, dtype=float)
    out = np.zeros(a0.shape + (n + 1,))
    out[..., 0] = np.arctan(a0)
    if n == 0:
        return out
    d0, d1 = 1.0 + a0**2, 2.0 * a0
    r = np.zeros(a0.shape + (n,))
    r[..., 0] = 1.0 / d0
    for k in range(1, n):
        acc = d1 * r[..., k - 1]
        if k >= 2:
            acc = acc + r[..., k - 2]
        r[..., k] = -acc / d0
    for k in range(1, n + 1):
        out[..., k] = r[..., k - 1] / k
    return out


_SERIES = {
    "exp": _series_exp,
    "log": _series_log,
    "inv": _series_inv,
    "sqrt": _series_sqrt,
    "sin": _series_sin,
    "cos": _series_cos,
    "sinh": _series_sinh,
    "cosh": _series_cosh,
    "tanh": _series_tanh,
    "atan": _series_atan,
}

_POSITIVE_ONLY = {"log", "sqrt"}


def unary_arrays(space: JetSpace, name: str, a: np.ndarray) -> np.ndarray:
    """Apply a primitive function to a coefficient array by Taylor composition."""
    if name == "neg":
        return -a
    if name not in _SERIES:
        raise ValueError(f"unknown unary function {name!r}")
    a0 = a[..., 0]
    if name in _POSITIVE_ONLY and np.any(a0 <= 0.0):
        raise JetDomainError(f"{name} requires a positive constant term")
    if name == "inv" and np.any(a0 == 0.0):
        raise JetDomainError("division by a jet with zero constant term (pole)")
    series = _SERIES[name](a0, space.order)
    nil = np.array(a, copy=True)
    nil[..., 0] = 0.0
    return compose_arrays(space, series, nil)


def div_arrays(space: JetSpace, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return mul_arrays(space, a, unary_arrays(space, "inv", b))


def powi_arrays(space: JetSpace, a: np.ndarray, k: int) -> np.ndarray:
    """Integer power by repeated squaring."""
    if k < 0:
        return powi_arrays(space, unary_arrays(space, "inv", a), -k)
    result = np.zeros(a.shape[:-1] + (space.ncoeff,))
    result[..., 0] = 1.0
    base = a
    while k:
        if k & 1:
            result = mul_arrays(space, result, base)
        k >>= 1
        if k:
            base = mul_arrays(space, base, base)
    return result


def powf_arrays(space: JetSpace, a: np.ndarray, r: float) -> np.ndarray:
    """Real power via exp(r * log(.)); base must have a positive constant term."""
    return unary_arrays(space, "exp", r * unary_arrays(space, "log", a))


# ---------------------------------------------------------------------------
# scalar Jet wrapper
# ---------------------------------------------------------------------------

class Jet:
    """A single truncated Taylor expansion with immutable value semantics.

    Use `const` / `var` to build leaves, arithmetic operators and the
    module-level function wrappers (`exp`, `log`, ...) to combine them.
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        c = np.asarray(coeffs, dtype=float)
        if c.shape != (space.ncoeff,):
            raise ValueError(f"expected {space.ncoeff} coefficients, got {c.shape}")
        c = c.copy()
        c.flags.writeable = False
        self.coeffs = c

    # -- constructors -------------------------------------------------------
    @staticmethod
    def const(value: float, dim: int, order: int) -> "Jet":
        sp = jet_space(dim, order)
        c = np.zeros(sp.ncoeff)
        c[0] = value
        return Jet(sp, c)

    @staticmethod
    def var(axis: int, value: float, dim: int, order: int) -> "Jet":
        sp = jet_space(dim, order)
        if not 0 <= axis < dim:
            raise ValueError(f"axis {axis} out of range for dim {dim}")
        c = np.zeros(sp.ncoeff)
        c[0] = value
        if order >= 1:
            unit = tuple(1 if k == axis else 0 for k in range(dim))
            c[sp.pos[unit]] = 1.0
        return Jet(sp, c)

    # -- accessors ----------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def coeff(self, alpha) -> float:
        alpha = tuple(int(x) for x in alpha)
        self._check_alpha(alpha)
        return float(self.coeffs[self.space.pos[alpha]])

    def raw_partial(self, alpha) -> float:
        """alpha! * coeff[alpha]: the raw partial derivative at the point."""
        alpha = tuple(int(x) for x in alpha)
        self._check_alpha(alpha)
        fact = 1
        for x in alpha:
            fact *= _FACT[x]
        return fact * float(self.coeffs[self.space.pos[alpha]])

    def _check_alpha(self, alpha):
        if len(alpha) != self.dim or any(x < 0 for x in alpha):
            raise ValueError(f"bad multi-index {alpha} for dim {self.dim}")
        if sum(alpha) > self.order:
            raise InsufficientOrderError(
                f"multi-index degree {sum(alpha)} exceeds jet order {self.order}"
            )

    def truncate(self, new_order: int) -> "Jet":
        sp = jet_space(self.dim, new_order)
        return Jet(sp, truncate_arrays(self.space, self.coeffs, new_order))

    def partial(self, axis: int) -> "Jet":
        sp = jet_space(self.dim, self.order - 1) if self.order > 0 else None
        if sp is None:
            raise InsufficientOrderError("cannot differentiate an order-0 jet")
        return Jet(sp, partial_arrays(self.space, self.coeffs, axis))

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError(
                    f"cannot mix jets from {other.space} and {self.space}"
                )
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet.const(float(other), self.dim, self.order)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, o.coeffs - self.coeffs)

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, mul_arrays(self.space, self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, div_arrays(self.space, self.coeffs, o.coeffs))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, div_arrays(self.space, o.coeffs, self.coeffs))

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)):
            return Jet(self.space, powi_arrays(self.space, self.coeffs, int(k)))
        return Jet(self.space, powf_arrays(self.space, self.coeffs, float(k)))

    def __repr__(self):
        head = ", ".join(
            f"{e}:{c:.6g}" for e, c in zip(self.space.exps[:4], self.coeffs[:4])
        )
        more = "..." if self.space.ncoeff > 4 else ""
        return f"Jet(dim={self.dim}, order={self.order}, [{head}{more}])"


def const(value: float, dim: int, order: int) -> Jet:
    return Jet.const(value, dim, order)


def var(axis: int, value: float, dim: int, order: int) -> Jet:
    return Jet.var(axis, value, dim, order)


def apply_unary(name: str, a: Jet) -> Jet:
    return Jet(a.space, unary_arrays(a.space, name, a.coeffs))


def exp(a: Jet) -> Jet:
    return apply_unary("exp", a)


def log(a: Jet) -> Jet:
    return apply_unary("log", a)


def sqrt(a: Jet) -> Jet:
    return apply_unary("sqrt", a)


def sin(a: Jet) -> Jet:
    return apply_unary("sin", a)


def cos(a: Jet) -> Jet:
    return apply_unary("cos", a)


def sinh(a: Jet) -> Jet:
    return apply_unary("sinh", a)


def cosh(a: Jet) -> Jet:
    return apply_unary("cosh", a)


def tanh(a: Jet) -> Jet:
    return apply_unary("tanh", a)


def atan(a: Jet) -> Jet:
    return apply_unary("atan", a)


def powi(a: Jet, k: int) -> Jet:
    return a ** int(k)


def powf(a: Jet, r: float) -> Jet:
    return Jet(a.space, powf_arrays(a.space, a.coeffs, r))
