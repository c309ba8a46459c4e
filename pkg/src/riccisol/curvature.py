"""The curvature pipeline: Riemann through Bach and the high divergences.

Conventions (fixed operationally by the positive-sphere-curvature test in the
suite, not by transcribing an operator definition):

    R^l_{ijk} = d_j Gamma^l_{ik} - d_i Gamma^l_{jk}
                + Gamma^l_{jm} Gamma^m_{ik} - Gamma^l_{im} Gamma^m_{jk}
    R_{ijkl}  = g_{lm} R^m_{ijk}          (skew in (i,j) and in (k,l))
    R_{ik}    = g^{jl} R_{ijkl}           (unit n-sphere: R = n(n-1) > 0)

Comma indices are covariant derivatives appended on the right, so the triple
divergence of the Cotton tensor contracts the innermost derivative with the
last slot, div3(C) = C_{ijk,kji}, and div4(W) contracts the Weyl slots in
the order 1, 4, 3, 2 (innermost first).

A `CurvatureBundle` memoizes the pipeline for one batch of points at one jet
order; entries record their remaining order so depth overruns raise instead
of silently truncating.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from riccisol import jet
from riccisol import report as rp
from riccisol import tensor as tz
from riccisol.jet import jet_space
from riccisol.tensor import JetTensor, contract, covariant_derivative, raise_slot

# residual tolerances used by the identity suite
TOLS = {
    "metric_inverse": 1e-11,
    "metric_compatibility": 1e-11,
    "riemann_skew_first_pair": 1e-10,
    "riemann_skew_last_pair": 1e-10,
    "riemann_pair_swap": 1e-10,
    "bianchi_first": 1e-10,
    "bianchi_second_contracted": 1e-9,
    "ricci_symmetric": 1e-11,
    "einstein_2d": 1e-10,
    "weyl_trace_free": 1e-10,
    "weyl_skew_pairs": 1e-10,
    "weyl_formula_vanishes_3d": 1e-10,
    "cotton_skew": 1e-9,
    "cotton_cyclic": 1e-9,
    "cotton_trace_free": 1e-9,
    "cotton_first_slot_divergence": 1e-9,
    "cotton_equals_weyl_divergence": 1e-9,
    "bach_symmetric": 1e-9,
    "bach_trace_free": 1e-9,
    "bach_divergence_formula": 1e-8,
    "div3_cotton_vs_div4_weyl": 1e-7,
    "div3_cotton_vs_div2_bach_3d": 1e-8,
}


class CurvatureBundle:
    """Memoized curvature quantities for one metric at a batch of points."""

    def __init__(self, spec: tz.MetricSpec, points, order: int):
        self.spec = spec
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.n = spec.dim
        self.order = order
        self.g, self.ginv = tz.metric_at(spec, self.points, order)

    # -- connection and curvature -------------------------------------------
    @cached_property
    def gamma(self) -> JetTensor:
        return tz.christoffel(self.g, self.ginv)

    @cached_property
    def riemann_upper(self) -> JetTensor:
        gam = self.gamma
        sp = gam.space
        low = jet_space(self.n, gam.order - 1)
        dgam = np.stack(
            [jet.partial_arrays(sp, gam.data, a) for a in range(self.n)], axis=1
        )  # (z, a, l, i, k, n')
        e = dgam.transpose(0, 2, 3, 1, 4, 5)  # [z, l, i, j, k] = d_j Gamma^l_{ik}
        gam_t = jet.truncate_arrays(sp, gam.data, gam.order - 1)
        e = e + jet.jet_einsum(low, "zljm,zmik->zlijk", gam_t, gam_t)
        r31 = e - e.transpose(0, 1, 3, 2, 4, 5)  # antisymmetrize i <-> j
        return JetTensor(r31, ("u", "l", "l", "l"), low)

    @cached_property
    def riemann(self) -> JetTensor:
        """(4,0) Riemann tensor R_{ijkl}."""
        r31 = self.riemann_upper
        g_t = jet.truncate_arrays(self.g.space, self.g.data, r31.order)
        data = jet.jet_einsum(r31.space, "zlm,zmijk->zijkl", g_t, r31.data)
        return JetTensor(
            data, ("l",) * 4, r31.space, sym=(("skew", 0, 1), ("skew", 2, 3))
        )

    @cached_property
    def ricci(self) -> JetTensor:
        # R_{ik} = g^{jl} R_{ijkl} = R^j_{ijk}: plain trace of the (3,1) tensor
        ric = contract(self.riemann_upper, 0, 2)
        return JetTensor(ric.data, ric.variance, ric.space, sym=(("sym", 0, 1),))

    @cached_property
    def ricci_upper(self) -> JetTensor:
        return raise_slot(raise_slot(self.ricci, 0, self.ginv), 1, self.ginv)

    @cached_property
    def scalar(self) -> JetTensor:
        return contract(self.ricci, 0, 1, self.ginv)

    @cached_property
    def weyl(self) -> JetTensor:
        """Trace-free part of Riemann; identically zero in dimension 3."""
        n = self.n
        if n < 3:
            raise ValueError("the Weyl tensor needs dimension >= 3")
        riem = self.riemann
        if n == 3:
            return tz.zeros(
                riem.npoints, ("l",) * 4, riem.space,
                sym=(("skew", 0, 1), ("skew", 2, 3)),
            )
        data = riem.data - self._weyl_correction()
        return JetTensor(
            data, ("l",) * 4, riem.space, sym=(("skew", 0, 1), ("skew", 2, 3))
        )

    def _weyl_correction(self) -> np.ndarray:
        n = self.n
        sp = self.riemann.space
        g_t = jet.truncate_arrays(self.g.space, self.g.data, sp.order)
        ric = self.ricci.data
        a = jet.jet_einsum(sp, "zik,zjl->zijkl", ric, g_t)  # Ric_{ik} g_{jl}
        ricg = (
            a
            - a.transpose(0, 1, 2, 4, 3, 5)      # Ric_{il} g_{jk}
            + a.transpose(0, 2, 1, 4, 3, 5)      # Ric_{jl} g_{ik}
            - a.transpose(0, 2, 1, 3, 4, 5)      # Ric_{jk} g_{il}
        )
        gg = jet.jet_einsum(sp, "zik,zjl->zijkl", g_t, g_t)
        gg = gg - gg.transpose(0, 1, 2, 4, 3, 5)
        rgg = jet.jet_einsum(sp, "z,zijkl->zijkl", self.scalar.data, gg)
        return ricg / (n - 2) - rgg / ((n - 1) * (n - 2))

    @cached_property
    def cotton(self) -> JetTensor:
        n = self.n
        if n < 3:
            raise ValueError("the Cotton tensor needs dimension >= 3")
        dric = covariant_derivative(self.ricci, self.gamma)  # R_{ij,k}
        sp = dric.space
        g_t = jet.truncate_arrays(self.g.space, self.g.data, sp.order)
        dr = covariant_derivative(self.scalar)  # R_k
        term = jet.jet_einsum(sp, "zk,zij->zijk", dr.data, g_t)
        data = (
            dric.data
            - dric.data.transpose(0, 1, 3, 2, 4)
            - (term - term.transpose(0, 1, 3, 2, 4)) / (2.0 * (n - 1))
        )
        return JetTensor(data, ("l",) * 3, sp, sym=(("skew", 1, 2),))

    @cached_property
    def cotton_from_weyl(self) -> JetTensor:
        """((n-2)/(n-3)) W_{tikj,t}: the Weyl-divergence route to Cotton."""
        if self.n < 4:
            raise ValueError("the Weyl-divergence route needs dimension >= 4")
        dw = covariant_derivative(self.weyl, self.gamma)  # (t,i,k,j, deriv)
        x = contract(dw, 0, 4, self.ginv)  # slots (i,k,j)
        data = x.data.transpose(0, 1, 3, 2, 4) * ((self.n - 2) / (self.n - 3))
        return JetTensor(data, ("l",) * 3, x.space, sym=(("skew", 1, 2),))

    @cached_property
    def bach(self) -> JetTensor:
        """Bach tensor; for n >= 4 via Cotton divergence + Ricci-Weyl, for
        n = 3 directly as B_{ij} = C_{ijk,k}."""
        n = self.n
        dc = covariant_derivative(self.cotton, self.gamma)  # (a,b,k,deriv)
        e = contract(dc, 2, 3, self.ginv)  # C_{abk,k}
        if n == 3:
            return JetTensor(e.data, e.variance, e.space, sym=(("sym", 0, 1),))
        rw = jet.jet_einsum(
            e.space,
            "zkl,zikjl->zij",
            jet.truncate_arrays(self.ricci_upper.space, self.ricci_upper.data, e.order),
            jet.truncate_arrays(self.weyl.space, self.weyl.data, e.order),
        )
        data = (e.data.transpose(0, 2, 1, 3) + rw) / (n - 2)
        return JetTensor(data, ("l", "l"), e.space, sym=(("sym", 0, 1),))

    @cached_property
    def bach_divergence(self) -> JetTensor:
        db = covariant_derivative(self.bach, self.gamma)
        return contract(db, 1, 2, self.ginv)  # B_{ij,j}

    # -- high divergences -----------------------------------------------------
    @cached_property
    def div2_bach(self) -> JetTensor:
        d = covariant_derivative(self.bach_divergence, self.gamma)
        return contract(d, 0, 1, self.ginv)  # B_{ij,ji}

    @cached_property
    def div3_cotton(self) -> JetTensor:
        """div^3(C) = nabla_i nabla_j nabla_k C_{ijk} (innermost on the last slot)."""
        x = contract(covariant_derivative(self.cotton, self.gamma), 2, 3, self.ginv)
        x = contract(covariant_derivative(x, self.gamma), 1, 2, self.ginv)
        return contract(covariant_derivative(x, self.gamma), 0, 1, self.ginv)

    def _div4_weyl(self, slot_order) -> JetTensor:
        t = self.weyl
        for slot in slot_order:
            t = contract(covariant_derivative(t, self.gamma), slot, t.rank, self.ginv)
        return t

    @cached_property
    def div4_weyl(self) -> JetTensor:
        """div^4(W): successive divergences of W_{ikjl} over slots i, l, j, k."""
        if self.n < 4:
            raise ValueError("div4(W) needs dimension >= 4")
        return self._div4_weyl((0, 2, 1, 0))

    @cached_property
    def div4_weyl_alt(self) -> JetTensor:
        """Alternative full contraction taking the slots in order i, k, j, l;
        differs from `div4_weyl` by curvature commutator terms and is reported
        alongside it."""
        if self.n < 4:
            raise ValueError("div4(W) needs dimension >= 4")
        return self._div4_weyl((0, 0, 0, 0))

    def order_ledger(self) -> dict:
        """Remaining jet order of every entry computed so far."""
        out = {"g": self.g.order, "ginv": self.ginv.order}
        for name in ("gamma", "riemann", "ricci", "scalar", "weyl", "cotton",
                     "bach", "bach_divergence", "div2_bach", "div3_cotton",
                     "div4_weyl", "div4_weyl_alt"):
            if name in self.__dict__:  # touched cached_property entries only
                out[name] = getattr(self, name).order
        return out

    def high_divergences(self) -> dict:
        """Pointwise values of the scalar divergences (needs order >= 6)."""
        if self.order < 6:
            raise jet.InsufficientOrderError(
                f"high divergences need metric jets of order >= 6, have {self.order}"
            )
        out = {"div3_cotton": self.div3_cotton.values(), "div2_bach": self.div2_bach.values()}
        if self.n >= 4:
            out["div4_weyl"] = self.div4_weyl.values()
            out["div4_weyl_alt"] = self.div4_weyl_alt.values()
        return out


def _pair_swap(t: JetTensor) -> np.ndarray:
    return t.data.transpose(0, 3, 4, 1, 2, 5)


def _first_bianchi(t: JetTensor) -> np.ndarray:
    cyc1 = t.data.transpose(0, 2, 3, 1, 4, 5)  # R_{jki l}
    cyc2 = t.data.transpose(0, 3, 1, 2, 4, 5)  # R_{kij l}
    return t.data + cyc1 + cyc2


def _all_traces(t: JetTensor, ginv: JetTensor) -> np.ndarray:
    """Stack of every single metric trace of a rank-4 lower tensor."""
    pieces = []
    for a in range(4):
        for b in range(a + 1, 4):
            pieces.append(contract(t, a, b, ginv).values())
    return np.stack(pieces, axis=1)


def required_order(n: int) -> int:
    """Jet order the full identity suite needs at dimension n."""
    if n == 2:
        return 3  # contracted second Bianchi differentiates Ricci
    return 5  # through div(Bach)


def general_identity_suite(bundle: CurvatureBundle, tols: dict | None = None) -> rp.CheckReport:
    """Run every general-metric identity applicable at the bundle's dimension."""
    t = dict(TOLS)
    if tols:
        t.update(tols)
    n = bundle.n
    pts = bundle.points
    rep = rp.CheckReport()

    def zero(check_id, values, scale=None, note=""):
        rep.records.extend(
            rp.zero_records(check_id, pts, values, t[check_id], note=note, scale_values=scale)
        )

    def pair(check_id, lhs, rhs, note=""):
        rep.records.extend(rp.hybrid_records(check_id, pts, lhs, rhs, t[check_id], note=note))

    # metric-level checks
    sp = bundle.g.space
    prod = jet.jet_einsum(sp, "zij,zjk->zik", bundle.g.data, bundle.ginv.data)
    ident = np.zeros_like(prod)
    ident[:, np.arange(n), np.arange(n), 0] = 1.0
    zero("metric_inverse", np.max(np.abs(prod - ident), axis=(1, 2, 3)))
    nabla_g = covariant_derivative(bundle.g, bundle.gamma)
    zero("metric_compatibility", nabla_g.values(), scale=bundle.g.values())

    # Riemann symmetries and Bianchi identities
    riem = bundle.riemann
    zero("riemann_skew_first_pair",
         (riem.data + riem.data.transpose(0, 2, 1, 3, 4, 5))[..., 0],
         scale=riem.values())
    zero("riemann_skew_last_pair",
         (riem.data + riem.data.transpose(0, 1, 2, 4, 3, 5))[..., 0],
         scale=riem.values())
    zero("riemann_pair_swap", (riem.data - _pair_swap(riem))[..., 0], scale=riem.values())
    zero("bianchi_first", _first_bianchi(riem)[..., 0], scale=riem.values())

    div_ric = contract(covariant_derivative(bundle.ricci, bundle.gamma), 1, 2, bundle.ginv)
    half_dr = 0.5 * covariant_derivative(bundle.scalar).data
    pair("bianchi_second_contracted", div_ric.values(), half_dr[..., 0])

    zero("ricci_symmetric",
         (bundle.ricci.data - bundle.ricci.data.transpose(0, 2, 1, 3))[..., 0],
         scale=bundle.ricci.values())

    if n == 2:
        half_rg = 0.5 * jet.jet_einsum(
            bundle.ricci.space, "z,zij->zij", bundle.scalar.data,
            jet.truncate_arrays(bundle.g.space, bundle.g.data, bundle.ricci.order))
        pair("einstein_2d", bundle.ricci.values(), half_rg[..., 0])
        return rep

    # Weyl
    if n == 3:
        w_resid = bundle.riemann.data - bundle._weyl_correction()
        zero("weyl_formula_vanishes_3d", w_resid[..., 0], scale=bundle.riemann.values())
    else:
        w = bundle.weyl
        zero("weyl_trace_free", _all_traces(w, bundle.ginv), scale=w.values())
        zero("weyl_skew_pairs",
             np.stack([
                 (w.data + w.data.transpose(0, 2, 1, 3, 4, 5))[..., 0],
                 (w.data + w.data.transpose(0, 1, 2, 4, 3, 5))[..., 0],
                 (w.data - _pair_swap(w))[..., 0],
                 _first_bianchi(w)[..., 0],
             ], axis=1),
             scale=w.values())

    # Cotton
    c = bundle.cotton
    zero("cotton_skew", (c.data + c.data.transpose(0, 1, 3, 2, 4))[..., 0], scale=c.values())
    cyc = c.data + c.data.transpose(0, 2, 3, 1, 4) + c.data.transpose(0, 3, 1, 2, 4)
    zero("cotton_cyclic", cyc[..., 0], scale=c.values())
    traces = np.stack(
        [contract(c, a, b, bundle.ginv).values() for a, b in ((0, 1), (0, 2), (1, 2))],
        axis=1,
    )
    zero("cotton_trace_free", traces, scale=c.values())
    first_div = contract(covariant_derivative(c, bundle.gamma), 0, 3, bundle.ginv)
    zero("cotton_first_slot_divergence", first_div.values(), scale=c.values())

    if n >= 4:
        pair("cotton_equals_weyl_divergence", c.values(), bundle.cotton_from_weyl.values())

    # Bach
    b = bundle.bach
    zero("bach_symmetric", (b.data - b.data.transpose(0, 2, 1, 3))[..., 0], scale=b.values())
    zero("bach_trace_free", contract(b, 0, 1, bundle.ginv).values(), scale=b.values())
    if n >= 4:
        rc = jet.jet_einsum(
            bundle.cotton.space, "zkt,zkti->zi",
            jet.truncate_arrays(bundle.ricci_upper.space, bundle.ricci_upper.data,
                                bundle.cotton.order),
            bundle.cotton.data)
        rhs = rc[..., 0] * ((n - 4) / (n - 2) ** 2)
        pair("bach_divergence_formula", bundle.bach_divergence.values(), rhs)

    return rep


def divergence_report(bundle: CurvatureBundle, tols: dict | None = None) -> rp.CheckReport:
    """Report the scalar high divergences and their cross-identities."""
    t = dict(TOLS)
    if tols:
        t.update(tols)
    rep = rp.CheckReport()
    vals = bundle.high_divergences()
    pts = bundle.points
    n = bundle.n
    if n >= 4:
        # the Weyl-divergence route to Cotton, contracted three more times,
        # gives div4(W) = -((n-3)/(n-2)) div3(C) in this exact index order
        coeff = (n - 3) / (n - 2)
        rep.records.extend(
            rp.hybrid_records(
                "div3_cotton_vs_div4_weyl",
                pts,
                vals["div4_weyl"],
                -coeff * vals["div3_cotton"],
                t["div3_cotton_vs_div4_weyl"],
                note=f"div4W vs -(n-3)/(n-2) div3C, coeff={coeff:g}",
            )
        )
    else:
        rep.records.extend(
            rp.hybrid_records(
                "div3_cotton_vs_div2_bach_3d",
                pts,
                vals["div3_cotton"],
                vals["div2_bach"],
                t["div3_cotton_vs_div2_bach_3d"],
            )
        )
    return rep
