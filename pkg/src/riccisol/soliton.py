"""Gradient-Ricci-soliton identities.

Everything specific to a (metric, potential, lambda) triple: the soliton
equation residual, the trace / gradient / Hamilton identities, the
three-tensor D built from the potential gradient and the Ricci tensor, the
four integrability conditions, and the dimension-three pointwise identity
relating |C|^2 to a double divergence of the Cotton tensor.

Non-soliton inputs are allowed (the checks then fail loudly), so deliberate
negative controls run through the same code path; a warning note is attached
to the downstream records in that case.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from riccisol import jet
from riccisol import report as rp
from riccisol import tensor as tz
from riccisol.curvature import CurvatureBundle
from riccisol.tensor import JetTensor, contract, covariant_derivative, raise_slot

TOLS = {
    "soliton_equation": 1e-9,
    "trace_identity": 1e-9,
    "schur_identity": 1e-9,
    "hamilton_identity_gradient": 1e-9,
    "d_tensor_skew": 1e-10,
    "d_tensor_trace_free": 1e-10,
    "integrability_1": 1e-7,
    "integrability_2": 1e-7,
    "integrability_3": 1e-7,
    "integrability_4": 1e-7,
    "pointwise_3d": 1e-7,
    "cotton_equals_d_3d": 1e-9,
}

SOLITON_WARN_LEVEL = 1e-8


class SolitonBundle:
    """Curvature bundle extended with the potential and its derivatives."""

    def __init__(self, spec: tz.MetricSpec, points, order: int):
        self.curv = CurvatureBundle(spec, points, order)
        self.spec = spec
        self.lam = spec.lam
        self.points = self.curv.points
        self.n = self.curv.n

    # -- potential derivatives ------------------------------------------------
    @cached_property
    def f(self) -> JetTensor:
        import riccisol.expr as ex

        data = ex.eval_jet_arrays(self.spec.potential, self.points, self.curv.g.space)
        return tz.scalar_tensor(data, self.curv.g.space)

    @cached_property
    def df(self) -> JetTensor:
        return covariant_derivative(self.f)

    @cached_property
    def df_upper(self) -> JetTensor:
        return raise_slot(self.df, 0, self.curv.ginv)

    @cached_property
    def hessian(self) -> JetTensor:
        h = covariant_derivative(self.df, self.curv.gamma)
        return JetTensor(h.data, h.variance, h.space, sym=(("sym", 0, 1),))

    @cached_property
    def grad_norm_sq(self) -> JetTensor:
        sp = self.df.space
        data = jet.jet_einsum(
            sp, "zi,zi->z",
            jet.truncate_arrays(self.df_upper.space, self.df_upper.data, sp.order),
            self.df.data)
        return tz.scalar_tensor(data, sp)

    # -- soliton equation ------------------------------------------------------
    @cached_property
    def soliton_lhs(self) -> np.ndarray:
        """Pointwise components of Ric + Hess f."""
        ric = self.curv.ricci
        hess = self.hessian.truncate(ric.order)
        return ric.values() + hess.values()

    @cached_property
    def soliton_rhs(self) -> np.ndarray:
        return self.lam * self.curv.g.values()

    def soliton_residual(self) -> float:
        """Hybrid-normalized max residual of Ric + Hess f = lambda g."""
        num = np.max(np.abs(self.soliton_lhs - self.soliton_rhs))
        den = 1.0 + max(np.max(np.abs(self.soliton_lhs)), np.max(np.abs(self.soliton_rhs)))
        return float(num / den)

    @cached_property
    def warning_note(self) -> str:
        r = self.soliton_residual()
        if r >= SOLITON_WARN_LEVEL:
            return f"warning: input is not a soliton (equation residual {r:.3e})"
        return ""

    def soliton_report(self, tols: dict | None = None) -> rp.CheckReport:
        t = dict(TOLS)
        if tols:
            t.update(tols)
        rep = rp.CheckReport()
        rep.records.extend(
            rp.hybrid_records(
                "soliton_equation", self.points, self.soliton_lhs, self.soliton_rhs,
                t["soliton_equation"],
            )
        )
        return rep

    # -- Lemma identities ------------------------------------------------------
    @cached_property
    def hamilton_scalar(self) -> JetTensor:
        """R + |grad f|^2 - 2 lambda f: constant on a gradient soliton."""
        order = min(self.curv.scalar.order, self.grad_norm_sq.order)
        data = (
            jet.truncate_arrays(self.curv.scalar.space, self.curv.scalar.data, order)
            + jet.truncate_arrays(self.grad_norm_sq.space, self.grad_norm_sq.data, order)
            - 2.0 * self.lam * jet.truncate_arrays(self.f.space, self.f.data, order)
        )
        return tz.scalar_tensor(data, jet.jet_space(self.n, order))

    def fitted_hamilton_constant(self) -> float:
        return float(self.hamilton_scalar.values()[0])

    def lemma_report(self, tols: dict | None = None) -> rp.CheckReport:
        t = dict(TOLS)
        if tols:
            t.update(tols)
        rep = rp.CheckReport()
        note = self.warning_note
        lap = contract(self.hessian, 0, 1, self.curv.ginv)
        lhs = lap.values() + self.curv.scalar.values()
        rhs = np.full_like(lhs, self.n * self.lam)
        rep.records.extend(
            rp.hybrid_records("trace_identity", self.points, lhs, rhs,
                              t["trace_identity"], note=note)
        )

        dr = covariant_derivative(self.curv.scalar)  # R_i
        ric_df = jet.jet_einsum(
            dr.space, "zt,zti->zi",
            jet.truncate_arrays(self.df_upper.space, self.df_upper.data, dr.order),
            jet.truncate_arrays(self.curv.ricci.space, self.curv.ricci.data, dr.order))
        rep.records.extend(
            rp.hybrid_records("schur_identity", self.points, dr.values(),
                              2.0 * ric_df[..., 0], t["schur_identity"], note=note)
        )

        c_fit = self.fitted_hamilton_constant()
        grad_h = covariant_derivative(self.hamilton_scalar)
        rep.records.extend(
            rp.zero_records(
                "hamilton_identity_gradient", self.points, grad_h.values(),
                t["hamilton_identity_gradient"],
                note=(note + " " if note else "") + f"fitted c={c_fit!r}",
                scale_values=self.hamilton_scalar.values(),
            )
        )
        return rep

    # -- the D tensor ----------------------------------------------------------
    @cached_property
    def d_tensor(self) -> JetTensor:
        """Cao-Chen three-tensor, skew in its last two slots and trace-free."""
        n = self.n
        if n < 3:
            raise ValueError("the D tensor needs dimension >= 3")
        ric = self.curv.ricci
        sp = ric.space
        fl = jet.truncate_arrays(self.df.space, self.df.data, sp.order)
        fu = jet.truncate_arrays(self.df_upper.space, self.df_upper.data, sp.order)
        g_t = jet.truncate_arrays(self.curv.g.space, self.curv.g.data, sp.order)
        v = jet.jet_einsum(sp, "zt,ztk->zk", fu, ric.data)  # f^t R_{tk}
        a1 = jet.jet_einsum(sp, "zk,zij->zijk", fl, ric.data)  # f_k R_{ij}
        a2 = jet.jet_einsum(sp, "zk,zij->zijk", v, g_t)  # f^t R_{tk} g_{ij}
        a3 = jet.jet_einsum(sp, "zk,zij->zijk", fl, g_t)  # f_k g_{ij}
        a3 = jet.jet_einsum(sp, "z,zijk->zijk", self.curv.scalar.data, a3)

        def skew(x):
            return x - x.transpose(0, 1, 3, 2, 4)

        data = (
            skew(a1) / (n - 2)
            + skew(a2) / ((n - 1) * (n - 2))
            - skew(a3) / ((n - 1) * (n - 2))
        )
        return JetTensor(data, ("l",) * 3, sp, sym=(("skew", 1, 2),))

    def d_tensor_report(self, tols: dict | None = None) -> rp.CheckReport:
        t = dict(TOLS)
        if tols:
            t.update(tols)
        rep = rp.CheckReport()
        d = self.d_tensor
        swap = d.data.transpose(0, 1, 3, 2, 4)
        rep.records.extend(
            rp.zero_records("d_tensor_skew", self.points, (d.data + swap)[..., 0],
                            t["d_tensor_skew"], scale_values=d.values())
        )
        traces = np.stack(
            [contract(d, a, b, self.curv.ginv).values() for a, b in ((0, 1), (0, 2), (1, 2))],
            axis=1,
        )
        rep.records.extend(
            rp.zero_records("d_tensor_trace_free", self.points, traces,
                            t["d_tensor_trace_free"], scale_values=d.values())
        )
        return rep

    # -- integrability conditions ----------------------------------------------
    @cached_property
    def _div_d(self) -> JetTensor:
        """D_{ijk,k}"""
        return contract(covariant_derivative(self.d_tensor, self.curv.gamma), 2, 3,
                        self.curv.ginv)

    @cached_property
    def _div2_d(self) -> JetTensor:
        """D_{itk,tk}"""
        dd = covariant_derivative(self.d_tensor, self.curv.gamma)  # (i,t,k,d1)
        x = contract(dd, 1, 3, self.curv.ginv)  # (i,k)
        return contract(covariant_derivative(x, self.curv.gamma), 1, 2, self.curv.ginv)

    @cached_property
    def _div3_d(self) -> JetTensor:
        """D_{itk,tki}"""
        x = self._div2_d  # (i,)
        return contract(covariant_derivative(x, self.curv.gamma), 0, 1, self.curv.ginv)

    @cached_property
    def cotton_norm_sq(self) -> JetTensor:
        c = self.curv.cotton
        cu = c
        for s in range(3):
            cu = raise_slot(cu, s, self.curv.ginv)
        data = jet.jet_einsum(c.space, "zijk,zijk->z", cu.data, c.data)
        return tz.scalar_tensor(data, c.space)

    def integrability_report(self, tols: dict | None = None) -> rp.CheckReport:
        """The four integrability conditions tying C, B, W and D together."""
        t = dict(TOLS)
        if tols:
            t.update(tols)
        if self.n < 3:
            raise ValueError("integrability conditions need dimension >= 3")
        rep = rp.CheckReport()
        note = self.warning_note
        n = self.n
        curv = self.curv
        c = curv.cotton

        # (1)  C_{ijk} + f^t W_{tijk} = D_{ijk}
        fu = self.df_upper
        fw = jet.jet_einsum(
            c.space, "zt,ztijk->zijk",
            jet.truncate_arrays(fu.space, fu.data, c.order),
            jet.truncate_arrays(curv.weyl.space, curv.weyl.data, c.order))
        lhs1 = c.values() + fw[..., 0]
        rep.records.extend(
            rp.hybrid_records("integrability_1", self.points, lhs1,
                              self.d_tensor.values(), t["integrability_1"], note=note)
        )

        # (2)  (n-2) B_{ij} - ((n-3)/(n-2)) f^t C_{jit} = D_{ijk,k}
        b = curv.bach
        fc = jet.jet_einsum(
            b.space, "zt,zjit->zij",
            jet.truncate_arrays(fu.space, fu.data, b.order),
            jet.truncate_arrays(c.space, c.data, b.order))
        lhs2 = (n - 2) * b.values() - ((n - 3) / (n - 2)) * fc[..., 0]
        rep.records.extend(
            rp.hybrid_records("integrability_2", self.points, lhs2,
                              self._div_d.values(), t["integrability_2"], note=note)
        )

        # (3)  R^{kt} C_{kti} = (n-2) D_{itk,tk}
        ru = curv.ricci_upper
        rc = jet.jet_einsum(
            c.space, "zkt,zkti->zi",
            jet.truncate_arrays(ru.space, ru.data, c.order), c.data)
        rep.records.extend(
            rp.hybrid_records("integrability_3", self.points, rc[..., 0],
                              (n - 2) * self._div2_d.values(), t["integrability_3"],
                              note=note)
        )

        # (4)  (1/2)|C|^2 + R^{kt} C_{kti,i} = (n-2) D_{itk,tki}
        dc = covariant_derivative(c, curv.gamma)  # (k,t,i,deriv)
        cdiv = contract(dc, 2, 3, curv.ginv)  # C_{kti,i} -> (k,t)
        rcd = jet.jet_einsum(
            cdiv.space, "zkt,zkt->z",
            jet.truncate_arrays(ru.space, ru.data, cdiv.order), cdiv.data)
        lhs4 = 0.5 * self.cotton_norm_sq.values() + rcd[..., 0]
        rep.records.extend(
            rp.hybrid_records("integrability_4", self.points, lhs4,
                              (n - 2) * self._div3_d.values(), t["integrability_4"],
                              note=note)
        )
        return rep

    # -- dimension three -------------------------------------------------------
    def pointwise_3d_report(self, tols: dict | None = None) -> rp.CheckReport:
        """(1/2)|C|^2 = -C_{kti,it} f_k, plus the C = D cross-check (n = 3)."""
        t = dict(TOLS)
        if tols:
            t.update(tols)
        if self.n != 3:
            raise ValueError("the pointwise identity is specific to dimension 3")
        rep = rp.CheckReport()
        note = self.warning_note
        curv = self.curv
        c = curv.cotton
        dc = covariant_derivative(c, curv.gamma)  # (k,t,i,d1)
        x = contract(dc, 2, 3, curv.ginv)  # (k,t)
        x = contract(covariant_derivative(x, curv.gamma), 1, 2, curv.ginv)  # C_{kti,it}
        fu = self.df_upper
        rhs = -jet.jet_einsum(
            x.space, "zk,zk->z",
            jet.truncate_arrays(fu.space, fu.data, x.order), x.data)[..., 0]
        rep.records.extend(
            rp.hybrid_records("pointwise_3d", self.points,
                              0.5 * self.cotton_norm_sq.values(), rhs,
                              t["pointwise_3d"], note=note)
        )
        rep.records.extend(
            rp.hybrid_records("cotton_equals_d_3d", self.points, c.values(),
                              self.d_tensor.values(), t["cotton_equals_d_3d"],
                              note=note)
        )
        return rep

    def full_report(self, tols: dict | None = None) -> rp.CheckReport:
        """Soliton equation, Lemma identities, D invariants, integrability,
        and (in dimension three) the pointwise identity."""
        rep = self.soliton_report(tols)
        rep.extend(self.lemma_report(tols))
        if self.n >= 3:
            rep.extend(self.d_tensor_report(tols))
            rep.extend(self.integrability_report(tols))
        else:
            rep.add(rp.skip_record(
                "integrability_1", "D tensor and integrability need dimension >= 3"))
        if self.n == 3:
            rep.extend(self.pointwise_3d_report(tols))
        return rep
