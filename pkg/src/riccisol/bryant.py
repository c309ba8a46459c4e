"""Rotationally symmetric steady soliton profile and warped-product formulas.

The 3-metric is dr^2 + phi(r)^2 g_{S^2} with a radial potential f(r).  The
steady soliton equations reduce to the first-order system

    phi' = x
    x'   = (1 - x^2)/phi + x*y          (sphere components)
    y'   = 2*x'/phi                     (radial component, y = f')

integrated from a regularity-enforcing series at r = 0 (phi ~ r + a3 r^3,
f' ~ 12*a3*r) with scipy's adaptive Dormand-Prince 5(4) stepper.  The
normalization R(0) = 1 fixes a3 = -1/36 (the profile is otherwise unique up
to scaling).

Two evaluation paths exist on purpose.  Closed-form metrics go through the
generic jet pipeline; the numeric profile instead uses the closed-form
warped-product formulas below.  The two paths are cross-checked on the
shrinking cylinder, which is available in both forms (constant phi = sqrt(2),
f = r^2/4).

Validation is property-based: the reconstructed metric must satisfy the
soliton equations (second derivatives re-estimated independently from the
dense output, not taken from the ODE right-hand side), the Hamilton first
integral R + f'^2 = R(0) must not drift, and the Cotton tensor must vanish
(every rotationally symmetric 3-metric is locally conformally flat, so |C|
measures the consistency of the whole construction).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

# series coefficients at the tip for the R(0) = 1 normalization:
# phi = r + A3 r^3 + A5 r^5, f' = B1 r + B3 r^3
A3 = -1.0 / 36.0
A5 = 87.0 * A3 * A3 / 50.0
B1 = 12.0 * A3
B3 = (40.0 * A5 - 12.0 * A3 * A3) / 3.0


class BryantSolveError(RuntimeError):
    pass


def _rhs(_r, state):
    phi, x, _f, y = state
    ddphi = (1.0 - x * x) / phi + x * y
    return [x, ddphi, y, 2.0 * ddphi / phi]


@dataclass
class BryantProfile:
    """Sampled rotationally symmetric steady profile."""

    r: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    r_start: float
    interp_order: int
    _sol: object  # dense-output solution
    hamilton_c: float = 1.0  # R(0) after normalization

    def state_at(self, r):
        return self._sol(np.asarray(r, dtype=float))

    def ddphi(self, r=None):
        """phi'' from the sphere equation at profile states."""
        if r is None:
            phi, x, y = self.phi, self.dphi, self.fp
        else:
            phi, x, _f, y = self.state_at(r)
        return (1.0 - x * x) / phi + x * y

    def dddphi(self, r=None):
        """phi''' by differentiating the sphere equation along the flow."""
        if r is None:
            phi, x, y = self.phi, self.dphi, self.fp
        else:
            phi, x, _f, y = self.state_at(r)
        ddphi = (1.0 - x * x) / phi + x * y
        return ddphi * y - x * (1.0 - x * x) / (phi * phi)

    def fpp(self, r=None):
        """f'' from the radial equation at profile states."""
        if r is None:
            phi = self.phi
        else:
            phi = self.state_at(r)[0]
        return 2.0 * self.ddphi(r) / phi

    def fd_second_derivatives(self, r, h=5e-4):
        """(phi'', f'') re-estimated by central differences of the dense
        output; independent of the ODE right-hand side."""
        r = np.asarray(r, dtype=float)
        up = self.state_at(r + h)
        dn = self.state_at(r - h)
        return (up[1] - dn[1]) / (2 * h), (up[3] - dn[3]) / (2 * h)


def bryant_solve(r_max: float = 10.0, step: float = 0.01,
                 shoot_tol: float = 1e-12) -> BryantProfile:
    """Integrate the profile out to r_max, sampling every `step`."""
    if r_max <= 0 or step <= 0:
        raise ValueError("r_max and step must be positive")
    r0 = 1e-3
    phi0 = r0 + A3 * r0**3 + A5 * r0**5
    x0 = 1.0 + 3 * A3 * r0**2 + 5 * A5 * r0**4
    y0 = B1 * r0 + B3 * r0**3
    f0 = B1 * r0**2 / 2 + B3 * r0**4 / 4  # f(0) gauged to 0
    sol = solve_ivp(
        _rhs,
        (r0, r_max),
        [phi0, x0, f0, y0],
        method="RK45",
        rtol=shoot_tol,
        atol=shoot_tol * 1e-2,
        dense_output=True,
        max_step=0.25,
    )
    if not sol.success:
        raise BryantSolveError(f"profile integration failed: {sol.message}")
    grid = np.concatenate([[r0], np.arange(step, r_max + step / 2, step)])
    grid = grid[grid <= r_max + 1e-12]
    phi, x, f, y = sol.sol(grid)
    return BryantProfile(
        r=grid, phi=phi, dphi=x, f=f, fp=y, r_start=r0, interp_order=4, _sol=sol.sol
    )


# ---------------------------------------------------------------------------
# closed-form warped-product geometry (dim 3, unit-sphere fiber)
# ---------------------------------------------------------------------------

def warped_ricci(phi, dphi, ddphi):
    """(Ric_rr, rho) with Ric restricted to the fiber equal to rho * h_ab."""
    ric_rr = -2.0 * ddphi / phi
    rho = 1.0 - dphi**2 - phi * ddphi
    return ric_rr, rho


def warped_scalar(phi, dphi, ddphi):
    return -4.0 * ddphi / phi + 2.0 * (1.0 - dphi**2) / phi**2


def warped_soliton_residuals(phi, dphi, ddphi, fp, fpp, lam=0.0):
    """Orthonormal-frame components of Ric + Hess f - lambda g."""
    ric_rr, rho = warped_ricci(phi, dphi, ddphi)
    res_rr = ric_rr + fpp - lam
    res_sphere = (rho + phi * dphi * fp) / phi**2 - lam
    return res_rr, res_sphere


def warped_cotton_coefficient(phi, dphi, ddphi, dddphi):
    """c(r) with C_{arb} = c(r) h_ab the only independent Cotton component.

    Vanishes identically for every warped product (local conformal
    flatness in dimension three), so its numerical size measures the
    consistency of the supplied derivatives.
    """
    ric_rr, rho = warped_ricci(phi, dphi, ddphi)
    drho = -3.0 * dphi * ddphi - phi * dddphi
    dscalar = -4.0 * dddphi / phi - 4.0 * (1.0 - dphi**2) * dphi / phi**3
    return (
        dphi * (phi * ric_rr - rho / phi)
        - drho
        + 2.0 * (dphi / phi) * rho
        + 0.25 * dscalar * phi**2
    )


def warped_cotton_norm(phi, dphi, ddphi, dddphi):
    """|C|_g of the warped-product metric."""
    c = warped_cotton_coefficient(phi, dphi, ddphi, dddphi)
    return 2.0 * np.abs(c) / phi**2


def warped_hamilton_drift(phi, dphi, ddphi, fp, c0=1.0):
    """R + |f'|^2 - c0: the steady first integral, zero on exact profiles."""
    return warped_scalar(phi, dphi, ddphi) + fp**2 - c0


def profile_checks(profile: BryantProfile, residual_r_min: float = 0.02):
    """Property checks for an integrated profile.

    Returns a dict of named max-abs values over the grid.  Soliton residuals
    use finite-difference second derivatives (independent of the ODE right
    side); the Cotton norm and Hamilton drift use the flow relations.
    """
    mask = profile.r >= residual_r_min
    r = profile.r[mask]
    phi, x, _f, y = profile.state_at(r)
    dd_fd, fpp_fd = profile.fd_second_derivatives(r)
    res_rr, res_sph = warped_soliton_residuals(phi, x, dd_fd, y, fpp_fd, lam=0.0)
    cot = warped_cotton_norm(
        profile.phi[mask], profile.dphi[mask],
        profile.ddphi()[mask], profile.dddphi()[mask]
    )
    drift = warped_hamilton_drift(
        profile.phi, profile.dphi, profile.ddphi(), profile.fp, profile.hamilton_c
    )
    tip_r = profile.r_start
    tip_ratio = profile.state_at(tip_r)[0] / tip_r
    return {
        "soliton_residual": float(np.max(np.abs(np.stack([res_rr, res_sph])))),
        "cotton_norm": float(np.max(cot)),
        "hamilton_drift": float(np.max(np.abs(drift))),
        "tip_ratio_minus_one": float(abs(tip_ratio - 1.0)),
    }
