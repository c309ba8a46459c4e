"""Built-in witness manifolds with known constants.

Each closed-form entry carries a `MetricSpec`, its soliton type, the flags
the engine is expected to confirm (flatness, vanishing of W / C / D) and the
known constants (scalar curvature at the origin, the Hamilton constant, the
triple Cotton divergence at the origin).  The rotationally symmetric steady
profile is numeric and lives in `riccisol.bryant`; it is validated through
residual properties only.

Families take a dimension suffix in their CLI name, e.g. `round_sphere4` or
`euclidean_gaussian3`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from riccisol.tensor import MetricSpec


@dataclass
class ZooEntry:
    name: str
    spec: MetricSpec
    soliton_type: str  # 'shrinking' | 'steady' | 'expanding' | 'einstein'
    flags: dict = field(default_factory=dict)  # expected truths; None = not applicable
    constants: dict = field(default_factory=dict)
    origin: np.ndarray | None = None

    def __post_init__(self):
        if self.origin is None:
            self.origin = np.zeros(self.spec.dim)


def _radius_sq(dim, first=1):
    return "+".join(f"x{i}^2" for i in range(first, dim + 1))


def euclidean_gaussian(n: int, lam: float = 0.5) -> ZooEntry:
    """Flat R^n with f = lam |x|^2 / 2."""
    comps = {(i, i): "1" for i in range(1, n + 1)}
    pot = f"({_radius_sq(n)})*{lam!r}/2"
    spec = MetricSpec.from_strings(n, comps, pot, lam, domain=[[-3, 3]] * n)
    kind = "shrinking" if lam > 0 else ("steady" if lam == 0 else "expanding")
    return ZooEntry(
        name=f"euclidean_gaussian{n}",
        spec=spec,
        soliton_type=kind,
        flags={"is_flat": True, "w_zero": True, "c_zero": True, "d_zero": True},
        constants={"r_at_origin": 0.0, "hamilton_c": 0.0, "div3c_at_origin": 0.0},
    )


def round_sphere(n: int) -> ZooEntry:
    """Unit S^n in a stereographic chart; Einstein with f = 0, lambda = n-1."""
    conf = f"4/(1+{_radius_sq(n)})^2"
    comps = {(i, i): conf for i in range(1, n + 1)}
    spec = MetricSpec.from_strings(n, comps, "0", float(n - 1), domain=[[-10, 10]] * n)
    return ZooEntry(
        name=f"round_sphere{n}",
        spec=spec,
        soliton_type="einstein",
        flags={"is_flat": False, "w_zero": True, "c_zero": True, "d_zero": True},
        constants={
            "r_at_origin": float(n * (n - 1)),
            "hamilton_c": float(n * (n - 1)),
            "div3c_at_origin": 0.0,
        },
    )


def cylinder_shrinker(n: int, lam: float = 0.5) -> ZooEntry:
    """S^{n-1}(r) x R with r^2 = (n-2)/lam and f = lam s^2 / 2.

    The sphere factor uses a stereographic chart in x2..xn; x1 runs along the
    line.  The sphere radius makes Ric = lam g on the sphere factor, which is
    exactly what the potential's Hessian contributes along the line.
    """
    if n < 3:
        raise ValueError("the cylinder witness needs dimension >= 3")
    r_sq = (n - 2) / lam
    conf = f"{r_sq!r}*4/(1+{_radius_sq(n, first=2)})^2"
    comps = {(1, 1): "1"}
    comps.update({(i, i): conf for i in range(2, n + 1)})
    pot = f"{lam!r}*x1^2/2"
    dom = [[-3, 3]] + [[-10, 10]] * (n - 1)
    spec = MetricSpec.from_strings(n, comps, pot, lam, domain=dom)
    return ZooEntry(
        name=f"cylinder_shrinker{n}",
        spec=spec,
        soliton_type="shrinking",
        flags={"is_flat": False, "w_zero": True, "c_zero": True, "d_zero": True},
        constants={
            "r_at_origin": (n - 1) * lam,
            "hamilton_c": (n - 1) * lam,
            "div3c_at_origin": 0.0,
        },
    )


def cigar() -> ZooEntry:
    """Hamilton's steady soliton surface: g = (dx^2+dy^2)/(1+x^2+y^2)."""
    conf = "1/(1+x1^2+x2^2)"
    spec = MetricSpec.from_strings(
        2,
        {(1, 1): conf, (2, 2): conf},
        "-log(1+x1^2+x2^2)",
        0.0,
        domain=[[-8, 8]] * 2,
    )
    return ZooEntry(
        name="cigar",
        spec=spec,
        soliton_type="steady",
        # W, C, D are dimension >= 3 notions
        flags={"is_flat": False, "w_zero": None, "c_zero": None, "d_zero": None},
        constants={"r_at_origin": 4.0, "hamilton_c": 4.0},
    )


def _cigar_cross(periodic: bool, circumference: float | None = None) -> ZooEntry:
    conf = "1/(1+x2^2+x3^2)"
    comps = {(1, 1): "1", (2, 2): conf, (3, 3): conf}
    pot = "-log(1+x2^2+x3^2)"
    if periodic:
        length = circumference if circumference is not None else 2 * math.pi
        dom = [[0.0, length]] + [[-8, 8]] * 2
        spec = MetricSpec.from_strings(
            3, comps, pot, 0.0, domain=dom, periodic_axis=0, period=length
        )
        name = "cigar_cross_circle"
    else:
        dom = [[-3, 3]] + [[-8, 8]] * 2
        spec = MetricSpec.from_strings(3, comps, pot, 0.0, domain=dom)
        name = "cigar_cross_line"
    return ZooEntry(
        name=name,
        spec=spec,
        soliton_type="steady",
        flags={"is_flat": False, "w_zero": True, "c_zero": False, "d_zero": False},
        constants={"r_at_origin": 4.0, "hamilton_c": 4.0, "div3c_at_origin": 8.0},
    )


def cigar_cross_line() -> ZooEntry:
    return _cigar_cross(periodic=False)


def cigar_cross_circle(circumference: float | None = None) -> ZooEntry:
    """The periodic quotient used by the compact-support quadrature."""
    return _cigar_cross(periodic=True, circumference=circumference)


def non_soliton_control() -> ZooEntry:
    """Negative control: a genuinely curved metric with the WRONG potential.

    The soliton equation and the first integrability condition must both fail
    loudly on it, demonstrating that the checks have power.  An Einstein
    metric would not do here: on any Einstein manifold C, W, B and D all
    vanish identically FOR EVERY potential (the three D terms cancel), so the
    integrability conditions degenerate to 0 = 0.  The cigar cross line has
    C != 0, which makes C = D genuinely sensitive to the potential.
    """
    conf = "1/(1+x2^2+x3^2)"
    spec = MetricSpec.from_strings(
        3,
        {(1, 1): "1", (2, 2): conf, (3, 3): conf},
        "x2^2+x3^2",
        0.0,
        domain=[[-3, 3]] + [[-2, 2]] * 2,
    )
    return ZooEntry(
        name="non_soliton_control",
        spec=spec,
        soliton_type="steady",
        flags={},
        constants={},
    )


def einstein_wrong_potential_control() -> ZooEntry:
    """Round S^4 with f = |x|^2: NOT a soliton (the equation residual is
    O(1)), yet every integrability condition still holds trivially because
    the metric is Einstein.  Kept as a documented degenerate control."""
    spec = MetricSpec.from_strings(
        4,
        {(i, i): f"4/(1+{_radius_sq(4)})^2" for i in range(1, 5)},
        _radius_sq(4),
        3.0,
        domain=[[-10, 10]] * 4,
    )
    return ZooEntry(
        name="einstein_wrong_potential_control",
        spec=spec,
        soliton_type="einstein",
        flags={},
        constants={},
    )


_FAMILIES = {
    "euclidean_gaussian": (euclidean_gaussian, True),
    "round_sphere": (round_sphere, True),
    "cylinder_shrinker": (cylinder_shrinker, True),
    "cigar": (cigar, False),
    "cigar_cross_line": (cigar_cross_line, False),
    "cigar_cross_circle": (cigar_cross_circle, False),
}

# dimensions at which each parametric family is built by default
_DEFAULT_DIMS = {
    "euclidean_gaussian": (3, 4),
    "round_sphere": (4,),
    "cylinder_shrinker": (3, 4),
}


def builtin(name: str, **params) -> ZooEntry:
    """Look up a zoo entry by CLI name, e.g. 'round_sphere4' or 'cigar'."""
    if name == "bryant":
        raise KeyError(
            "the rotationally symmetric steady profile is numeric; "
            "use the `bryant` command / riccisol.bryant.bryant_solve"
        )
    m = re.fullmatch(r"([a-z_]+?)(\d)?", name)
    if m and m.group(1) in _FAMILIES:
        fam, takes_dim = _FAMILIES[m.group(1)]
        if m.group(2) is not None:
            if not takes_dim:
                raise KeyError(f"{m.group(1)} does not take a dimension suffix")
            return fam(int(m.group(2)), **params)
        if takes_dim:
            raise KeyError(f"{name} needs a dimension suffix, e.g. {name}4")
        return fam(**params)
    raise KeyError(f"unknown zoo entry {name!r} (try: {', '.join(all_names())})")


def all_entries() -> list:
    """Every closed-form witness at its default dimensions."""
    out = []
    for fam, dims in _DEFAULT_DIMS.items():
        for n in dims:
            out.append(builtin(f"{fam}{n}"))
    out.append(cigar())
    out.append(cigar_cross_line())
    out.append(cigar_cross_circle())
    return out


def soliton_entries() -> list:
    """The closed-form soliton witnesses of dimension >= 3 (the integrability
    suite's targets; the numeric Bryant profile is validated separately)."""
    return [e for e in all_entries() if e.spec.dim >= 3]


def all_names() -> list:
    names = []
    for fam, dims in _DEFAULT_DIMS.items():
        names.extend(f"{fam}{n}" for n in dims)
    names.extend(["cigar", "cigar_cross_line", "cigar_cross_circle", "bryant"])
    return names


# ---------------------------------------------------------------------------
# entry verification
# ---------------------------------------------------------------------------

FLAG_ZERO_TOL = 1e-9
FLAG_NONZERO_FLOOR = 1e-3
CONSTANT_TOL = 1e-9
DIV3C_TOL = 1e-6


def verify_entry(entry: ZooEntry, points=None, order: int = 6, seed: int = 0) -> "CheckReport":
    """Check every declared flag and constant of a zoo entry.

    Flags declared True must vanish to FLAG_ZERO_TOL (hybrid norm); flags
    declared False must exceed FLAG_NONZERO_FLOOR somewhere, so the check
    demonstrably has power.  Constants are evaluated at the chart origin.
    The div3(C) constant needs jet order >= 6 and is skipped (with a SKIP
    record) below that.
    """
    import numpy as np

    from riccisol import report as rp
    from riccisol.soliton import SolitonBundle

    spec = entry.spec
    if points is None:
        points = spec.sample_points(12, seed)
    # flag checks include the origin so "declared nonzero" peaks are probed
    # where the curvature has not decayed
    points = np.vstack([entry.origin[None, :], np.atleast_2d(points)])
    sb = SolitonBundle(spec, points, order)
    curv = sb.curv
    rep = rp.CheckReport()

    def flag_records(flag_name, declared, values, scale):
        check = f"zoo_{entry.name}_{flag_name}"
        nb = points.shape[0]
        mags = np.abs(np.asarray(values)).reshape(nb, -1).max(axis=1)
        scales = 1.0 + np.abs(np.asarray(scale)).reshape(nb, -1).max(axis=1)
        if declared:
            rep.records.extend(
                rp.zero_records(check, points, values, FLAG_ZERO_TOL,
                                scale_values=scale, note="declared zero")
            )
        else:
            peak = float(np.max(mags / scales))
            ok = peak > FLAG_NONZERO_FLOOR
            rep.add(rp.CheckRecord(check, tuple(points[0]), peak, 0.0, peak,
                                   FLAG_NONZERO_FLOOR,
                                   rp.PASS if ok else rp.FAIL,
                                   "declared NONzero: peak must exceed tol"))

    riem = curv.riemann
    if entry.flags.get("is_flat") is not None:
        flag_records("is_flat", entry.flags["is_flat"], riem.values(), riem.values())
    if entry.flags.get("w_zero") is not None and spec.dim >= 3:
        if spec.dim == 3:
            w_vals = (riem.data - curv._weyl_correction())[..., 0]
        else:
            w_vals = curv.weyl.values()
        flag_records("w_zero", entry.flags["w_zero"], w_vals, riem.values())
    if entry.flags.get("c_zero") is not None and spec.dim >= 3:
        flag_records("c_zero", entry.flags["c_zero"], curv.cotton.values(),
                     curv.cotton.values())
    if entry.flags.get("d_zero") is not None and spec.dim >= 3:
        flag_records("d_zero", entry.flags["d_zero"], sb.d_tensor.values(),
                     sb.d_tensor.values())

    origin = entry.origin[None, :]
    sb0 = SolitonBundle(spec, origin, order)
    consts = entry.constants
    if "r_at_origin" in consts:
        rep.records.extend(
            rp.hybrid_records(f"zoo_{entry.name}_r_at_origin", origin,
                              sb0.curv.scalar.values(),
                              np.array([consts["r_at_origin"]]), CONSTANT_TOL)
        )
    if "hamilton_c" in consts:
        rep.records.extend(
            rp.hybrid_records(f"zoo_{entry.name}_hamilton_c", origin,
                              np.array([sb0.fitted_hamilton_constant()]),
                              np.array([consts["hamilton_c"]]), CONSTANT_TOL)
        )
    if "div3c_at_origin" in consts:
        check = f"zoo_{entry.name}_div3c_at_origin"
        if order < 6:
            rep.add(rp.skip_record(check, "needs jet order >= 6"))
        else:
            got = float(sb0.curv.div3_cotton.values()[0])
            want = consts["div3c_at_origin"]
            diff = abs(got - want)
            rep.add(rp.CheckRecord(check, tuple(entry.origin), got, want, diff,
                                   DIV3C_TOL,
                                   rp.PASS if diff <= DIV3C_TOL else rp.FAIL,
                                   "absolute difference at the origin"))
    return rep
