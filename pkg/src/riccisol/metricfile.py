"""The on-disk metric definition format.

A metric file is a small text document:

    # optional comments
    dim = 3
    metric
    g[1][1] = 1
    g[2][2] = 1/(1+x2^2+x3^2)
    g[3][3] = 1/(1+x2^2+x3^2)
    potential = -log(1+x2^2+x3^2)
    lambda = 0.0
    domain = box(-3,-8,-8; 3,8,8)

Only entries with i <= j are listed; absent components are zero.  `domain`
is optional and defaults to the unit box.  The writer emits expressions in
the canonical fully parenthesized form, giving byte-stable exports.
"""

from __future__ import annotations

import re

import numpy as np

from riccisol import expr as ex
from riccisol.tensor import MetricSpec


class MetricFileError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        where = f" (line {lineno})" if lineno is not None else ""
        super().__init__(f"metric file error{where}: {message}")


_G_LINE = re.compile(r"g\[(\d+)\]\[(\d+)\]\s*=\s*(.+)")


def parse_metric_text(text: str) -> MetricSpec:
    dim = None
    comps: dict = {}
    potential = None
    lam = None
    domain = None
    in_metric = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("dim"):
            _, _, val = line.partition("=")
            try:
                dim = int(val.strip())
            except ValueError:
                raise MetricFileError(f"bad dimension {val.strip()!r}", lineno) from None
            in_metric = False
            continue
        if line == "metric":
            in_metric = True
            continue
        if line.startswith("g["):
            if not in_metric:
                raise MetricFileError("g[i][j] entry outside a `metric` block", lineno)
            m = _G_LINE.fullmatch(line)
            if not m:
                raise MetricFileError(f"malformed metric entry {line!r}", lineno)
            i, j = int(m.group(1)), int(m.group(2))
            if dim is None:
                raise MetricFileError("`dim` must come before the metric block", lineno)
            if not (1 <= i <= j <= dim):
                raise MetricFileError(
                    f"metric entry g[{i}][{j}] needs 1 <= i <= j <= dim={dim}", lineno
                )
            try:
                comps[(i, j)] = ex.parse(m.group(3))
            except ex.ExprSyntaxError as err:
                raise MetricFileError(f"in g[{i}][{j}]: {err}", lineno) from err
            continue
        in_metric = False
        if line.startswith("potential"):
            _, _, val = line.partition("=")
            try:
                potential = ex.parse(val.strip())
            except ex.ExprSyntaxError as err:
                raise MetricFileError(f"in potential: {err}", lineno) from err
            continue
        if line.startswith("lambda"):
            _, _, val = line.partition("=")
            try:
                lam = float(val.strip())
            except ValueError:
                raise MetricFileError(f"bad lambda {val.strip()!r}", lineno) from None
            continue
        if line.startswith("domain"):
            _, _, val = line.partition("=")
            domain = _parse_box(val.strip(), lineno)
            continue
        raise MetricFileError(f"unrecognized line {line!r}", lineno)

    if dim is None:
        raise MetricFileError("missing `dim = n`")
    if not comps:
        raise MetricFileError("missing `metric` block")
    if potential is None:
        raise MetricFileError("missing `potential = <expr>`")
    if lam is None:
        raise MetricFileError("missing `lambda = <real>`")
    if domain is not None and len(domain) != dim:
        raise MetricFileError(f"domain has {len(domain)} coordinates, dim is {dim}")
    return MetricSpec.from_strings(dim, comps, potential, lam, domain=domain)


def _parse_box(text: str, lineno: int):
    m = re.fullmatch(r"box\(([^;]+);([^)]+)\)", text.replace(" ", ""))
    if not m:
        raise MetricFileError(
            f"bad domain {text!r}; expected box(lo1,..,lon; hi1,..,hin)", lineno
        )
    try:
        lo = [float(v) for v in m.group(1).split(",")]
        hi = [float(v) for v in m.group(2).split(",")]
    except ValueError:
        raise MetricFileError(f"non-numeric bound in {text!r}", lineno) from None
    if len(lo) != len(hi):
        raise MetricFileError("domain lo/hi lengths differ", lineno)
    return np.array([lo, hi]).T


def parse_metric_file(path) -> MetricSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_metric_text(fh.read())


def format_metric_spec(spec: MetricSpec) -> str:
    """Canonical byte-stable text form (no timestamps, sorted entries)."""
    lines = [f"dim = {spec.dim}", "metric"]
    for (i, j) in sorted(spec.components):
        lines.append(f"g[{i + 1}][{j + 1}] = {ex.print_expr(spec.components[(i, j)])}")
    lines.append(f"potential = {ex.print_expr(spec.potential)}")
    lines.append(f"lambda = {spec.lam!r}")
    lo = ",".join(repr(float(v)) for v in spec.domain[:, 0])
    hi = ",".join(repr(float(v)) for v in spec.domain[:, 1])
    lines.append(f"domain = box({lo}; {hi})")
    return "\n".join(lines) + "\n"


def write_metric_file(spec: MetricSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_metric_spec(spec))
