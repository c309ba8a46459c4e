"""Seeded random generators for metrics and scalar expressions.

The identity suite's oracle is universality: curvature identities hold for
EVERY metric, so random smooth perturbations of the flat metric are the test
distribution.  Perturbations are kept small and low-frequency so the metric
stays positive definite on the sample box and high-order derivatives stay
well scaled.

Everything is driven through the expression DSL, so fuzzing also exercises
the parser and jet evaluator end to end.
"""

from __future__ import annotations

import numpy as np

from riccisol import expr as ex
from riccisol.tensor import MetricSpec

SAMPLE_HALF_WIDTH = 0.4


def _term(rng: np.random.Generator, dim: int, amp: float) -> str:
    """One smooth scalar term with O(amp) magnitude on the sample box."""
    c = float(rng.uniform(0.4, 1.0) * rng.choice((-1.0, 1.0)) * amp)
    kind = rng.integers(0, 4)
    a = int(rng.integers(1, dim + 1))
    b = int(rng.integers(1, dim + 1))
    freq = float(rng.uniform(0.6, 1.4))
    if kind == 0:
        return f"{c!r}*x{a}*x{b}"
    if kind == 1:
        return f"{c!r}*sin({freq!r}*x{a})"
    if kind == 2:
        return f"{c!r}*x{a}*cos({freq!r}*x{b})"
    return f"{c!r}*x{a}^2*x{b}"


def random_metric_spec(dim: int, seed: int, amplitude: float | None = None) -> MetricSpec:
    """A random polynomial+trig perturbation of the flat metric.

    Diagonal dominance of the perturbation keeps the metric SPD on the
    sample box [-0.4, 0.4]^dim.
    """
    rng = np.random.default_rng(seed)
    amp = amplitude if amplitude is not None else 0.36 / dim
    comps = {}
    for i in range(1, dim + 1):
        comps[(i, i)] = "1+" + "+".join(_term(rng, dim, amp) for _ in range(2))
    for i in range(1, dim + 1):
        for j in range(i + 1, dim + 1):
            if rng.uniform() < 0.65:
                comps[(i, j)] = _term(rng, dim, 0.5 * amp)
    dom = [[-SAMPLE_HALF_WIDTH, SAMPLE_HALF_WIDTH]] * dim
    return MetricSpec.from_strings(dim, comps, "0", 0.0, domain=dom)


# ---------------------------------------------------------------------------
# scalar expression fuzzing (for the jet kernel oracle)
# ---------------------------------------------------------------------------

def random_expression(rng: np.random.Generator, dim: int, depth: int = 3) -> str:
    """A random closed-form expression, safe to evaluate near the origin.

    Denominators and log/sqrt arguments are bounded away from zero by
    construction, so jets and finite differences both stay in domain on
    [-0.8, 0.8]^dim.
    """

    def leaf() -> str:
        r = rng.integers(0, 3)
        if r == 0:
            return f"x{int(rng.integers(1, dim + 1))}"
        if r == 1:
            return repr(round(float(rng.uniform(-2, 2)), 3))
        return f"{round(float(rng.uniform(0.3, 1.2)), 3)!r}*x{int(rng.integers(1, dim + 1))}"

    def build(d: int) -> str:
        if d <= 0:
            return leaf()
        r = rng.integers(0, 8)
        if r == 0:
            return f"({build(d - 1)}+{build(d - 1)})"
        if r == 1:
            return f"({build(d - 1)}-{build(d - 1)})"
        if r == 2:
            return f"({build(d - 1)}*{build(d - 1)})"
        if r == 3:
            # denominator bounded below by 1
            return f"({build(d - 1)}/(2+({build(d - 1)})^2))"
        if r == 4:
            fn = rng.choice(["sin", "cos", "tanh", "atan"])
            return f"{fn}({build(d - 1)})"
        if r == 5:
            return f"exp({round(float(rng.uniform(0.2, 0.6)), 3)!r}*{build(d - 1)})"
        if r == 6:
            return f"log(1.5+({build(d - 1)})^2)"
        return f"sqrt(2+({build(d - 1)})^2)"

    return build(depth)


def expression_corpus(count: int, seed: int, dim: int = 2) -> list[str]:
    rng = np.random.default_rng(seed)
    return [random_expression(rng, dim) for _ in range(count)]


def corpus_points(count: int, seed: int, dim: int, half_width: float = 0.8) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-half_width, half_width, size=(count, dim))
