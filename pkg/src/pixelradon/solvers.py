"""Landweber iteration with pluggable forward/backward operators."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analysis import estimate_operator_norm, norm
from .arrays import Image, Sinogram

__all__ = ["LandweberTrace", "LandweberDiverged", "landweber", "default_step"]

logger = logging.getLogger(__name__)


@dataclass
class LandweberTrace:
    omega: float
    iterations: int = 0
    residual_norms: list[float] = field(default_factory=list)
    iterates_kept: dict[int, np.ndarray] = field(default_factory=dict)


class LandweberDiverged(RuntimeError):
    """The residual became non-finite; ``trace`` holds the history up to that point."""

    def __init__(self, message, trace: LandweberTrace):
        super().__init__(message)
        self.trace = trace


def default_step(forward, backward, domain: Image, iterations: int = 50, seed: int = 0) -> float:
    """``0.9 / sigma^2`` with ``sigma`` from power iteration."""
    sigma = estimate_operator_norm(forward, backward, domain, iterations=iterations, seed=seed)
    return 0.9 / sigma**2


def landweber(
    forward: Callable[[Image], Sinogram],
    backward: Callable[[Sinogram], Image],
    data: Sinogram,
    omega: float,
    iterations: int,
    initial: Image | None = None,
    keep_every: int | None = None,
) -> tuple[Image, LandweberTrace]:
    """Run ``f <- f - omega * backward(forward(f) - data)``.

    ``residual_norms[k]`` is the weighted sinogram norm of
    ``forward(f_k) - data``, so the trace has ``iterations + 1`` entries.
    With ``keep_every=m`` every m-th iterate is copied into the trace.
    """
    if not omega > 0:
        raise ValueError(f"step size must be positive, got {omega}")
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    trace = LandweberTrace(omega=float(omega))
    if initial is None:
        # the grid is only known through the backward operator
        zero = backward(data)
        f = zero.with_values(np.zeros_like(zero.values))
    else:
        f = initial
    for k in range(iterations + 1):
        proj = forward(f)
        resid = proj.with_values(proj.values - data.values)
        with np.errstate(over="ignore", invalid="ignore"):
            rn = norm(resid)
        if not math.isfinite(rn):
            raise LandweberDiverged(f"residual is not finite at iteration {k}", trace)
        trace.residual_norms.append(rn)
        if keep_every and k % keep_every == 0:
            trace.iterates_kept[k] = f.values.copy()
        if k == iterations:
            break
        new = f.values - omega * backward(resid).values
        if not np.all(np.isfinite(new)):
            raise LandweberDiverged(f"iterate is not finite at iteration {k + 1}", trace)
        f = f.with_values(new)
        trace.iterations = k + 1
    logger.debug("landweber: %d iterations, residual %.3e -> %.3e",
                 trace.iterations, trace.residual_norms[0], trace.residual_norms[-1])
    return f, trace
