"""Central finite-difference verification of ``backward``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .networks import Act, ModelParams, backward, forward


@dataclass(frozen=True)
class GradCheckResult:
    max_rel_error: float
    checked: int
    skipped_kinks: int


def _relu_pattern(params: ModelParams, x: np.ndarray) -> np.ndarray:
    _, cache = forward(params, x)
    return np.concatenate(
        [(z > 0).ravel() for (_, z), spec in zip(cache, params.layout.layers) if spec.act is Act.LRELU]
    )


def gradient_check(
    params: ModelParams, x: np.ndarray, dout: np.ndarray, n_params: int = 200, eps: float = 1e-4, seed=0
) -> GradCheckResult:
    """Compare ``backward`` against central differences of ``sum(forward(x) * dout)``.

    Parameters whose perturbation flips a leaky-ReLU pre-activation sign sit on
    a kink where the difference quotient is not a derivative estimate; they
    are replaced by fresh samples and counted in ``skipped_kinks``. The
    relative error is ``|fd - g| / max(|fd| + |g|, 1e-12)``.
    """
    loss = lambda p: float(np.sum(forward(p, x)[0] * dout))
    _, cache = forward(params, x)
    grad, _ = backward(params, cache, dout)
    rng = np.random.default_rng(seed)
    order = rng.permutation(params.layout.n_params)
    worst, checked, skipped = 0.0, 0, 0
    for i in order:
        if checked == n_params:
            break
        v = params.vector.copy()
        v[i] += eps
        plus = params.with_vector(v)
        v[i] -= 2 * eps
        minus = params.with_vector(v)
        if not np.array_equal(_relu_pattern(plus, x), _relu_pattern(minus, x)):
            skipped += 1
            continue
        fd = (loss(plus) - loss(minus)) / (2 * eps)
        worst = max(worst, abs(fd - grad[i]) / max(abs(fd) + abs(grad[i]), 1e-12))
        checked += 1
    return GradCheckResult(worst, checked, skipped)
