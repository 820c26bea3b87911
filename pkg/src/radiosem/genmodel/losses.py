"""Adversarial and reconstruction losses with their output gradients."""
from __future__ import annotations

import numpy as np

CLAMP = 1e-12


def _safe_log(p):
    return np.log(np.maximum(p, CLAMP))


def _dlog(p):
    """d/dp of the clamped log: zero where the clamp is active."""
    p = np.asarray(p, dtype=np.float64)
    return np.where(p > CLAMP, 1.0 / np.maximum(p, CLAMP), 0.0)


def mse_loss(y_hat: np.ndarray, y: np.ndarray) -> float:
    diff = np.asarray(y_hat) - np.asarray(y)
    return float(np.mean(diff * diff))


def mse_grad(y_hat: np.ndarray, y: np.ndarray) -> np.ndarray:
    return 2.0 * (y_hat - y) / y_hat.size


def adversarial_term(d_fake) -> float:
    """Batch mean of ``log(1 - D(G(F)))``."""
    return float(np.mean(_safe_log(1.0 - np.asarray(d_fake, dtype=np.float64))))


def adversarial_grad(d_fake: np.ndarray) -> np.ndarray:
    """Gradient of ``adversarial_term`` with respect to each ``d_fake``."""
    return -_dlog(1.0 - d_fake) / d_fake.size


def generator_loss(d_fake, y_hat, y_true, alpha: float) -> float:
    """``alpha * log(1 - d_fake) + MSE``; arrays are batch-averaged."""
    y_hat = getattr(y_hat, "values", y_hat)
    y_true = getattr(y_true, "values", y_true)
    return alpha * adversarial_term(d_fake) + mse_loss(y_hat, y_true)


def discriminator_loss(d_real, d_fake) -> float:
    """``-[log d_real + log(1 - d_fake)]``, batch-averaged."""
    d_real = np.asarray(d_real, dtype=np.float64)
    d_fake = np.asarray(d_fake, dtype=np.float64)
    return float(-(np.mean(_safe_log(d_real)) + np.mean(_safe_log(1.0 - d_fake))))


def discriminator_grads(d_real: np.ndarray, d_fake: np.ndarray):
    """Gradients of ``discriminator_loss`` with respect to ``d_real`` and ``d_fake``."""
    g_real = -_dlog(d_real) / d_real.size
    g_fake = _dlog(1.0 - d_fake) / d_fake.size
    return g_real, g_fake
