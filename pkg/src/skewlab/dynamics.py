"""Gradient-flow / gradient-descent dynamics of linear classifiers under
exponential-type losses, plus the closed-form 2D oracles and envelope
bounds used to verify them.

The simulated model has no bias and starts at the origin.  Time t is
continuous in flow mode and counts epochs in discrete mode.  beta is the
ratio w_sp * B / min over the sample of |w_inv . x_inv|; the 2D
specialization w_sp / w_inv is reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import maxmargin
from .core import Dataset

_CLAMP = 700.0


class DynamicsError(RuntimeError):
    """Simulation failure (overflow / non-finite state)."""


@dataclass(frozen=True)
class DynSpec:
    """Simulation parameters.

    mode "flow" integrates the mean-loss gradient flow with adaptive
    Runge-Kutta; mode "discrete" runs (mini)batch gradient descent with
    step size lr and optional decoupled l2 decay.  batch_size None means
    full batch; minibatch shuffling is seeded per epoch from `seed`.
    t_checkpoints are times (flow) or epoch numbers (discrete).
    """

    loss: str
    mode: str
    t_checkpoints: tuple[float, ...]
    lr: float = 1e-3
    weight_decay: float = 0.0
    batch_size: int | None = None
    seed: int = 0
    rel_tol: float = 1e-8

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_checkpoints",
                           tuple(float(t) for t in self.t_checkpoints))
        if self.loss not in ("exponential", "logistic"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.mode not in ("flow", "discrete"):
            raise ValueError(f"unknown mode {self.mode!r}")
        cps = self.t_checkpoints
        if not cps or any(t <= 0 for t in cps) or any(
            b <= a for a, b in zip(cps, cps[1:])
        ):
            raise ValueError("checkpoints must be positive and ascending")
        if self.mode == "discrete":
            if self.lr <= 0:
                raise ValueError("lr must be positive in discrete mode")
            if any(t != int(t) for t in cps):
                raise ValueError("discrete checkpoints must be whole epochs")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive")


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    w_inv: tuple[float, ...]
    w_sp: float
    beta: float
    beta_2d: float
    loss: float
    residual_norm: float


@dataclass(frozen=True)
class Trajectory:
    """Checkpointed states of one simulation run."""

    records: tuple[TrajectoryPoint, ...]
    spec: DynSpec
    clamp_events: int = 0
    max_margin_direction: tuple[float, ...] = ()


def _splitmix64(x: int) -> int:
    mask = (1 << 64) - 1
    x = (x + 0x9E3779B97F4A7C15) & mask
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


def _epoch_seed(seed: int, epoch: int) -> int:
    return _splitmix64(_splitmix64(seed & ((1 << 64) - 1)) ^ epoch)


def mean_loss(margins: np.ndarray, loss: str) -> float:
    if loss == "exponential":
        return float(np.mean(np.exp(np.clip(-margins, -_CLAMP, _CLAMP))))
    # stable log(1 + exp(-m))
    return float(np.mean(np.logaddexp(0.0, -margins)))


def loss_gradient(Z: np.ndarray, w: np.ndarray, loss: str) -> tuple[np.ndarray, int]:
    """Gradient of the mean loss at w.

    Z holds the label-signed features y_i x_i row-wise.  Returns the
    gradient and the number of margins clamped against overflow.
    """
    m = Z @ w
    if loss == "exponential":
        clamped = int(np.count_nonzero(-m > _CLAMP)) + int(np.count_nonzero(-m < -_CLAMP))
        coef = np.exp(np.clip(-m, -_CLAMP, _CLAMP))
    else:
        # sigmoid(-m), written via tanh for stability at large |m|
        coef = 0.5 * (1.0 - np.tanh(0.5 * m))
        clamped = 0
    return -(coef @ Z) / Z.shape[0], clamped


def _rk4(f: Callable[[np.ndarray], np.ndarray], w: np.ndarray, h: float) -> np.ndarray:
    k1 = f(w)
    k2 = f(w + 0.5 * h * k1)
    k3 = f(w + 0.5 * h * k2)
    k4 = f(w + h * k3)
    return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(dataset: Dataset, spec: DynSpec) -> Trajectory:
    """Run the dynamics and record the state at every checkpoint."""
    if dataset.sp_dim != 1:
        raise DynamicsError("dynamics needs a scalar spurious feature")
    X = dataset.feature_matrix()
    y = dataset.labels()
    Z = y[:, None] * X
    Xi = dataset.inv_matrix()
    d_inv = dataset.inv_dim
    B = dataset.sp_scale
    n, d = X.shape

    clamp_events = 0

    def grad(w: np.ndarray) -> np.ndarray:
        nonlocal clamp_events
        g, clamped = loss_gradient(Z, w, spec.loss)
        clamp_events += clamped
        if spec.weight_decay:
            g = g + spec.weight_decay * w
        if not np.all(np.isfinite(g)):
            raise DynamicsError("non-finite gradient")
        return -g

    try:
        hat = maxmargin.full_max_margin(dataset, bias_enabled=False)
        w_hat = hat.model.w if hat.converged else None
    except maxmargin.NotSeparableError:
        w_hat = None

    def record(t: float, w: np.ndarray) -> TrajectoryPoint:
        w_inv = w[:d_inv]
        w_sp = float(w[d_inv])
        inv_scores = np.abs(Xi @ w_inv)
        denom = float(np.min(inv_scores))
        if denom > 0:
            beta = w_sp * B / denom
        else:
            beta = 0.0 if w_sp == 0.0 else math.copysign(math.inf, w_sp)
        if d_inv == 1:
            beta_2d = w_sp / w_inv[0] if w_inv[0] != 0 else (
                0.0 if w_sp == 0.0 else math.copysign(math.inf, w_sp)
            )
        else:
            beta_2d = math.nan
        if w_hat is not None and t > 0:
            residual = float(np.linalg.norm(w - w_hat * math.log1p(t)))
        else:
            residual = math.nan
        return TrajectoryPoint(
            t=float(t),
            w_inv=tuple(w_inv.tolist()),
            w_sp=w_sp,
            beta=float(beta),
            beta_2d=float(beta_2d),
            loss=mean_loss(Z @ w, spec.loss),
            residual_norm=residual,
        )

    w = np.zeros(d)
    records: list[TrajectoryPoint] = []

    if spec.mode == "flow":
        t = 0.0
        h = min(1e-3, spec.t_checkpoints[0])
        for tc in spec.t_checkpoints:
            while t < tc * (1.0 - 1e-14):
                h = min(h, tc - t)
                full = _rk4(grad, w, h)
                half = _rk4(grad, w, 0.5 * h)
                half = _rk4(grad, half, 0.5 * h)
                if not (np.all(np.isfinite(full)) and np.all(np.isfinite(half))):
                    raise DynamicsError(f"non-finite state at t={t:.3g}")
                err = float(np.linalg.norm(half - full)) / 15.0
                scale = spec.rel_tol * max(1.0, float(np.linalg.norm(half)))
                factor = 0.9 * (scale / (err + 1e-300)) ** 0.2
                if err <= scale:
                    t += h
                    w = half + (half - full) / 15.0
                    h *= min(factor, 5.0)
                else:
                    h *= max(min(factor, 0.9), 0.1)
            records.append(record(t, w))
    else:
        max_epoch = int(spec.t_checkpoints[-1])
        targets = {int(t) for t in spec.t_checkpoints}
        for epoch in range(1, max_epoch + 1):
            if spec.batch_size is None or spec.batch_size >= n:
                step = grad(w)
                w = w + spec.lr * step
            else:
                rng = np.random.default_rng(_epoch_seed(spec.seed, epoch))
                order = rng.permutation(n)
                bs = spec.batch_size
                for start in range(0, n, bs):
                    idx = order[start:start + bs]
                    step = grad_batch(Z[idx], w, spec)
                    w = w + step
            if not np.all(np.isfinite(w)):
                raise DynamicsError(f"non-finite state at epoch {epoch}")
            if epoch in targets:
                records.append(record(float(epoch), w))

    return Trajectory(
        records=tuple(records),
        spec=spec,
        clamp_events=clamp_events,
        max_margin_direction=tuple(w_hat.tolist()) if w_hat is not None else (),
    )


def grad_batch(Zb: np.ndarray, w: np.ndarray, spec: DynSpec) -> np.ndarray:
    """One descent increment (-lr * gradient, with decoupled decay) on a
    batch of label-signed features."""
    g, _ = loss_gradient(Zb, w, spec.loss)
    if not np.all(np.isfinite(g)):
        raise DynamicsError("non-finite gradient")
    step = -spec.lr * g
    if spec.weight_decay:
        step = step - spec.lr * spec.weight_decay * w
    return step


# ---------------------------------------------------------------------------
# Closed forms and envelope bounds (two-feature task, no bias)
# ---------------------------------------------------------------------------


def closed_form_2dim_exp(p: float, t: float) -> tuple[float, float]:
    """Exact exponential-loss flow on the two-feature task with B = 1:
    w_inv + w_sp = ln(1 + 2pt) and w_inv - w_sp = ln(1 + 2(1-p)t)."""
    if not 0.5 <= p < 1.0:
        raise ValueError("p must lie in [0.5, 1)")
    if t < 0:
        raise ValueError("t must be non-negative")
    a = math.log1p(2.0 * p * t)
    b = math.log1p(2.0 * (1.0 - p) * t)
    return 0.5 * (a + b), 0.5 * (a - b)


def fixed_point_exp(p: float, B: float = 1.0) -> float:
    """Stationary value of the spurious weight: (1/2B) ln(p / (1-p))."""
    if not 0.5 <= p < 1.0:
        raise ValueError("p must lie in [0.5, 1)")
    if B <= 0:
        raise ValueError("B must be positive")
    return math.log(p / (1.0 - p)) / (2.0 * B)


def thm_b2_bounds(p: float, B: float, M: float, t: float,
                  lower_mult: float = 1.0,
                  upper_mult: float = 1.0) -> tuple[float, float]:
    """Envelope bounds on beta(t) for skew-free data.

    With c = 2(2M - 1) / B^2 the lower envelope is
    (1/B) ln((c+p) / (c + sqrt(p(1-p)))) / (2M ln(1+t)) and the upper is
    (1/(2B)) ln(p/(1-p)) / (0.5 ln(1+t)); the asymptotic-order constants
    are exposed as multipliers with these proof-derived defaults.
    """
    if not 0.5 <= p < 1.0:
        raise ValueError("p must lie in [0.5, 1)")
    if M < 1:
        raise ValueError("M must be at least 1")
    if B <= 0 or t <= 0:
        raise ValueError("need B > 0 and t > 0")
    c = 2.0 * (2.0 * M - 1.0) / (B * B)
    denom = math.log1p(t)
    lower = lower_mult * math.log((c + p) / (c + math.sqrt(p * (1.0 - p)))) / (
        B * 2.0 * M * denom
    )
    upper = upper_mult * math.log(p / (1.0 - p)) / (2.0 * B * 0.5 * denom)
    return lower, upper


def thm_b4_bounds(p: float, t: float) -> tuple[float, float]:
    """Envelope bounds on beta(t) under the logistic loss:
    lower min(1, 0.5 ln(2/(3-2p)) / ln(t+1)), upper
    0.5 ln(p/(1-p)) / ln(0.5 t + 1) (sign-corrected transcription)."""
    if not 0.5 <= p < 1.0:
        raise ValueError("p must lie in [0.5, 1)")
    if t <= 0:
        raise ValueError("t must be positive")
    lower = min(1.0, 0.5 * math.log(2.0 / (3.0 - 2.0 * p)) / math.log1p(t))
    upper = 0.5 * math.log(p / (1.0 - p)) / math.log1p(0.5 * t)
    return lower, upper


def logistic_sp_envelope(p: float, t: float) -> float:
    """Pointwise cap 0.5 ln((2pt+1) / (2(1-p)t+1)) on the spurious weight
    (sign-corrected transcription; see the verification suite for its
    empirical status)."""
    if not 0.5 <= p < 1.0:
        raise ValueError("p must lie in [0.5, 1)")
    if t < 0:
        raise ValueError("t must be non-negative")
    return 0.5 * math.log((2.0 * p * t + 1.0) / (2.0 * (1.0 - p) * t + 1.0))


def initial_gradient_direction(dataset: Dataset) -> tuple[float, ...]:
    """Mean label-signed feature vector (the first descent direction from
    the origin, up to the loss's constant factor)."""
    Z = dataset.labels()[:, None] * dataset.feature_matrix()
    return tuple(np.mean(Z, axis=0).tolist())
