"""Multiplicative-weights (Hedge) core: update step, regret certificate, and
trajectory statistics shared by the boosting and lazy-update learners."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import check_simplex

REWARD_ATOL = 1e-12


class RewardRangeError(ValueError):
    """Reward outside [0,1]; the regret bound assumes bounded rewards."""


def check_rewards(r, k=None) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1 or (k is not None and r.size != k):
        raise ValueError(f"reward vector has shape {r.shape}, expected length {k}")
    if r.min() < -REWARD_ATOL or r.max() > 1.0 + REWARD_ATOL:
        raise RewardRangeError(f"rewards outside [0,1]: min={r.min()}, max={r.max()}")
    return np.clip(r, 0.0, 1.0)


def hedge_step(w, reward, eta: float) -> np.ndarray:
    """Exponential reweighting w_i <- w_i * exp(eta * r_i), renormalized.

    Computed in log space with max subtraction so large eta*T cannot
    underflow.
    """
    w = check_simplex(w)
    r = check_rewards(reward, w.size)
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    with np.errstate(divide="ignore"):
        z = np.log(w) + eta * r
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


@dataclass
class HedgeHistory:
    """Trajectory of T hedge iterates and the reward vectors that drove them."""

    weights: np.ndarray  # (T, k)
    rewards: np.ndarray  # (T, k)
    eta: float

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        if self.weights.shape != self.rewards.shape or self.weights.ndim != 2:
            raise ValueError("weights and rewards must share shape (T, k)")

    @property
    def T(self) -> int:
        return self.weights.shape[0]

    @property
    def k(self) -> int:
        return self.weights.shape[1]

    def verify_replay(self, atol: float = 1e-9) -> bool:
        """Each stored iterate reproduces from its predecessor via hedge_step."""
        for t in range(self.T - 1):
            nxt = hedge_step(self.weights[t], self.rewards[t], self.eta)
            if not np.allclose(nxt, self.weights[t + 1], atol=atol):
                return False
        return True

    def to_json_dict(self) -> dict:
        return {
            "eta": self.eta,
            "weights": self.weights.tolist(),
            "rewards": self.rewards.tolist(),
        }


def regret_bound(k: int, eta: float, T: int) -> float:
    if eta <= 0:
        raise ValueError("regret bound needs eta > 0")
    return np.log(k) / eta + eta * T / 8.0


def regret_certificate(history: HedgeHistory) -> float:
    """Slack of the Hedge regret inequality on a recorded trajectory.

    Returns sum_t <r_t, w_t> - (max_i sum_t r_{t,i} - R) with
    R = ln(k)/eta + eta*T/8; nonnegative (up to float noise) for any
    trajectory generated by hedge_step.
    """
    gained = float((history.weights * history.rewards).sum())
    best = float(history.rewards.sum(axis=0).max())
    return gained - (best - regret_bound(history.k, history.eta, history.T))


def trajectory_sum_max(history: HedgeHistory) -> float:
    """sum_i max_t w^{(t)}_i, the coordinate-wise peak mass; lies in [1, k]."""
    return float(history.weights.max(axis=0).sum())
