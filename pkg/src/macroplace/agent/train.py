"""REINFORCE with a learned value baseline, batched over masked episodes.

The loss over a batch of trajectories is

    sum_t [ -A_t * log pi(a_t | s_t) ] + c_v * sum_t (R - V(s_t))^2
    - beta * sum_t entropy(pi(. | s_t))

with the advantage A_t = R - V_collect(s_t) frozen at collection time, so
the loss is a pure function of the parameters given the stored batch (that
is what the finite-difference checks differentiate). Updates use Adam.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..env import MacroPlacementEnv, Trajectory, rollout
from ..errors import TrainingError
from .network import (
    DesignContext,
    PolicyParams,
    backward_step,
    forward_step,
    init_params,
    masked_distribution,
    policy_from_params,
)


@dataclass(frozen=True)
class TrainConfig:
    updates: int = 60
    episodes_per_update: int = 8
    learning_rate: float = 0.02
    entropy_beta: float = 0.01
    value_coef: float = 0.5
    rounds: int = 2
    embed_dim: int = 16
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    freeze_policy: bool = False


@dataclass
class CurvePoint:
    update: int
    mean_reward: float
    best_reward: float
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float


_VALUE_KEYS = ("value_w1", "value_b1", "value_w2", "value_b2")


def loss_and_grads(params: PolicyParams, batch, value_coef: float,
                   entropy_beta: float):
    """Scalar loss and parameter gradients over [(ctx, trajectory), ...]."""
    grads = {k: np.zeros_like(v) for k, v in params.arrays.items()}
    loss = policy_loss = value_loss = entropy_total = 0.0
    for ctx, traj in batch:
        ret = traj.reward
        for step in traj.steps:
            obs = step.observation
            cache, logits, value = forward_step(params, ctx, obs)
            probs, feasible, log_probs_f = masked_distribution(
                logits, obs.mask.flat())
            adv = ret - step.value  # frozen at collection time
            lp = float(np.log(probs[step.action]))
            ent = float(-(probs[feasible] * log_probs_f).sum())
            resid = value - ret

            policy_loss += -adv * lp
            value_loss += resid * resid
            entropy_total += ent
            loss += -adv * lp + value_coef * resid * resid - entropy_beta * ent

            dlogits = np.zeros_like(logits)
            # d(-adv*logpi)/dz
            dlogits[feasible] += adv * probs[feasible]
            dlogits[step.action] -= adv
            # d(-beta*entropy)/dz
            dlogits[feasible] += entropy_beta * probs[feasible] * (log_probs_f + ent)
            dvalue = 2.0 * value_coef * resid
            backward_step(params, ctx, cache, dlogits, dvalue, grads)
    aux = {"policy_loss": policy_loss, "value_loss": value_loss,
           "entropy": entropy_total}
    return loss, grads, aux


class AdamState:
    def __init__(self, params: PolicyParams):
        self.m = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.t = 0

    def update(self, params: PolicyParams, grads: dict, cfg: TrainConfig) -> None:
        self.t += 1
        b1, b2 = cfg.adam_beta1, cfg.adam_beta2
        keys = params.arrays.keys()
        if cfg.freeze_policy:
            keys = [k for k in keys if k in _VALUE_KEYS]
        for k in keys:
            g = grads[k]
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            mhat = self.m[k] / (1 - b1**self.t)
            vhat = self.v[k] / (1 - b2**self.t)
            params.arrays[k] -= cfg.learning_rate * mhat / (np.sqrt(vhat)
                                                            + cfg.adam_eps)


def _episode_seed(seed: int, update: int, episode: int):
    return np.random.SeedSequence([seed, update, episode])


def train(envs, train_config: TrainConfig = TrainConfig(),
          params: PolicyParams | None = None, dump_path=None):
    """Train over one or more environments; returns (params, curve).

    Fully deterministic for a given seed. A non-finite loss aborts with a
    TrainingError and, when dump_path is given, a JSON dump of the batch
    that produced it.
    """
    if isinstance(envs, MacroPlacementEnv):
        envs = [envs]
    if not envs:
        raise ValueError("need at least one environment")
    cfg0 = envs[0].config
    ctxs = [DesignContext(env) for env in envs]
    rng = np.random.default_rng(train_config.seed)
    if params is None:
        params = init_params(rng, cfg0.grid_rows, cfg0.grid_cols,
                             rounds=train_config.rounds,
                             embed_dim=train_config.embed_dim)
    adam = AdamState(params)
    curve: list[CurvePoint] = []

    for update in range(train_config.updates):
        batch = []
        rewards = []
        for episode in range(train_config.episodes_per_update):
            idx = episode % len(envs)
            policy = policy_from_params(params, ctxs[idx])
            traj = rollout(envs[idx], policy,
                           _episode_seed(train_config.seed, update, episode))
            batch.append((ctxs[idx], traj))
            rewards.append(traj.reward)
        loss, grads, aux = loss_and_grads(params, batch,
                                          train_config.value_coef,
                                          train_config.entropy_beta)
        if not np.isfinite(loss):
            if dump_path is not None:
                _dump_batch(batch, loss, dump_path)
                raise TrainingError(
                    f"non-finite loss at update {update}; batch dumped to {dump_path}")
            raise TrainingError(f"non-finite loss at update {update}")
        adam.update(params, grads, train_config)
        curve.append(CurvePoint(
            update=update,
            mean_reward=float(np.mean(rewards)),
            best_reward=float(np.max(rewards)),
            loss=float(loss),
            policy_loss=float(aux["policy_loss"]),
            value_loss=float(aux["value_loss"]),
            entropy=float(aux["entropy"]),
        ))
    return params, curve


def _dump_batch(batch, loss, path) -> None:
    payload = {
        "loss": repr(loss),
        "episodes": [
            {
                "reward": traj.reward,
                "dead_end": traj.dead_end,
                "steps": [
                    {"action": s.action, "log_prob": s.log_prob, "value": s.value}
                    for s in traj.steps
                ],
            }
            for _ctx, traj in batch
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
