"""The Tutor: a Gaussian-in-logit-space weight policy trained by BC then PPO.

Each weighting decision is a one-step episode: the logit z is drawn from
N(mu(s), std^2), the loss weight is sigmoid(z), and the reward arrives right
after the Student's update. Log-densities are taken in logit space; the
sigmoid Jacobian cancels in the PPO ratio for a stored z.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tsrl.core.errors import ContractViolation, NumericFailure
from tsrl.core.network import DenseNet
from tsrl.core.optim import OptimizerState
from tsrl.schemas.config_schema import BCConfig, ExpertConfig, PPOConfig
from tsrl.schemas.state_schema import TutorState
from tsrl.schemas.tutor_schema import ActionBatch, ActionSample, BCReport, Experience, PPOReport

logger = logging.getLogger(__name__)

LOG_STD_MIN = math.log(1e-3)
LOG_STD_MAX = math.log(10.0)
LOG_2PI = math.log(2.0 * math.pi)
ADV_EPS = 1e-8
# sigmoid of +-30 stays strictly inside (0, 1) in float64
LOGIT_LIMIT = 30.0


def sigmoid(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    return np.exp(-np.logaddexp(0.0, -z))


def clip_logits(z) -> np.ndarray:
    return np.clip(z, -LOGIT_LIMIT, LOGIT_LIMIT)


def gaussian_log_prob(z, mu, log_std) -> np.ndarray:
    std = np.exp(log_std)
    return -0.5 * ((np.asarray(z) - mu) / std) ** 2 - log_std - 0.5 * LOG_2PI


def _state_matrix(states) -> np.ndarray:
    if isinstance(states, np.ndarray):
        return np.atleast_2d(states.astype(np.float64))
    return np.stack([s.vector() for s in states])


class TutorPolicy:
    """Actor (state -> mean logit), shared learnable log std, and critic (state -> value)."""

    learns = True

    def __init__(self, actor: DenseNet, critic: DenseNet, log_std: float, config: PPOConfig | None = None):
        if actor.output_dim != 1 or critic.output_dim != 1:
            raise ContractViolation("actor and critic must each emit a single value")
        if actor.input_dim != critic.input_dim:
            raise ContractViolation("actor and critic must read the same state dimension")
        config = config or PPOConfig()
        self.actor = actor
        self.critic = critic
        self.log_std = np.array([float(log_std)])
        self.clamp_log_std()
        self.actor_optimizer = OptimizerState(actor.parameters() + [self.log_std], lr=config.actor_lr)
        self.critic_optimizer = OptimizerState(critic.parameters(), lr=config.critic_lr)

    @classmethod
    def initialize(cls, state_dim: int, config: PPOConfig, rng: np.random.Generator) -> "TutorPolicy":
        sizes = [state_dim, *config.hidden_sizes, 1]
        activations = ["tanh"] * len(config.hidden_sizes) + ["identity"]
        actor = DenseNet.initialize(sizes, activations, rng)
        critic = DenseNet.initialize(sizes, activations, rng)
        return cls(actor, critic, config.log_std_init, config)

    @property
    def state_dim(self) -> int:
        return self.actor.input_dim

    @property
    def std(self) -> float:
        return float(np.exp(self.log_std[0]))

    def clamp_log_std(self) -> None:
        np.clip(self.log_std, LOG_STD_MIN, LOG_STD_MAX, out=self.log_std)

    def mean_logits(self, states) -> np.ndarray:
        return self.actor(_state_matrix(states))[:, 0]

    def values(self, states) -> np.ndarray:
        return self.critic(_state_matrix(states))[:, 0]

    def act(self, states, rng: np.random.Generator, stochastic: bool = True) -> ActionBatch:
        if stochastic:
            return sample_actions(self, states, rng)
        states = _state_matrix(states)
        mu = self.mean_logits(states)
        z = clip_logits(mu)
        return ActionBatch(
            weights=sigmoid(z),
            logits=z,
            log_probs=gaussian_log_prob(z, mu, self.log_std[0]),
            values=self.values(states),
        )


class FixedWeightTutor:
    """Emits the same weight for every state and never learns."""

    learns = False

    def __init__(self, weight: float = 1.0):
        if not 0.0 <= weight <= 1.0:
            raise ContractViolation(f"fixed weight must lie in [0, 1], got {weight}")
        self.weight = float(weight)

    def act(self, states, rng: np.random.Generator | None = None, stochastic: bool = True) -> ActionBatch:
        n = _state_matrix(states).shape[0]
        if self.weight in (0.0, 1.0):
            logit = math.copysign(math.inf, self.weight - 0.5)
        else:
            logit = math.log(self.weight / (1.0 - self.weight))
        return ActionBatch(
            weights=np.full(n, self.weight),
            logits=np.full(n, logit),
            log_probs=np.zeros(n),
            values=np.zeros(n),
        )


def sample_actions(policy: TutorPolicy, states, rng: np.random.Generator) -> ActionBatch:
    states = _state_matrix(states)
    mu = policy.mean_logits(states)
    z = clip_logits(mu + policy.std * rng.standard_normal(mu.shape[0]))
    return ActionBatch(
        weights=sigmoid(z),
        logits=z,
        log_probs=gaussian_log_prob(z, mu, policy.log_std[0]),
        values=policy.values(states),
    )


def sample_action(policy: TutorPolicy, state: TutorState, rng: np.random.Generator) -> ActionSample:
    return sample_actions(policy, state.vector(), rng).sample(0)


def mean_action(policy: TutorPolicy, state: TutorState) -> float:
    return float(sigmoid(clip_logits(policy.mean_logits(state.vector())))[0])


def expert_weights(states, cfg: ExpertConfig) -> np.ndarray:
    """Bump over moderate normalised EMA loss, optionally damped by forgetting."""
    states = _state_matrix(states)
    ema_norm, forget_norm = states[:, -2], states[:, -1]
    w = np.exp(-((ema_norm - cfg.center) ** 2) / (2.0 * cfg.width**2))
    w = w * (1.0 - cfg.forget_penalty * forget_norm)
    return np.clip(w, cfg.floor, 1.0)


def expert_weight(state: TutorState, cfg: ExpertConfig) -> float:
    return float(expert_weights(state.vector(), cfg)[0])


def _bc_mse(policy: TutorPolicy, states: np.ndarray, targets: np.ndarray) -> float:
    if states.shape[0] == 0:
        return float("nan")
    return float(np.mean((sigmoid(policy.mean_logits(states)) - targets) ** 2))


def bc_pretrain(
    policy: TutorPolicy,
    states: Sequence[TutorState] | np.ndarray,
    expert_cfg: ExpertConfig,
    bc_cfg: BCConfig,
    rng: np.random.Generator | None = None,
) -> BCReport:
    """Regress the actor's mean weight onto the expert heuristic (MSE).

    The critic and log std are left untouched.
    """
    if len(states) == 0:
        raise ContractViolation("behavioural cloning needs at least one state")
    states = _state_matrix(states)
    rng = rng or np.random.default_rng(0)
    targets = expert_weights(states, expert_cfg)

    order = rng.permutation(states.shape[0])
    n_holdout = int(states.shape[0] * bc_cfg.holdout_fraction)
    holdout, train = order[:n_holdout], order[n_holdout:]
    x_train, t_train = states[train], targets[train]

    optimizer = OptimizerState(policy.actor.parameters(), lr=bc_cfg.lr)
    initial = _bc_mse(policy, x_train, t_train)
    steps = 0
    for _ in range(bc_cfg.epochs):
        perm = rng.permutation(train.shape[0])
        for start in range(0, perm.shape[0], bc_cfg.minibatch_size):
            idx = perm[start : start + bc_cfg.minibatch_size]
            mu, cache = policy.actor.forward(x_train[idx])
            w = sigmoid(mu[:, 0])
            diff = w - t_train[idx]
            grad_mu = 2.0 * diff * w * (1.0 - w) / idx.shape[0]
            optimizer.step(policy.actor.backward(cache, grad_mu[:, None]))
            steps += 1

    final = _bc_mse(policy, x_train, t_train)
    holdout_mse = _bc_mse(policy, states[holdout], targets[holdout]) if n_holdout else final
    if not np.isfinite(final):
        raise NumericFailure("behavioural cloning diverged", {"final_mse": final, "steps": steps})
    report = BCReport(
        initial_mse=initial,
        final_mse=final,
        holdout_mse=holdout_mse,
        n_train=int(train.shape[0]),
        n_holdout=n_holdout,
        steps=steps,
    )
    logger.info(
        "BC pretraining: %d states, mse %.5f -> %.5f (holdout %.5f)",
        states.shape[0], initial, final, holdout_mse,
    )
    return report


class RolloutBuffer:
    """Experiences of one epoch, kept column-wise."""

    def __init__(self):
        self.clear()

    def clear(self) -> None:
        self._states: list[np.ndarray] = []
        self._logits: list[np.ndarray] = []
        self._log_probs: list[np.ndarray] = []
        self._values: list[np.ndarray] = []
        self._weights: list[np.ndarray] = []
        self._rewards: list[np.ndarray] = []
        self._sample_ids: list[np.ndarray] = []

    def add(self, states: np.ndarray, actions: ActionBatch, rewards: np.ndarray, sample_ids=None) -> None:
        n = states.shape[0]
        if not (len(actions) == n == np.shape(rewards)[0]):
            raise ContractViolation("states, actions and rewards must have equal lengths")
        self._states.append(np.asarray(states, dtype=np.float64))
        self._logits.append(actions.logits)
        self._log_probs.append(actions.log_probs)
        self._values.append(actions.values)
        self._weights.append(actions.weights)
        self._rewards.append(np.asarray(rewards, dtype=np.float64))
        self._sample_ids.append(np.arange(n) if sample_ids is None else np.asarray(sample_ids))

    def __len__(self) -> int:
        return sum(s.shape[0] for s in self._states)

    def _cat(self, parts: list[np.ndarray]) -> np.ndarray:
        return np.concatenate(parts) if parts else np.empty(0)

    @property
    def states(self) -> np.ndarray:
        return np.concatenate(self._states) if self._states else np.empty((0, 0))

    @property
    def logits(self) -> np.ndarray:
        return self._cat(self._logits)

    @property
    def log_probs(self) -> np.ndarray:
        return self._cat(self._log_probs)

    @property
    def values(self) -> np.ndarray:
        return self._cat(self._values)

    @property
    def weights(self) -> np.ndarray:
        return self._cat(self._weights)

    @property
    def rewards(self) -> np.ndarray:
        return self._cat(self._rewards)

    @property
    def sample_ids(self) -> np.ndarray:
        return self._cat(self._sample_ids)

    def experiences(self) -> list[Experience]:
        states, logits, log_probs = self.states, self.logits, self.log_probs
        values, weights, rewards = self.values, self.weights, self.rewards
        return [
            Experience(
                state=TutorState.from_vector(states[i]),
                action=ActionSample(
                    weight=float(weights[i]),
                    logit=float(logits[i]),
                    log_prob=float(log_probs[i]),
                    value=float(values[i]),
                ),
                reward=float(rewards[i]),
            )
            for i in range(len(self))
        ]


def compute_advantages(
    buffer: RolloutBuffer,
    policy: TutorPolicy,
    advantage_norm: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """One-step returns and advantages: R = r, A = r - V(s)."""
    if len(buffer) == 0:
        raise ContractViolation("cannot compute advantages of an empty buffer")
    returns = buffer.rewards.copy()
    advantages = returns - policy.values(buffer.states)
    if advantage_norm:
        advantages = (advantages - advantages.mean()) / (advantages.std() + ADV_EPS)
    return advantages, returns


@dataclass
class SurrogateResult:
    """Losses, diagnostics and gradients of the PPO objective on one minibatch."""

    actor_loss: float
    critic_loss: float
    objective: np.ndarray
    ratio: np.ndarray
    clip_fraction: float
    entropy: float
    actor_grads: list[np.ndarray]
    log_std_grad: np.ndarray
    critic_grads: list[np.ndarray]


def clipped_objective(ratio, advantages, clip_eps: float) -> np.ndarray:
    ratio = np.asarray(ratio, dtype=np.float64)
    advantages = np.asarray(advantages, dtype=np.float64)
    return np.minimum(ratio * advantages, np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages)


def ppo_surrogate(
    policy: TutorPolicy,
    states: np.ndarray,
    logits: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    returns: np.ndarray,
    clip_eps: float,
    entropy_coef: float = 0.0,
    value_coef: float = 0.0,
) -> SurrogateResult:
    """Evaluate the clipped surrogate and its exact gradients.

    ``actor_loss = -mean(min(rho*A, clip(rho)*A)) - entropy_coef*H`` and
    ``critic_loss = value_coef*mean((V - R)^2)``; both are minimised.
    """
    n = states.shape[0]
    mu_out, actor_cache = policy.actor.forward(states)
    v_out, critic_cache = policy.critic.forward(states)
    mu, v = mu_out[:, 0], v_out[:, 0]
    log_std = policy.log_std[0]
    var = math.exp(2.0 * log_std)

    new_log_probs = gaussian_log_prob(logits, mu, log_std)
    ratio = np.exp(new_log_probs - old_log_probs)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    objective = np.minimum(unclipped, clipped)
    entropy = 0.5 + 0.5 * LOG_2PI + log_std

    actor_loss = float(-objective.mean() - entropy_coef * entropy)
    critic_loss = float(value_coef * np.mean((v - returns) ** 2))

    # d(objective)/d(ratio) is A where the unclipped branch is the minimum
    grad_ratio = np.where(unclipped <= clipped, advantages, 0.0)
    grad_log_prob = -grad_ratio * ratio / n
    centered = logits - mu
    grad_mu = grad_log_prob * centered / var
    grad_log_std = float(np.sum(grad_log_prob * (centered**2 / var - 1.0)) - entropy_coef)

    return SurrogateResult(
        actor_loss=actor_loss,
        critic_loss=critic_loss,
        objective=objective,
        ratio=ratio,
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > clip_eps)),
        entropy=float(entropy),
        actor_grads=policy.actor.backward(actor_cache, grad_mu[:, None]),
        log_std_grad=np.array([grad_log_std]),
        critic_grads=policy.critic.backward(critic_cache, (2.0 * value_coef * (v - returns) / n)[:, None]),
    )


def ppo_update(
    policy: TutorPolicy,
    buffer: RolloutBuffer,
    config: PPOConfig,
    rng: np.random.Generator | None = None,
) -> PPOReport:
    """Clipped-surrogate PPO over the buffer, ``ppo_epochs`` shuffled passes."""
    if len(buffer) == 0:
        raise ContractViolation("ppo_update needs a non-empty rollout buffer")
    rng = rng or np.random.default_rng(0)
    advantages, returns = compute_advantages(buffer, policy, config.advantage_norm)
    states, logits, old_log_probs = buffer.states, buffer.logits, buffer.log_probs
    n = states.shape[0]

    ratios, clip_fracs, actor_losses, critic_losses = [], [], [], []
    first: SurrogateResult | None = None
    entropy = float("nan")
    for _ in range(config.ppo_epochs):
        perm = rng.permutation(n)
        for start in range(0, n, config.minibatch_size):
            idx = perm[start : start + config.minibatch_size]
            result = ppo_surrogate(
                policy,
                states[idx],
                logits[idx],
                old_log_probs[idx],
                advantages[idx],
                returns[idx],
                config.clip_eps,
                config.entropy_coef,
                config.value_coef,
            )
            if not (np.isfinite(result.actor_loss) and np.isfinite(result.critic_loss)):
                raise NumericFailure(
                    "PPO loss is not finite",
                    {"actor_loss": result.actor_loss, "critic_loss": result.critic_loss, "minibatch": len(actor_losses)},
                )
            if first is None:
                first = result
            policy.actor_optimizer.step(result.actor_grads + [result.log_std_grad])
            policy.critic_optimizer.step(result.critic_grads)
            policy.clamp_log_std()

            ratios.append(float(result.ratio.mean()))
            clip_fracs.append(result.clip_fraction)
            actor_losses.append(result.actor_loss)
            critic_losses.append(result.critic_loss)
            entropy = result.entropy

    report = PPOReport(
        mean_ratio=float(np.mean(ratios)),
        clip_fraction=float(np.mean(clip_fracs)),
        actor_loss=float(np.mean(actor_losses)),
        critic_loss=float(np.mean(critic_losses)),
        entropy=entropy,
        first_ratio_mean=float(first.ratio.mean()),
        first_clip_fraction=first.clip_fraction,
        n_experiences=n,
        gradient_steps=len(actor_losses),
    )
    logger.info(
        "PPO update on %d experiences: ratio %.4f, clip %.3f, actor %.5f, critic %.5f, std %.4f",
        n, report.mean_ratio, report.clip_fraction, report.actor_loss, report.critic_loss, policy.std,
    )
    return report
