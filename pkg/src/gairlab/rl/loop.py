"""Seeded training loop with per-episode metrics and wall-clock tracking."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..env.relay import RelayEnv
from ..seeding import SeedBank
from .td3 import Td3Agent

Array = np.ndarray


@dataclass(frozen=True)
class EpisodeRow:
    episode: int
    reward: float
    mean_rate: float
    mean_power: float
    violations: int


@dataclass(frozen=True)
class EvalRow:
    episode: int
    reward: float
    mean_rate: float
    mean_power: float


@dataclass
class LoopResult:
    episodes: list[EpisodeRow] = field(default_factory=list)
    evals: list[EvalRow] = field(default_factory=list)
    elapsed: list[float] = field(default_factory=list)  # cumulative secs/episode
    env_steps: int = 0
    critic_updates: int = 0
    actor_updates: int = 0
    total_seconds: float = 0.0

    def final_window_median(self, fraction: float = 0.1) -> float:
        """Median training reward over the last ``fraction`` of episodes."""
        n = len(self.episodes)
        window = max(1, round(fraction * n))
        return float(np.median([row.reward for row in self.episodes[-window:]]))


def _applied_powers_aux(env: RelayEnv, result) -> Array:
    """Applied transmit powers rescaled to the [-1, 1] action range."""
    cfg = env.config
    return np.array(
        [
            2.0 * result.state.bs_power / cfg.bs_power_max - 1.0,
            2.0 * result.state.uav_power / cfg.uav_power_max - 1.0,
        ]
    )


def run_eval(env: RelayEnv, agent: Td3Agent, bank: SeedBank, episode: int, n_episodes: int) -> EvalRow:
    """Noiseless rollouts on dedicated seed streams (training streams untouched)."""
    rewards, rates, powers = [], [], []
    for j in range(n_episodes):
        obs = env.reset(bank.seed_for(f"eval-reset-{episode}-{j}"))
        rng = bank.fresh("eval-act", episode * 10_000 + j)
        total, ep_rates, ep_powers = 0.0, [], []
        for _ in range(env.config.episode_steps):
            action = agent.select_action(obs, mode="eval", eval_rng=rng)
            res = env.step(agent.to_env_action(action, obs))
            obs = res.state.observe(env.config)
            total += res.reward
            ep_rates.append(res.rate)
            ep_powers.append(res.total_power)
        rewards.append(total)
        rates.append(np.mean(ep_rates))
        powers.append(np.mean(ep_powers))
    return EvalRow(
        episode=episode,
        reward=float(np.mean(rewards)),
        mean_rate=float(np.mean(rates)),
        mean_power=float(np.mean(powers)),
    )


def train_loop(
    env: RelayEnv,
    agent: Td3Agent,
    episodes: int,
    bank: SeedBank,
    *,
    eval_every: int = 0,
    eval_episodes: int = 5,
    clock=time.perf_counter,
) -> LoopResult:
    """Standard act/store/update schedule.

    The first ``agent.td3.warmup_steps`` env steps take uniform random
    actions and perform no gradient updates; every later step performs one
    critic update (actor updates ride the policy delay inside the agent).
    """
    result = LoopResult()
    warmup = agent.td3.warmup_steps
    t0 = clock()
    for ep in range(episodes):
        obs = env.reset(bank.seed_for(f"reset-{ep}"))
        ep_reward = 0.0
        rates: list[float] = []
        powers: list[float] = []
        violations = 0
        for _ in range(env.config.episode_steps):
            if result.env_steps < warmup:
                action = agent.random_action()
            else:
                action = agent.select_action(obs, mode="train")
            res = env.step(agent.to_env_action(action, obs))
            next_obs = res.state.observe(env.config)
            aux = _applied_powers_aux(env, res) if agent.wants_aux else None
            agent.record(obs, action, res.reward, next_obs, res.done, aux=aux)
            result.env_steps += 1
            if result.env_steps > warmup:
                agent.update()
            obs = next_obs
            ep_reward += res.reward
            rates.append(res.rate)
            powers.append(res.total_power)
            violations += int(res.violation)
        result.episodes.append(
            EpisodeRow(
                episode=ep,
                reward=float(ep_reward),
                mean_rate=float(np.mean(rates)),
                mean_power=float(np.mean(powers)),
                violations=violations,
            )
        )
        result.elapsed.append(clock() - t0)
        if eval_every and (ep + 1) % eval_every == 0:
            result.evals.append(run_eval(env, agent, bank, ep, eval_episodes))
    result.critic_updates = agent.critic_updates
    result.actor_updates = agent.actor_updates
    result.total_seconds = clock() - t0
    return result
