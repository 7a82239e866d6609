"""FIFO replay buffer over preallocated arrays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, UsageError

Array = np.ndarray


@dataclass(frozen=True)
class Transition:
    state: Array
    action: Array  # raw agent-space action, flattened
    reward: float
    next_state: Array
    done: bool
    aux: Array | None = None  # extra per-step payload (e.g. applied powers)


@dataclass(frozen=True)
class Batch:
    states: Array
    actions: Array
    rewards: Array
    next_states: Array
    dones: Array
    aux: Array | None = None


class ReplayBuffer:
    """Bounded ring of transitions; uniform with-replacement sampling."""

    def __init__(self, capacity: int, obs_dim: int, action_dim: int, aux_dim: int = 0):
        if capacity < 1:
            raise UsageError("capacity must be at least 1")
        self.capacity = int(capacity)
        self.obs_dim = int(obs_dim)
        self.action_dim = int(action_dim)
        self.aux_dim = int(aux_dim)
        self._states = np.zeros((capacity, obs_dim))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, obs_dim))
        self._dones = np.zeros(capacity)
        self._aux = np.zeros((capacity, aux_dim)) if aux_dim else None
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, t: Transition) -> None:
        state = np.asarray(t.state, dtype=np.float64).reshape(-1)
        action = np.asarray(t.action, dtype=np.float64).reshape(-1)
        next_state = np.asarray(t.next_state, dtype=np.float64).reshape(-1)
        if state.shape != (self.obs_dim,) or next_state.shape != (self.obs_dim,):
            raise UsageError(
                f"state length {state.shape[0]} does not match buffer obs_dim {self.obs_dim}"
            )
        if action.shape != (self.action_dim,):
            raise UsageError(
                f"action length {action.shape[0]} does not match buffer action_dim {self.action_dim}"
            )
        i = self._cursor
        self._states[i] = state
        self._actions[i] = action
        self._rewards[i] = t.reward
        self._next_states[i] = next_state
        self._dones[i] = float(t.done)
        if self._aux is not None:
            if t.aux is None:
                raise UsageError("buffer expects an aux payload on every push")
            aux = np.asarray(t.aux, dtype=np.float64).reshape(-1)
            if aux.shape != (self.aux_dim,):
                raise UsageError(f"aux length {aux.shape[0]} != {self.aux_dim}")
            self._aux[i] = aux
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, n: int, rng: np.random.Generator) -> Batch:
        if n > self._size:
            raise InsufficientDataError(f"requested {n} samples from buffer of size {self._size}")
        idx = rng.integers(0, self._size, size=n)
        return Batch(
            states=self._states[idx].copy(),
            actions=self._actions[idx].copy(),
            rewards=self._rewards[idx].copy(),
            next_states=self._next_states[idx].copy(),
            dones=self._dones[idx].copy(),
            aux=self._aux[idx].copy() if self._aux is not None else None,
        )

    def oldest(self) -> Transition:
        """The entry that the next eviction would drop (for tests)."""
        if self._size == 0:
            raise InsufficientDataError("buffer is empty")
        i = self._cursor % self._size if self._size == self.capacity else 0
        return Transition(
            state=self._states[i].copy(),
            action=self._actions[i].copy(),
            reward=float(self._rewards[i]),
            next_state=self._next_states[i].copy(),
            done=bool(self._dones[i]),
            aux=self._aux[i].copy() if self._aux is not None else None,
        )
