"""The exact stochastic urn process on a graph.

Every agent holds an urn of black and white balls (black encodes the wrong
state of the world, white the true one). Each step, all agents simultaneously
draw one ball with replacement and then add one ball per observed neighbor
draw, of the drawn color. Counts are exact integers; the proportion of black
balls in agent i's urn after t steps is black[i] / (1 + degrees[i] * t).

Reproducibility contract: randomness comes from a numpy Generator backed by
the counter-based Philox bit generator (`make_rng`). Each step consumes
exactly n uniform doubles, one per agent in agent-index order; agent i draws
black when its uniform is < its current black proportion. Identical seeds
give bit-identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph


@dataclass
class UrnState:
    """Exact per-agent ball counts after `t` synchronous steps.

    Invariant: black[i] + white[i] == 1 + degrees[i] * t for every agent.
    A state is mutated by no one; step() returns a fresh state.
    """

    t: int
    black: np.ndarray
    white: np.ndarray

    @property
    def n(self) -> int:
        return self.black.shape[0]

    def totals(self, g: Graph) -> np.ndarray:
        return 1 + g.degrees * self.t

    def copy(self) -> "UrnState":
        return UrnState(self.t, self.black.copy(), self.white.copy())


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox4x64) keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF))


def check_state(state: UrnState, g: Graph) -> None:
    """Assert the count invariants; cheap enough for tests and debugging."""
    if state.black.shape != (g.n,) or state.white.shape != (g.n,):
        raise ValueError("state dimension does not match graph")
    if state.t < 0:
        raise ValueError("negative step index")
    totals = state.totals(g)
    if not np.array_equal(state.black + state.white, totals):
        raise ValueError("ball counts violate black + white == 1 + degree * t")
    if (state.black < 0).any() or (state.white < 0).any():
        raise ValueError("negative ball count")


def init_signals(g: Graph, alpha: float, rng: np.random.Generator) -> UrnState:
    """Seed every urn with one ball from an independent noisy signal.

    Each agent receives the correct signal (one white ball) with probability
    `alpha`, else the wrong one (one black ball). Consumes n uniforms in
    agent-index order.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    u = rng.random(g.n)
    white = (u < alpha).astype(np.int64)
    return UrnState(t=0, black=1 - white, white=white)


def init_fixed(g: Graph, colors) -> UrnState:
    """Deterministic initialization from per-agent bits (1 = black ball)."""
    bits = np.asarray(colors, dtype=np.int64)
    if bits.shape != (g.n,):
        raise ValueError(f"expected {g.n} colors, got shape {bits.shape}")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("colors must be 0 (white) or 1 (black)")
    return UrnState(t=0, black=bits.copy(), white=1 - bits)


def proportions(state: UrnState, g: Graph) -> np.ndarray:
    """Per-agent proportion of black balls, each in [0, 1]."""
    return state.black / (1 + g.degrees * state.t)


def spread(state: UrnState, g: Graph) -> float:
    """max - min of the black proportions; 0 exactly at consensus."""
    z = proportions(state, g)
    return float(z.max() - z.min())


def degree_weighted_mean(state: UrnState, g: Graph) -> float:
    """Degree-weighted average of the black proportions.

    Conserved by the mean-field flow, and a martingale of the discrete
    process when the graph is regular.
    """
    z = proportions(state, g)
    return float((g.degrees * z).sum() / g.degrees.sum())


def step(state: UrnState, g: Graph, rng: np.random.Generator) -> tuple[UrnState, np.ndarray]:
    """One synchronous draw-and-reinforce step.

    All agents draw using the time-t proportions (agent i draws black with
    probability black[i]/totals[i], independently), then every urn gains one
    ball per neighbor draw of the drawn color. Returns the new state at t+1
    and the realized draw vector (1 = black draw).
    """
    totals = 1 + g.degrees * state.t
    z = state.black / totals
    u = rng.random(g.n)
    x = (u < z).astype(np.int64)
    black_gain = g.adjacency @ x
    new_black = state.black + black_gain
    new_white = state.white + g.degrees - black_gain
    return UrnState(t=state.t + 1, black=new_black, white=new_white), x


def run_steps(
    state: UrnState, g: Graph, steps: int, rng: np.random.Generator
) -> UrnState:
    """Advance `steps` synchronous steps, discarding the draw vectors."""
    for _ in range(steps):
        state, _ = step(state, g, rng)
    return state


def run_with_draws(
    state: UrnState, g: Graph, steps: int, rng: np.random.Generator
) -> tuple[UrnState, np.ndarray, np.ndarray]:
    """Advance `steps` steps recording proportions and draws.

    Returns (terminal state, z_history, draws) where z_history[k] holds the
    proportions before step k+1 (shape (steps, n)) and draws[k] the draw
    vector realized at step k+1. Intended for noise diagnostics at desk
    scale; memory grows as steps * n.
    """
    z_hist = np.empty((steps, g.n), dtype=np.float64)
    draws = np.empty((steps, g.n), dtype=np.int64)
    for k in range(steps):
        z_hist[k] = proportions(state, g)
        state, x = step(state, g, rng)
        draws[k] = x
    return state, z_hist, draws
