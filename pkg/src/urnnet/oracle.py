"""Brute-force exact distribution of the urn system on tiny instances.

Probabilities are arbitrary-precision rationals (fractions.Fraction), so
small worked examples reproduce exactly and merging identical compositions
never loses mass. A composition records each urn as a (white, black) pair,
the convention used in the worked three-agents-in-line table.

Two views are exposed: enumerate_paths lists every positive-probability draw
path with its final composition (the raw table), while enumerate_outcomes
merges paths that land on the same composition.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .graph import Graph
from .urns import UrnState

# One urn as (white, black); one outcome as a tuple of urns in agent order.
Composition = tuple[tuple[int, int], ...]

# 2**(n*depth) potential draw paths; 24 keeps worst cases at ~16M paths.
MAX_BITS = 24


class EnumerationLimitError(ValueError):
    """Instance exceeds the n * depth enumeration guard."""


@dataclass(frozen=True)
class DrawPath:
    """One positive-probability sequence of draw vectors and its endpoint."""

    draws: tuple[tuple[int, ...], ...]
    composition: Composition
    probability: Fraction


def _check_guard(n: int, depth: int) -> None:
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if n * depth > MAX_BITS:
        raise EnumerationLimitError(
            f"refusing to enumerate 2^({n}*{depth}) draw paths; "
            f"n * depth must be <= {MAX_BITS}"
        )


def _composition(black: tuple[int, ...], totals: np.ndarray) -> Composition:
    return tuple((int(s - b), int(b)) for b, s in zip(black, totals))


def _draw_options(z: list[Fraction]) -> list[list[tuple[int, Fraction]]]:
    """Per-agent positive-probability draws: (bit, probability) pairs."""
    options = []
    for zi in z:
        opts = []
        if zi < 1:
            opts.append((0, 1 - zi))
        if zi > 0:
            opts.append((1, zi))
        options.append(opts)
    return options


def enumerate_outcomes(g: Graph, init: UrnState, depth: int) -> dict[Composition, Fraction]:
    """Exact distribution over compositions after `depth` further steps.

    Expands states level by level, merging identical black-count vectors
    between steps, which keeps the state set far below the raw path count.
    Zero-probability draw branches are pruned, so monochrome systems stay a
    single outcome. Probabilities sum to exactly 1.
    """
    _check_guard(g.n, depth)
    nbrs = [tuple(int(j) for j in g.neighbors[i]) for i in range(g.n)]

    level: dict[tuple[int, ...], Fraction] = {tuple(int(b) for b in init.black): Fraction(1)}
    t = init.t
    for _ in range(depth):
        totals = 1 + g.degrees * t
        nxt: dict[tuple[int, ...], Fraction] = {}
        for black, prob in level.items():
            z = [Fraction(int(b), int(s)) for b, s in zip(black, totals)]
            for combo in product(*_draw_options(z)):
                p = prob
                for _, pi in combo:
                    p *= pi
                x = [bit for bit, _ in combo]
                new_black = tuple(
                    b + sum(x[j] for j in nbrs[i]) for i, b in enumerate(black)
                )
                nxt[new_black] = nxt.get(new_black, Fraction(0)) + p
        level = nxt
        t += 1

    totals = 1 + g.degrees * t
    return {_composition(black, totals): p for black, p in level.items()}


def enumerate_paths(g: Graph, init: UrnState, depth: int) -> list[DrawPath]:
    """Every positive-probability draw path of length `depth`, unmerged.

    This is the per-draw-path view of enumerate_outcomes: summing the
    probabilities of paths sharing a composition reproduces the merged
    distribution. Paths are returned in lexicographic draw order.
    """
    _check_guard(g.n, depth)
    nbrs = [tuple(int(j) for j in g.neighbors[i]) for i in range(g.n)]
    results: list[DrawPath] = []

    def descend(black: tuple[int, ...], t: int, remaining: int,
                prob: Fraction, trail: tuple[tuple[int, ...], ...]) -> None:
        if remaining == 0:
            totals = 1 + g.degrees * t
            results.append(DrawPath(trail, _composition(black, totals), prob))
            return
        totals = 1 + g.degrees * t
        z = [Fraction(int(b), int(s)) for b, s in zip(black, totals)]
        for combo in product(*_draw_options(z)):
            p = prob
            for _, pi in combo:
                p *= pi
            x = tuple(bit for bit, _ in combo)
            new_black = tuple(
                b + sum(x[j] for j in nbrs[i]) for i, b in enumerate(black)
            )
            descend(new_black, t + 1, remaining - 1, p, trail + (x,))

    descend(tuple(int(b) for b in init.black), init.t, depth, Fraction(1), ())
    return results


def one_step_expectation(g: Graph, init: UrnState) -> list[Fraction]:
    """Exact expected black-count gain of each urn over one step.

    Computed from the depth-1 enumeration; equals the sum of neighbor black
    proportions exactly, in rational arithmetic.
    """
    base = [Fraction(int(b)) for b in init.black]
    dist = enumerate_outcomes(g, init, 1)
    expect = [Fraction(0)] * g.n
    for comp, p in dist.items():
        for i, (_, b) in enumerate(comp):
            expect[i] += p * (b - base[i])
    return expect
