"""Replica orchestration: many independent seeded runs of the urn process.

Each replica derives its own 64-bit seed from the master seed with a
documented stateless mixer, so results are reproducible bit-for-bit no
matter how replicas are scheduled across worker processes.

Color conventions (these trip people up, so they are spelled out once):
the process-level quantities (proportions, spread, ReplicaResult fields
z_mean / z_weighted / limit_estimate) all refer to the BLACK share, the
belief in the wrong state. The samples CSV written for distribution fitting
stores the complementary WHITE share under the column `limit_estimate`, so
that fitted means line up with the signal accuracy alpha. See
ReplicaResult.correct_share and write_samples_csv.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import multiprocessing
import numpy as np

from .graph import Graph
from .urns import UrnState, init_fixed, init_signals, make_rng

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Uniform draws are pregenerated in blocks of this many steps.
_CHUNK_STEPS = 2048


def _mix64(x: int) -> int:
    """SplitMix64 finalizer; bijective on 64-bit integers."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def derive_seed(master: int, replica: int) -> int:
    """Stateless per-replica seed: mix64(master + (replica+1) * golden).

    The golden-ratio multiplier is odd, so for a fixed master distinct
    replicas map to distinct mixer inputs, and the finalizer is bijective,
    so distinct inputs give distinct seeds. Also used to derive per-alpha
    master seeds in sweeps over several alpha levels.
    """
    return _mix64((master + ((replica + 1) * _GOLDEN)) & _MASK64)


@dataclass
class RunConfig:
    """Parameters of one batch of replicas on a fixed graph.

    Exactly one of `alpha` (random signals) and `init_colors` (fixed
    per-agent bits, 1 = black) must be given. `record_stride`, when set,
    samples the trajectory every that many steps; `stop_spread` ends a
    replica early once the spread falls below it (off by default, and kept
    off in acceptance runs since it biases toward fast-consensus paths).
    """

    graph: Graph
    alpha: float | None
    horizon: int
    replicas: int
    master_seed: int
    record_stride: int | None = None
    stop_spread: float | None = None
    init_colors: np.ndarray | None = None

    def validate(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")
        if (self.alpha is None) == (self.init_colors is None):
            raise ValueError("exactly one of alpha and init_colors must be set")
        if self.alpha is not None and not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.init_colors is not None and len(self.init_colors) != self.graph.n:
            raise ValueError("init_colors length does not match graph size")
        if self.stop_spread is not None and not (0.0 < self.stop_spread <= 1.0):
            raise ValueError(f"stop_spread must lie in (0, 1], got {self.stop_spread}")


@dataclass
class ReplicaResult:
    """Terminal summary of one replica.

    z_mean / z_weighted / spread summarize the terminal black proportions;
    limit_estimate is the degree-weighted mean z_weighted, the finite-run
    estimate of the common limit belief. sample_* arrays hold the strided
    trajectory (always including t=0 and the terminal step) when the config
    requested recording.
    """

    replica: int
    steps: int
    z_mean: float
    z_weighted: float
    spread: float
    init_white_count: int
    sample_times: np.ndarray = field(repr=False)
    sample_means: np.ndarray = field(repr=False)
    sample_spreads: np.ndarray = field(repr=False)

    @property
    def limit_estimate(self) -> float:
        """Degree-weighted terminal black share (belief in the wrong state)."""
        return self.z_weighted

    @property
    def correct_share(self) -> float:
        """Degree-weighted terminal white share, 1 - limit_estimate.

        This is the statistic written to sample CSVs: its expectation tracks
        the signal accuracy alpha, which is what distribution fitting
        compares against.
        """
        return 1.0 - self.z_weighted


def _simulate_counts(
    g: Graph,
    black0: np.ndarray,
    horizon: int,
    rng: np.random.Generator,
    record_stride: int | None,
    stop_spread: float | None,
):
    """Vectorized core loop; consumes the stream exactly like urns.step.

    Counts are tracked in float64, which is exact for the integer magnitudes
    reachable at desk scale (well below 2**53), so results match the integer
    step() path bit-for-bit.
    """
    n = g.n
    adj = g.adjacency_float
    deg = g.degrees_float
    black = black0.astype(np.float64)
    total = np.ones(n, dtype=np.float64)
    z = black / total

    times: list[int] = []
    means: list[float] = []
    spreads: list[float] = []

    def record(t: int) -> None:
        times.append(t)
        means.append(float(z.mean()))
        spreads.append(float(z.max() - z.min()))

    if record_stride:
        record(0)

    t = 0
    stopped = False
    while t < horizon and not stopped:
        block = min(_CHUNK_STEPS, horizon - t)
        u = rng.random((block, n))
        for k in range(block):
            x = u[k] < z
            black += adj @ x
            total += deg
            z = black / total
            t += 1
            if record_stride and t % record_stride == 0:
                record(t)
            if stop_spread is not None and float(z.max() - z.min()) < stop_spread:
                stopped = True
                break

    if record_stride and times[-1] != t:
        record(t)

    black_int = np.rint(black).astype(np.int64)
    return black_int, t, z, (np.array(times), np.array(means), np.array(spreads))


def run_replica(cfg: RunConfig, replica: int) -> ReplicaResult:
    """Run one seeded replica to the horizon (or the early-stop threshold)."""
    cfg.validate()
    g = cfg.graph
    rng = make_rng(derive_seed(cfg.master_seed, replica))
    if cfg.init_colors is not None:
        state0 = init_fixed(g, cfg.init_colors)
    else:
        state0 = init_signals(g, cfg.alpha, rng)
    init_white = int(state0.white.sum())

    _, t, z, (ts, ms, sp) = _simulate_counts(
        g, state0.black, cfg.horizon, rng, cfg.record_stride, cfg.stop_spread
    )
    deg = g.degrees_float
    return ReplicaResult(
        replica=replica,
        steps=t,
        z_mean=float(z.mean()),
        z_weighted=float((deg * z).sum() / deg.sum()),
        spread=float(z.max() - z.min()),
        init_white_count=init_white,
        sample_times=ts,
        sample_means=ms,
        sample_spreads=sp,
    )


_WORKER_CFG: RunConfig | None = None


def _init_worker(cfg: RunConfig) -> None:
    global _WORKER_CFG
    _WORKER_CFG = cfg


def _run_in_worker(replica: int) -> ReplicaResult:
    return run_replica(_WORKER_CFG, replica)


def run_sweep(cfg: RunConfig, workers: int | None = None) -> list[ReplicaResult]:
    """Run all replicas of a config; independent streams, ordered results.

    Replicas are independent work items with derived seeds, so any worker
    count (including 1) yields identical per-replica results. Results are
    sorted by replica index before returning.
    """
    cfg.validate()
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, cfg.replicas))

    if workers == 1:
        results = [run_replica(cfg, i) for i in range(cfg.replicas)]
    else:
        chunk = max(1, -(-cfg.replicas // (workers * 4)))
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=ctx,
            initializer=_init_worker, initargs=(cfg,),
        ) as pool:
            results = list(pool.map(_run_in_worker, range(cfg.replicas), chunksize=chunk))

    results.sort(key=lambda r: r.replica)
    return results


def global_proportion(result: ReplicaResult, g: Graph, k: int) -> float:
    """Terminal share of black balls in the whole system of a k-regular run.

    On a k-regular graph every urn holds the same total, so this equals both
    the plain and the degree-weighted mean and is the martingale quantity.
    """
    del g, k  # regular graphs only: weighted and plain means coincide
    return result.z_weighted


def write_samples_csv(path, results: list[ReplicaResult], alpha: float | None) -> None:
    """Write the per-replica sample file consumed by distribution fitting.

    Columns: replica, alpha, limit_estimate, spread_T, init_white_count.
    The limit_estimate column stores the WHITE (correct-state) share
    `correct_share`, not the black-share ReplicaResult.limit_estimate; see
    the module docstring for why the fitting-facing convention flips.
    Floats use repr, so identical results give byte-identical files.
    """
    alpha_txt = "" if alpha is None else repr(float(alpha))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("replica,alpha,limit_estimate,spread_T,init_white_count\n")
        for r in results:
            fh.write(
                f"{r.replica},{alpha_txt},{r.correct_share!r},{r.spread!r},{r.init_white_count}\n"
            )


@dataclass
class NoiseDiagnostics:
    """Statistics of the martingale-difference noise of the rescaled recursion.

    u[k, i] is the rescaled surprise of agent i at step k+1: the prefactor
    (1 + d*k) / (1 + d_i*k) times (observed neighbor black draws minus their
    conditional expectation). Zero-mean by construction and bounded by
    prefactor * d_i at each step.
    """

    u: np.ndarray
    means: np.ndarray
    abs_mean_max: float
    bound_violations: int
    window_variances: np.ndarray


def noise_diagnostics(g: Graph, z_history: np.ndarray, draws: np.ndarray) -> NoiseDiagnostics:
    """Compute the noise terms from a recorded trajectory.

    Takes the outputs of urns.run_with_draws: z_history[k] are proportions
    at time k, draws[k] the draw vector realized at step k+1. Reports the
    per-agent sample means, hard-bound violations (must be zero), and the
    noise variance over four consecutive windows of the run.
    """
    steps, n = draws.shape
    if z_history.shape != (steps, n):
        raise ValueError("z_history and draws shapes do not match")
    d = g.min_degree
    deg = g.degrees_float
    adj = g.adjacency_float

    ts = np.arange(steps, dtype=np.float64)[:, None]
    pref = (1.0 + d * ts) / (1.0 + deg[None, :] * ts)
    expected = z_history @ adj.T
    observed = draws @ adj.T
    u = pref * (observed - expected)

    bound = pref * deg[None, :]
    violations = int((np.abs(u) > bound + 1e-12).sum())

    edges = np.linspace(0, steps, 5, dtype=int)
    window_var = np.array([
        float(u[a:b].var()) if b > a else 0.0
        for a, b in zip(edges[:-1], edges[1:])
    ])

    means = u.mean(axis=0)
    return NoiseDiagnostics(
        u=u,
        means=means,
        abs_mean_max=float(np.abs(means).max()),
        bound_violations=violations,
        window_variances=window_var,
    )


def initial_state(cfg: RunConfig, replica: int) -> UrnState:
    """The exact initial state replica `replica` starts from (for oracles)."""
    cfg.validate()
    if cfg.init_colors is not None:
        return init_fixed(cfg.graph, cfg.init_colors)
    rng = make_rng(derive_seed(cfg.master_seed, replica))
    return init_signals(cfg.graph, cfg.alpha, rng)
