"""Command-line interface: simulate, sweep, enumerate, ode, fit, report.

Every run is fully specified by its flags (plus a JSON config for sweeps);
all randomness flows from an explicit seed, never from the clock, so a
repeated invocation produces byte-identical output files.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from fractions import Fraction

import numpy as np

from . import graph as graphs
from . import montecarlo as mc
from . import ode, oracle, stats, urns


class UsageError(Exception):
    """Bad flags or config; reported on stderr with exit code 2."""


def parse_graph_spec(spec: str) -> graphs.Graph:
    """Graph mini-language: star:N | complete:N | kreg:N:K | path:N | file:PATH."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "star":
            return graphs.make_star(int(rest))
        if kind == "complete":
            return graphs.make_complete(int(rest))
        if kind == "path":
            return graphs.make_path(int(rest))
        if kind == "kreg":
            n_txt, _, k_txt = rest.partition(":")
            return graphs.make_circulant_regular(int(n_txt), int(k_txt))
        if kind == "file":
            if not rest:
                raise UsageError("graph spec 'file:' needs a path")
            return graphs.read_edge_list(rest)
    except (ValueError, OSError) as exc:
        raise UsageError(f"invalid graph spec {spec!r}: {exc}") from exc
    raise UsageError(f"unknown graph kind {kind!r} (expected star|complete|kreg|path|file)")


def parse_init_colors(txt: str, n: int) -> np.ndarray:
    """Per-agent colors 'W,B,W' (or 0/1): W = white/correct, B = black/wrong."""
    mapping = {"W": 0, "B": 1, "0": 0, "1": 1}
    tokens = [tok.strip().upper() for tok in txt.split(",")]
    try:
        bits = [mapping[tok] for tok in tokens]
    except KeyError as exc:
        raise UsageError(f"bad color token {exc.args[0]!r} in --init (use W or B)") from exc
    if len(bits) != n:
        raise UsageError(f"--init lists {len(bits)} colors but the graph has {n} agents")
    return np.array(bits, dtype=np.int64)


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _require_alpha(value: float) -> float:
    if not (0.0 <= value <= 1.0):
        raise UsageError(f"--alpha must lie in [0, 1], got {value}")
    return value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    g = parse_graph_spec(args.graph)
    if (args.alpha is None) == (args.init is None):
        raise UsageError("give exactly one of --alpha and --init")
    if args.steps < 1:
        raise UsageError(f"--steps must be >= 1, got {args.steps}")
    if args.stride < 1:
        raise UsageError(f"--stride must be >= 1, got {args.stride}")

    rng = urns.make_rng(args.seed)
    if args.init is not None:
        state = urns.init_fixed(g, parse_init_colors(args.init, g.n))
    else:
        state = urns.init_signals(g, _require_alpha(args.alpha), rng)

    recorded = [state]
    for _ in range(args.steps):
        state, _ = urns.step(state, g, rng)
        if state.t % args.stride == 0 or state.t == args.steps:
            recorded.append(state)
    if recorded[-1].t != state.t:
        recorded.append(state)

    with _open_out(args.out) as fh:
        fh.write("t,agent,black,total,z\n")
        for st in recorded:
            totals = st.totals(g)
            z = st.black / totals
            for i in range(g.n):
                fh.write(f"{st.t},{i},{st.black[i]},{totals[i]},{z[i]!r}\n")
    return 0


_SWEEP_REQUIRED = {"graph": str, "replicas": int, "horizon": int, "master_seed": int}


def _load_sweep_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"config {path!r}: top level must be an object")

    for key, typ in _SWEEP_REQUIRED.items():
        if key not in raw:
            raise UsageError(f"config field {key!r} is missing")
        if not isinstance(raw[key], typ) or isinstance(raw[key], bool):
            raise UsageError(f"config field {key!r} must be a {typ.__name__}")

    if "alphas" in raw:
        alphas = raw["alphas"]
        if not isinstance(alphas, list) or not alphas:
            raise UsageError("config field 'alphas' must be a non-empty list")
    elif "alpha" in raw:
        alphas = [raw["alpha"]]
    else:
        raise UsageError("config needs field 'alphas' (list) or 'alpha' (number)")
    for a in alphas:
        if not isinstance(a, (int, float)) or isinstance(a, bool) or not 0.0 <= a <= 1.0:
            raise UsageError(f"config field 'alphas': {a!r} is not a probability in [0, 1]")
    raw["alphas"] = [float(a) for a in alphas]

    if raw["replicas"] < 1:
        raise UsageError("config field 'replicas' must be >= 1")
    if raw["horizon"] < 1:
        raise UsageError("config field 'horizon' must be >= 1")
    stride = raw.get("record_stride")
    if stride is not None and (not isinstance(stride, int) or stride < 1):
        raise UsageError("config field 'record_stride' must be an integer >= 1")
    stop = raw.get("stop_spread")
    if stop is not None and (not isinstance(stop, (int, float)) or not 0.0 < stop <= 1.0):
        raise UsageError("config field 'stop_spread' must lie in (0, 1]")
    return raw


def cmd_sweep(args) -> int:
    raw = _load_sweep_config(args.config)
    try:
        g = parse_graph_spec(raw["graph"])
    except UsageError as exc:
        raise UsageError(f"config field 'graph': {exc}") from exc

    out_dir = args.out_dir
    for idx, alpha in enumerate(raw["alphas"]):
        cfg = mc.RunConfig(
            graph=g,
            alpha=alpha,
            horizon=raw["horizon"],
            replicas=raw["replicas"],
            master_seed=mc.derive_seed(raw["master_seed"], idx),
            record_stride=raw.get("record_stride"),
            stop_spread=raw.get("stop_spread"),
        )
        results = mc.run_sweep(cfg, workers=args.threads)
        path = f"{out_dir}/samples_alpha_{alpha:g}.csv"
        mc.write_samples_csv(path, results, alpha)
        est = np.array([r.correct_share for r in results])
        print(
            f"alpha={alpha:g}: {len(results)} replicas, "
            f"limit_estimate mean={est.mean():.4f} sd={est.std():.4f} -> {path}"
        )
    return 0


def _composition_json(comp: oracle.Composition) -> list[list[int]]:
    return [[w, b] for w, b in comp]


def _frac_str(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}"


def cmd_enumerate(args) -> int:
    g = parse_graph_spec(args.graph)
    init = urns.init_fixed(g, parse_init_colors(args.init, g.n))
    if args.paths:
        rows = [
            {
                "draws": [list(x) for x in p.draws],
                "composition": _composition_json(p.composition),
                "prob": _frac_str(p.probability),
            }
            for p in oracle.enumerate_paths(g, init, args.depth)
        ]
    else:
        dist = oracle.enumerate_outcomes(g, init, args.depth)
        rows = [
            {"composition": _composition_json(comp), "prob": _frac_str(dist[comp])}
            for comp in sorted(dist)
        ]
    with _open_out(args.out) as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_ode(args) -> int:
    g = parse_graph_spec(args.graph)
    try:
        z0 = np.array([float(tok) for tok in args.z0.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise UsageError(f"--z0 must be a comma list of floats: {exc}") from exc
    if z0.shape != (g.n,):
        raise UsageError(f"--z0 lists {z0.shape[0]} values but the graph has {g.n} agents")
    if (z0 < 0).any() or (z0 > 1).any():
        raise UsageError("--z0 entries must lie in [0, 1]")
    if args.stride < 1:
        raise UsageError(f"--stride must be >= 1, got {args.stride}")

    traj = ode.integrate(g, z0, step_size=args.step, horizon=args.horizon)
    with _open_out(args.out) as fh:
        fh.write("t," + ",".join(f"z_{i}" for i in range(g.n)) + "\n")
        last = len(traj.times) - 1
        for k in range(0, last + 1):
            if k % args.stride and k != last:
                continue
            row = ",".join(repr(float(v)) for v in traj.states[k])
            fh.write(f"{traj.times[k]!r},{row}\n")
    return 0


def _read_samples_csv(path: str) -> tuple[np.ndarray, list[str]]:
    """Read one samples CSV; returns (limit_estimate values, alpha strings)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read samples file {path!r}: {exc}") from exc
    if not lines:
        raise UsageError(f"samples file {path!r} is empty")
    header = lines[0].split(",")
    try:
        est_col = header.index("limit_estimate")
    except ValueError:
        raise UsageError(f"samples file {path!r} has no 'limit_estimate' column") from None
    alpha_col = header.index("alpha") if "alpha" in header else None
    values, alphas = [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        try:
            values.append(float(parts[est_col]))
        except (IndexError, ValueError) as exc:
            raise UsageError(f"samples file {path!r}: bad row {ln!r}") from exc
        alphas.append(parts[alpha_col] if alpha_col is not None else "")
    return np.array(values), alphas


def cmd_fit(args) -> int:
    samples, _ = _read_samples_csv(args.infile)
    beta = stats.fit_beta_mle(samples)
    normal = stats.fit_normal(samples)
    gof = stats.goodness_of_fit(samples, beta, normal)
    payload = {
        "beta": {
            "a": beta.a,
            "b": beta.b,
            "loglik": gof.loglik_beta,
            "ks": gof.ks_beta,
        },
        "normal": {
            "mu": normal.mu,
            "sigma": normal.sigma,
            "loglik": gof.loglik_normal,
            "ks": gof.ks_normal,
        },
    }
    with _open_out(args.out) as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_report(args) -> int:
    groups: dict[float, list[float]] = {}
    for path in args.infiles:
        values, alphas = _read_samples_csv(path)
        for v, a_txt in zip(values, alphas):
            if not a_txt:
                raise UsageError(f"samples file {path!r} lacks alpha values; cannot group")
            groups.setdefault(float(a_txt), []).append(v)
    try:
        report = stats.alpha_sweep_report({a: np.array(v) for a, v in groups.items()})
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    with _open_out(args.out) as fh:
        fh.write("alpha,a_hat,b_hat,a_plus_b,empirical_mean\n")
        for row in report.rows:
            fh.write(
                f"{row.alpha!r},{row.a!r},{row.b!r},{row.a_plus_b!r},{row.empirical_mean!r}\n"
            )
    print(f"max |empirical mean - alpha| = {report.max_mean_error:.4f}")
    print(f"relative spread of a+b across alpha = {report.ab_rel_spread:.4f}")
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urnnet",
        description="Reinforcing-urn opinion dynamics on networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one trajectory and dump it as CSV")
    p.add_argument("--graph", required=True, help="star:N | complete:N | kreg:N:K | path:N | file:PATH")
    p.add_argument("--alpha", type=float, help="signal accuracy for random initialization")
    p.add_argument("--init", help="fixed per-agent colors, e.g. W,B,W")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stride", type=int, default=1, help="record every STRIDE steps")
    p.add_argument("--out", default="-", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run replica sweeps from a JSON config")
    p.add_argument("--config", required=True, help="JSON config path (see README for the schema)")
    p.add_argument("--out-dir", default=".", help="directory for per-alpha sample CSVs")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: machine parallelism)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("enumerate", help="exact outcome distribution on a tiny instance")
    p.add_argument("--graph", required=True)
    p.add_argument("--init", required=True, help="fixed per-agent colors, e.g. W,B,W")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--paths", action="store_true", help="list draw paths instead of merging")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("ode", help="integrate the mean-field flow")
    p.add_argument("--graph", required=True)
    p.add_argument("--z0", required=True, help="comma list of initial proportions")
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--step", type=float, default=None, help="RK4 step (default 0.01/max degree)")
    p.add_argument("--stride", type=int, default=1, help="write every STRIDE-th step")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_ode)

    p = sub.add_parser("fit", help="fit beta and normal to a samples CSV")
    p.add_argument("--in", dest="infile", required=True, help="samples CSV with a limit_estimate column")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="per-alpha fit table from sample CSVs")
    p.add_argument("--in", dest="infiles", nargs="+", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (UsageError, graphs.GraphError, oracle.EnumerationLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ode.IntegrationError, stats.FitError, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
