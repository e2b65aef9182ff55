"""Command-line front end.

Every subcommand writes one artifact (stdout or ``--out``).  CSV output starts
with a ``# config: {...}`` line and JSON output carries a ``"config"`` key, so
each file records the settings and seed that produced it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import chains, coupling, diagnostics, spectral
from .partitions import (
    DEFAULT_EXACT_CAP,
    CapacityError,
    ContinuousPartition,
    CylinderSet,
    IntegerPartition,
)
from .samplers import DEFAULT_EPS_TRUNC, RngStream, replica_map, sample_gem

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY, EXIT_IO = 0, 1, 2, 3, 4
CHARACTER_CAP = 10
# settings that do not influence the result and stay out of the metadata
_NOT_CONFIG = {"out", "config", "handler"}


class UsageError(ValueError):
    pass


def _floats(text: str) -> list:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise UsageError(msg)


# ---------------------------------------------------------------------------
# Output


class Table:
    def __init__(self, header, rows, extra: dict | None = None):
        self.header = list(header)
        self.rows = [list(r) for r in rows]
        self.extra = extra or {}

    def render(self, fmt: str, config: dict) -> str:
        if fmt == "json":
            body = {"config": config,
                    "columns": self.header,
                    "rows": self.rows}
            body.update(self.extra)
            return json.dumps(body) + "\n"
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Replica workers (module level so they pickle)


def _ccf_replica(rng, start, steps, alphas, eps):
    p = sample_gem(rng, eps) if start is None else start
    final, _ = chains.run_ccf(p, steps, rng)
    return [len(final), final.part(1)] + [diagnostics.moment_sum(final, a) for a in alphas]


def _dcf_replica(rng, start, steps):
    state = start
    for _ in range(steps):
        state = chains.dcf_step(state, rng)
    return tuple(state)


def _couple_replica(rng, n, steps, eps):
    p = sample_gem(rng, eps)
    return coupling.run_coupling(p, n, steps, rng)


# ---------------------------------------------------------------------------
# Subcommands


def _start_partition(args) -> IntegerPartition:
    if args.start:
        ell = IntegerPartition.parse(args.start)
        _require(ell.n == args.n, f"--start {args.start} is not a partition of {args.n}")
        return ell
    return IntegerPartition((args.n,))


def cmd_simulate_ccf(args):
    _require(args.steps >= 0 and args.replicas >= 1, "need --steps >= 0 and --replicas >= 1")
    alphas = args.alpha or [0.6]
    start = None
    if args.start:
        masses = _floats(args.start)
        start = ContinuousPartition.from_masses(masses)
    res = replica_map(_ccf_replica, args.replicas, args.seed, start, args.steps, alphas,
                      args.epsilon_trunc)
    header = ["replica", "parts", "largest"] + [f"moment_{a:g}" for a in alphas]
    return Table(header, ([r] + row for r, row in enumerate(res)))


def cmd_simulate_dcf(args):
    _require(args.n >= 2, "--n must be at least 2")
    _require(args.steps >= 0, "--steps must be nonnegative")
    start = _start_partition(args)
    if args.exact:
        K = chains.exact_kernel(args.n)
        law = chains.k_step_distribution(chains.ExactDistribution.point_mass(start), K, args.steps)
        rows = ([json.dumps(list(lam)), p.numerator, p.denominator]
                for lam, p in zip(law.index, law.weights))
        return Table(["partition", "probability_num", "probability_den"], rows)
    _require(args.replicas >= 1, "--replicas must be positive")
    finals = replica_map(_dcf_replica, args.replicas, args.seed, start, args.steps)
    counts: dict = {}
    for f in finals:
        counts[f] = counts.get(f, 0) + 1
    # canonical (reverse lexicographic) order, unvisited states omitted
    rows = [[json.dumps(list(lam)), counts[lam] / args.replicas]
            for lam in sorted(counts, reverse=True)]
    return Table(["partition", "frequency"], rows)


def cmd_couple(args):
    _require(args.n >= 2 and args.steps >= 0 and args.replicas >= 1,
             "need --n >= 2, --steps >= 0, --replicas >= 1")
    traces = replica_map(_couple_replica, args.replicas, args.seed, args.n, args.steps,
                         args.epsilon_trunc)
    rows = []
    summary = []
    for r, t in enumerate(traces):
        for k, rho, e, gap in t.rows():
            rows.append([r, k, rho, e, gap])
        summary.append({"replica": r, "seed": args.seed, "stream_id": r, "tau": t.tau,
                        "initial_parts": t.initial_parts,
                        "violations": len(t.violations()),
                        "rho": [float(x) for x in t.rho]})
    return Table(["replica", "k", "rho", "e", "l1_gap"], rows, {"summary": summary})


def cmd_spectrum(args):
    eig = spectral.spectrum(args.n)
    rows = ([json.dumps(list(lam)), th.numerator, th.denominator]
            for lam, th in eig.eigenvalues.items())
    return Table(["lambda", "theta_num", "theta_den"], rows)


def cmd_characters(args):
    if args.n > CHARACTER_CAP:
        raise CapacityError(f"character tables are limited to n <= {CHARACTER_CAP}")
    _require(args.n >= 1, "--n must be positive")
    table = spectral.character_table(args.n)
    header = ["lambda"] + [json.dumps(list(g)) for g in table.index]
    rows = ([json.dumps(list(lam))] + table.row(lam) for lam in table.index)
    return Table(header, rows)


def cmd_delta_c(args):
    _require(args.n >= 2, "--n must be at least 2")
    _require(bool(args.cylinder), "delta-c needs --cylinder")
    cyl = CylinderSet.parse(args.cylinder)
    mu0 = chains.ExactDistribution.point_mass(_start_partition(args))
    series = spectral.delta_c_series(mu0, cyl, args.steps)
    return Table(["k", "delta_num", "delta_den"],
                 ([k, d.numerator, d.denominator] for k, d in enumerate(series)))


def cmd_return_prob(args):
    _require(args.n >= 2 and args.steps >= 1, "need --n >= 2 and --steps >= 1")
    rows = []
    for k in range(1, args.steps + 1):
        p = spectral.return_probability(args.n, k)
        rows.append([args.n, k, p.numerator, p.denominator])
    return Table(["n", "k", "p_num", "p_den"], rows)


def cmd_moments(args):
    _require(args.replicas >= 1, "--replicas must be positive")
    alphas = args.alpha or [0.5, 0.6, 0.8]
    _require(all(a > 0 for a in alphas), "--alpha values must be positive")
    reps = diagnostics.moment_reports(alphas, args.replicas, RngStream(args.seed, 0),
                                      args.epsilon_trunc)
    return Table(["alpha", "mean", "stderr", "replicas"],
                 ([r.alpha, r.sample_mean, r.std_error, r.replicas] for r in reps))


def verify_checks(n_max: int = 8, pairs: int = 5, seed: int = 0) -> list:
    """Exact invariant suite; returns ``(check, n, value)`` with value 0 on success."""
    out = []
    gen = np.random.default_rng(seed)
    for n in range(2, min(n_max, 10) + 1):
        K = chains.exact_kernel(n)
        out.append(("detailed_balance", n, chains.check_detailed_balance(K)))
        out.append(("stationarity", n, chains.stationarity_violation(K)))
    for n in range(2, min(n_max, 8) + 1):
        table = spectral.character_table(n)
        worst = Fraction(0)
        for lam in table.index:
            for mu in table.index:
                ip = spectral.inner_product(table.row(lam), table.row(mu), n)
                worst = max(worst, abs(ip - (1 if lam == mu else 0)))
        out.append(("orthonormality", n, worst))
        out.append(("eigenrelation", n, spectral.verify_eigenrelation(n)))
        index = table.index
        K = chains.exact_kernel(n)
        worst = Fraction(0)
        for _ in range(pairs):
            w = gen.integers(0, 4, len(index))
            w[gen.integers(len(index))] += 1
            mu0 = chains.ExactDistribution(n, index, tuple(Fraction(int(x), int(w.sum())) for x in w))
            subset = [lam for lam, b in zip(index, gen.random(len(index)) < 0.5) if b]
            k = int(gen.integers(0, 21))
            lhs = spectral.spectral_event_probability(mu0, subset, k)
            rhs = chains.k_step_distribution(mu0, K, k).mass(subset)
            worst = max(worst, abs(lhs - rhs))
        out.append(("oracle_equivalence", n, worst))
    for n in range(2, min(n_max, 30) + 1):
        bad = sum(abs(spectral.eigenvalue((i,) + (1,) * (n - i)) - spectral.hook_eigenvalue(i, n))
                  for i in range(1, n + 1))
        out.append(("hook_eigenvalues", n, bad))
    return out


def cmd_verify(args):
    checks = verify_checks(args.n if args.n else 8, seed=args.seed)
    rows = [[name, n, _frac(Fraction(v)), "ok" if v == 0 else "FAIL"] for name, n, v in checks]
    t = Table(["check", "n", "value", "status"], rows)
    t.failed = any(v != 0 for _, _, v in checks)
    return t


# ---------------------------------------------------------------------------
# Argument handling


COMMANDS = {
    "simulate-ccf": (cmd_simulate_ccf, "run CCF replicas from a GEM draw or --start masses"),
    "simulate-dcf": (cmd_simulate_dcf, "DCF k-step frequencies (or the exact law with --exact)"),
    "couple": (cmd_couple, "coupled CCF/DCF trajectories: per-step rho, e, l1 gap"),
    "spectrum": (cmd_spectrum, "eigenvalues theta_lam for every partition of n"),
    "characters": (cmd_characters, "full character table (n <= 10)"),
    "delta-c": (cmd_delta_c, "exact Delta_C(k) series for a cylinder set"),
    "return-prob": (cmd_return_prob, "P(X(2k) = (n) | X(0) = (n)) for k = 1..steps"),
    "moments": (cmd_moments, "PD(1) Monte Carlo means of sum p_i^alpha"),
    "verify": (cmd_verify, "exact invariant suite; exit 0 iff all checks pass"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=8)
    common.add_argument("--steps", type=int, default=10)
    common.add_argument("--replicas", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--alpha", type=_floats, default=None, help="comma-separated exponents")
    common.add_argument("--cylinder", default=None, help="a1,b1;a2,b2;...")
    common.add_argument("--start", default=None,
                        help="initial state: integer parts (DCF) or masses (CCF), comma-separated")
    common.add_argument("--epsilon-trunc", type=float, default=DEFAULT_EPS_TRUNC)
    common.add_argument("--exact", action="store_true")
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--config", default=None, help="flat key = value file; flags win")

    parser = argparse.ArgumentParser(prog="splitmerge", description="Split-merge chains on partitions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (fn, helptext) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.set_defaults(handler=fn)
    return parser


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, quotes are stripped."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value.strip("\"'")
    return out


def _apply_config(parser, argv, args):
    """Re-parse with the config file's values as defaults, so flags still win."""
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        if key in _NOT_CONFIG or key == "command" or key not in known:
            raise UsageError(f"unknown config key {key!r}")
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            defaults[key] = action.type(value)
        else:
            defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def config_dict(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            args = _apply_config(parser, argv, args)
        if args.exact and args.n > DEFAULT_EXACT_CAP:
            raise CapacityError(f"exact mode supports n <= {DEFAULT_EXACT_CAP}, got {args.n}")
        table = args.handler(args)
        config = config_dict(args)
        _write(table.render(args.format, config), args.out)
        if table.extra and args.format == "csv" and args.out not in (None, "-"):
            # CSV cannot hold the per-replica summary; it goes to a sidecar file
            _write(json.dumps({"config": config, **table.extra}) + "\n", args.out + ".summary.json")
    except CapacityError as exc:
        print(f"splitmerge: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (UsageError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"splitmerge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"splitmerge: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_FAIL if getattr(table, "failed", False) else EXIT_OK
