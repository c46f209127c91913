"""Command-line entry point: ``sicfree <subcommand> ...``.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 runtime or solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .channel import read_channel_csv, successive_projection_order
from .coefficients import STRATEGIES, generate, read_matrix_csv, validate_decodability, write_matrix_csv
from .combinatorics import enumerate_multicast_groups
from .errors import ConfigError, InvalidParametersError, SicFreeError
from .harness import emit_csv, load_config, run_sweep

EXIT_OK, EXIT_INVALID, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _serving_set(k: int, l: int, t: int) -> tuple[int, ...]:
    if t < 0 or l < 1 or k != t + l:
        raise ConfigError(f"a single coefficient matrix needs k = t + l, got k={k}, l={l}, t={t}")
    return tuple(range(1, k + 1))


def _parse_priority(text):
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"bad priority {text!r}; expected comma-separated user ids") from None


def cmd_gen_matrix(args) -> int:
    index = enumerate_multicast_groups(_serving_set(args.k, args.l, args.t), args.t)
    A = generate(args.strategy, index, priority=_parse_priority(args.priority), seed=args.seed, q=args.q)
    write_matrix_csv(A, args.out)
    print(f"wrote {A.delta}x{index.n_groups} {A.strategy} matrix to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    A = read_matrix_csv(args.matrix, _serving_set(args.k, args.l, args.t), args.t)
    report = validate_decodability(A)
    for k in A.index.serving_set:
        print(f"user {k}: |det A_k| = {report.determinants[k]:.6g}, cond = {report.condition_numbers[k]:.6g}")
    print("decodable" if report.passed else f"NOT decodable: users {report.failing_users()}")
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_order_users(args) -> int:
    ordering = successive_projection_order(read_channel_csv(args.channels), reverse=not args.no_reverse)
    print("order: " + ",".join(map(str, ordering.order)))
    print("residuals: " + ",".join(f"{r:.6g}" for r in ordering.residuals))
    print("priority: " + ",".join(map(str, ordering.priority_for_sparse)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    result = run_sweep(cfg, trace_dir=args.sca_trace)
    emit_csv(result, args.out)
    print(f"wrote {len(result.rows)} rows to {args.out} ({len(result.failures)} failed draws)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sicfree", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-matrix", help="emit a coefficient matrix as CSV")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--l", type=int, required=True)
    g.add_argument("--t", type=int, required=True)
    g.add_argument("--strategy", choices=STRATEGIES, default="sparse")
    g.add_argument("--priority", help="comma-separated user ids (sparse only)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--q", type=int, default=17, help="alphabet size for the random strategy")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_matrix)

    v = sub.add_parser("validate", help="check decodability of a coefficient matrix CSV")
    v.add_argument("--matrix", required=True)
    v.add_argument("--k", type=int, required=True)
    v.add_argument("--l", type=int, required=True)
    v.add_argument("--t", type=int, required=True)
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("order-users", help="successive-projection ordering of a channel CSV")
    o.add_argument("--channels", required=True)
    o.add_argument("--no-reverse", action="store_true", help="use the projection order itself as priority")
    o.set_defaults(func=cmd_order_users)

    s = sub.add_parser("sweep", help="run a Monte Carlo SNR sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--sca-trace", metavar="DIR", help="write per-run SCA traces here")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidParametersError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SicFreeError, np.linalg.LinAlgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
