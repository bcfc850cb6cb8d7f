"""``dpbloom`` command line: build, privatize, query, calibrate, experiment.

Exit codes: 0 on success, 1 on a domain error (bad parameters, refused
operation, calibration failure), 2 on an I/O or file-format error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import fileformat
from .analysis import (
    fpr_exact,
    privacy_audit,
    run_fpr_experiment,
    run_utility_experiment,
    run_wdist_experiment,
)
from .calibration import dist_W, quantile_N
from .config import ExperimentConfig, load_config
from .errors import DomainError, FileFormatError
from .filter import MAX_U64, FilterParams, bloom_init
from .hashing import token_to_element
from .mechanism import PrivateBloomFilter, derive_budget, privatize

log = logging.getLogger("dpbloom")

EXIT_DOMAIN = 1
EXIT_IO = 2

HEADERS = {
    "fpr": ["m", "k", "A", "fpr_exact", "fpr_emp", "ci"],
    "utility": ["m", "k", "A", "alpha", "eps", "delta", "N", "eps0", "bound_D4", "acc_emp", "ci"],
    "wdist": ["w", "analytic", "empirical", "tv_running"],
    "audit": ["bit_class", "log_ratio", "band", "pass"],
    "calibrate": ["w", "pmf", "cdf"],
}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_token(token: str, n: int, hash_tokens: bool, lineno: int) -> int:
    try:
        x = int(token, 10)
    except ValueError:
        if hash_tokens:
            return token_to_element(token, n)
        raise DomainError(f"line {lineno}: cannot parse {token!r} as an unsigned integer") from None
    if not 0 <= x < n:
        raise DomainError(f"line {lineno}: element {x} outside universe [0, {n})")
    return x


def read_dataset(path: Path, n: int, hash_tokens: bool) -> list[int]:
    out = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        token = line.strip()
        if token:
            out.append(parse_token(token, n, hash_tokens, lineno))
    return out


def cmd_build(args, out) -> int:
    params = FilterParams(args.m, args.k, args.n, args.seed)
    f = bloom_init(read_dataset(Path(args.dataset), args.n, args.hash_tokens), params)
    fileformat.save(f, args.out)
    print(f"m={params.m} k={params.k} A={f.inserted_count} "
          f"load={f.popcount() / params.m:.6f} fpr_exact={fpr_exact(params.m, params.k, f.inserted_count):.6g}", file=out)
    return 0


def cmd_privatize(args, out) -> int:
    f = fileformat.load(args.filter)
    if isinstance(f, PrivateBloomFilter):
        raise DomainError(
            "input filter is already privatized; flipping it again changes the "
            "effective epsilon, which the calibrated guarantee does not cover"
        )
    if f.inserted_count < 1:
        raise DomainError("cannot calibrate a budget for an empty filter")
    p = f.params
    budget = derive_budget(args.epsilon, args.delta, p.m, p.k, f.inserted_count)
    pf = privatize(f, budget, args.seed)
    fileformat.save(pf, args.out)
    print(f"N={budget.N} epsilon0={budget.epsilon0!r}", file=out)
    return 0


def cmd_query(args, out) -> int:
    f = fileformat.load(args.filter)
    n = f.params.n
    if args.value is not None:
        lines = [args.value]
    else:
        lines = Path(args.queries).read_text().splitlines()
    total = positives = 0
    for lineno, line in enumerate(lines, 1):
        token = line.strip()
        if not token:
            continue
        try:
            y = parse_token(token, n, args.hash_tokens, lineno)
        except DomainError as exc:
            print(f"error: {exc}", file=sys.stderr)
            continue
        hit = f.query(y)
        total += 1
        positives += hit
        print(f"{token},{int(hit)}", file=out)
    rate = positives / total if total else 0.0
    print(f"# queries={total} positives={positives} positive_rate={rate!r}", file=out)
    return 0


def write_calibration(out, m: int, k: int, dataset_size: int, delta: float) -> None:
    dist = dist_W(m, k, dataset_size)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADERS["calibrate"])
    for w, (p, c) in enumerate(zip(dist.pmf, dist.cdf)):
        writer.writerow([w, _fmt(float(p)), _fmt(float(c))])
    out.write(f"# N={quantile_N(dist, delta)} p0={dist.p0!r} m={m} k={k} A={dataset_size} delta={delta!r}\n")


def cmd_calibrate(args, out) -> int:
    buf = io.StringIO()
    write_calibration(buf, args.m, args.k, args.dataset_size, args.delta)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return 0


def _grid(cfg: ExperimentConfig):
    for m in cfg.m:
        for k in cfg.k:
            for a in cfg.dataset_size:
                yield m, k, a


def run_experiment(cfg: ExperimentConfig, out) -> int:
    """Write the CSV for ``cfg`` to ``out``; returns the number of failed points."""
    writer = csv.writer(out, lineterminator="\n")
    if cfg.kind != "calibrate":
        writer.writerow(HEADERS[cfg.kind])
    failures = 0
    for m, k, a in _grid(cfg):
        try:
            if cfg.kind == "fpr":
                r = run_fpr_experiment(m, k, a, cfg.query_count, cfg.trials, cfg.seed, cfg.universe)
                writer.writerow([m, k, a, _fmt(r.fpr_exact), _fmt(r.fpr.value), _fmt(3 * r.sigma_model)])
            elif cfg.kind == "utility":
                for eps in cfg.epsilon:
                    for delta in cfg.delta:
                        for alpha in cfg.alpha:
                            r = run_utility_experiment(m, k, a, alpha, eps, delta, cfg.query_count,
                                                       cfg.trials, cfg.seed, cfg.universe)
                            writer.writerow([m, k, a, _fmt(alpha), _fmt(eps), _fmt(delta), r.N, _fmt(r.epsilon0),
                                             _fmt(r.bound_private), _fmt(r.accuracy_private.value),
                                             _fmt(4 * r.accuracy_private.sigma)])
            elif cfg.kind == "wdist":
                r = run_wdist_experiment(m, k, a, cfg.trials, cfg.seed, cfg.universe)
                out.write(f"# m={m} k={k} A={a} trials={cfg.trials}\n")
                for w, (pa, pe, tv) in enumerate(zip(r.analytic, r.empirical, r.tv_running)):
                    writer.writerow([w, _fmt(float(pa)), _fmt(float(pe)), _fmt(float(tv))])
            elif cfg.kind == "audit":
                for eps0 in cfg.epsilon0:
                    for delta in cfg.delta:
                        rep = privacy_audit(m, k, a, eps0, cfg.trials, cfg.seed, delta=delta, n=cfg.universe)
                        out.write(f"# m={m} k={k} A={a} eps0={eps0!r} delta={delta!r} trials={cfg.trials}\n")
                        if rep.inconclusive:
                            out.write("# inconclusive: neighboring arrays never differed\n")
                            failures += 1
                        for row in rep.rows:
                            writer.writerow([row.bit_class, _fmt(row.log_ratio), _fmt(row.band), _fmt(row.passed)])
                        t = rep.tail
                        if t is not None:
                            out.write(f"# tail N={t.N} epsilon={t.epsilon!r} exceed_rate={t.exceed_rate!r} "
                                      f"limit={t.delta + 3 * t.sigma!r} pass={_fmt(t.passed)}\n")
            else:
                for delta in cfg.delta:
                    write_calibration(out, m, k, a, delta)
        except DomainError as exc:
            log.error("grid point m=%s k=%s A=%s failed: %s", m, k, a, exc)
            failures += 1
    return failures


def cmd_experiment(args, out) -> int:
    cfg = load_config(args.config)
    target = args.out or cfg.output
    if target:
        with open(target, "w", newline="") as fh:
            failures = run_experiment(cfg, fh)
    else:
        failures = run_experiment(cfg, out)
    return EXIT_DOMAIN if failures else 0


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= MAX_U64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpbloom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a standard filter from a dataset file")
    p.add_argument("--dataset", required=True, help="newline-delimited elements")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=_u64, default=1 << 32, help="universe size (default 2^32)")
    p.add_argument("--seed", type=_u64, default=0, help="hash seed")
    p.add_argument("--hash-tokens", action="store_true", help="map non-numeric tokens into [0, n)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("privatize", help="apply randomized response to a built filter")
    p.add_argument("--filter", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=_u64, required=True, help="flip-pass RNG seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_privatize)

    p = sub.add_parser("query", help="query a filter file")
    p.add_argument("--filter", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--queries", help="newline-delimited query file")
    g.add_argument("--value", help="a single query value")
    p.add_argument("--hash-tokens", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("calibrate", help="write the W distribution and N as CSV")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dataset-size", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("experiment", help="run an experiment grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="overrides the config's output key")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None, out=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
