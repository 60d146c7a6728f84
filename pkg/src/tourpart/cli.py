"""Command-line entry point: ``tourpart <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bounds as B
from .complete import PartitionCertificate, partition_tournament
from .errors import PreconditionError, StageFailure, TournamentError
from .generators import Exhausted, random_k_connected, random_tournament, rotational_tournament
from .oracle import LimitExceeded, bruteforce_partition, threshold_experiment
from .profile import load_profile
from .tournament import connectivity, format_trn, is_k_connected, read_trn

VERSION = 1


class CliError(Exception):
    def __init__(self, kind: str, detail):
        super().__init__(kind)
        self.kind = kind
        self.detail = detail


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("invalid-arguments", message)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_gen(a) -> int:
    if a.model == "uniform":
        T = random_tournament(a.n, a.seed)
    elif a.model == "rotational":
        T = rotational_tournament(a.n)
    else:
        if a.k is None:
            raise CliError("invalid-arguments", "--k is required for the kconn model")
        T = random_k_connected(a.n, a.k, a.seed, a.max_tries)
    _emit(format_trn(T), a.output)
    return 0


def cmd_conn(a) -> int:
    T = read_trn(a.file)
    if a.k is None:
        out = {"version": VERSION, "n": T.n, "connectivity": connectivity(T)}
        sys.stdout.write(_dump(out))
        return 0
    res = is_k_connected(T, a.k)
    out = {"version": VERSION, "n": T.n, "k": a.k, "k_connected": res.ok}
    if a.witness:
        out["witness"] = res.witness.to_dict() if res.witness else None
    sys.stdout.write(_dump(out))
    return 0


def cmd_partition(a) -> int:
    profile = load_profile(a.profile)
    if profile.paper_faithful:
        raise CliError(
            "infeasible-profile",
            f"profile {profile.name!r} needs n > 2*sigma1*k*t = {2 * profile.gadget_count(a.k, a.t)} vertices",
        )
    T = read_trn(a.file)
    try:
        cert = partition_tournament(T, a.k, a.t, profile, a.seed, a.max_rounds)
    except StageFailure as exc:
        sys.stderr.write(_dump({"version": VERSION, "error": "stage-failure", "detail": exc.to_dict()}))
        return 3
    _emit(cert.to_json(), a.output)
    return 0


def cmd_verify(a) -> int:
    cert = PartitionCertificate.from_json(Path(a.certificate).read_text(encoding="utf-8"))
    T = read_trn(a.file)
    report = cert.verify(T)
    out = {"version": VERSION, **report.to_dict()}
    sys.stdout.write(_dump(out))
    return 0 if report.valid else 1


def cmd_oracle(a) -> int:
    T = read_trn(a.file)
    res = bruteforce_partition(T, a.k, a.t, a.budget)
    sys.stdout.write(_dump(res.to_dict()))
    return 0 if res.status in ("found", "none") else 3


def cmd_experiment(a) -> int:
    table = threshold_experiment(
        a.n, a.k, a.t, a.seeds, a.budget, a.mode, record_timing=a.timing, first_seed=a.first_seed
    )
    _emit(table.to_csv(), a.output)
    return 0


def cmd_bounds(a) -> int:
    if a.kind == "hoeffding":
        res = B.hoeffding_bound(a.eta1, a.eta2, a.ell)
    elif a.kind == "markov":
        res = B.markov_bound(a.eta, a.r)
    else:
        res = B.chernoff_bound(a.mu, a.delta, a.tail)
    out = res.to_dict()
    if out["log_bound"] == float("-inf"):
        out["log_bound"] = None
    sys.stdout.write(_dump(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tourpart", description="Tournament connectivity and partition toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a tournament")
    g.add_argument("--model", choices=["uniform", "rotational", "kconn"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-tries", type=int, default=1000)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("conn", help="connectivity or a k-connectivity test")
    c.add_argument("file")
    c.add_argument("--k", type=int)
    c.add_argument("--witness", action="store_true")
    c.set_defaults(func=cmd_conn)

    q = sub.add_parser("partition", help="run the partition pipeline")
    q.add_argument("file")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--t", type=int, required=True)
    q.add_argument("--profile", default="desk")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--max-rounds", type=int, default=64)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_partition)

    v = sub.add_parser("verify", help="check a partition certificate")
    v.add_argument("certificate")
    v.add_argument("file")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exhaustive partition search")
    o.add_argument("file")
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--t", type=int, required=True)
    o.add_argument("--budget", type=float, default=60_000, help="milliseconds")
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("experiment", help="success table over seeded random tournaments")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--t", type=int, required=True)
    e.add_argument("--seeds", type=int, required=True)
    e.add_argument("--first-seed", type=int, default=0)
    e.add_argument("--mode", choices=["exact", "pipeline"], default="exact")
    e.add_argument("--budget", type=float, default=60_000)
    e.add_argument("--timing", action="store_true", help="record elapsed_ms (not reproducible)")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_experiment)

    b = sub.add_parser("bounds", help="concentration bounds")
    bs = b.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    h = bs.add_parser("hoeffding")
    h.add_argument("--eta1", type=float, required=True)
    h.add_argument("--eta2", type=float, required=True)
    h.add_argument("--ell", type=float, default=1.0)
    m = bs.add_parser("markov")
    m.add_argument("--eta", type=float, required=True)
    m.add_argument("--r", type=int, required=True)
    ch = bs.add_parser("chernoff")
    ch.add_argument("--mu", type=float, required=True)
    ch.add_argument("--delta", type=float, required=True)
    ch.add_argument("--tail", choices=["lower", "upper"], required=True)
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        kind, detail = exc.kind, exc.detail
    except TournamentError as exc:
        kind, detail = exc.kind, str(exc)
    except PreconditionError as exc:
        kind, detail = exc.kind, str(exc)
    except (Exhausted, LimitExceeded) as exc:
        kind, detail = type(exc).__name__.lower(), str(exc)
    except json.JSONDecodeError as exc:
        kind, detail = "malformed-json", str(exc)
    except OSError as exc:
        kind, detail = "io-error", str(exc)
    except ValueError as exc:
        kind, detail = "invalid-input", str(exc)
    sys.stderr.write(_dump({"version": VERSION, "error": kind, "detail": detail}))
    return 1 if kind != "invalid-arguments" else 2


if __name__ == "__main__":
    sys.exit(main())
