"""Command line: solve, verify, gen, fixtures, bench.

Exit codes: 0 found / property holds, 1 NoSNE / property fails,
3 Unknown (time or iteration limit), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from .game import (Game, GameFormatError, Profile, ShapeError, _fraction_to_json,
                   parse_game, parse_profile, serialize_game, to_fraction)
from .generator import FIXTURES, GenSpec, GenSpecError, certify, fixture, generate
from .pareto import verify_strong_pareto, verify_weak_pareto
from .search import SearchConfig, SearchStatus, find_sne
from .verify import check_ne, enumerate_nes, verify_sne

SCHEMA = 1
EXIT = {SearchStatus.FOUND: 0, SearchStatus.NONE: 1, SearchStatus.UNKNOWN: 3}
EXIT_ERROR = 2
OUTCOME_CODE = {SearchStatus.FOUND: "Y", SearchStatus.NONE: "N", SearchStatus.UNKNOWN: "Unknown"}
CSV_COLUMNS = ["instance", "mode", "algorithm", "outcome", "sne_kind", "time_s",
               "iterations", "oracle_calls", "verify_share"]
AGG_COLUMNS = ["class", "Y_pct", "mY_pct", "omY_pct", "time_mean", "time_Y", "time_N"]
ENUM_LIMIT = 12


class CliError(Exception):
    pass


def _num(f) -> object:
    return _fraction_to_json(Fraction(f))


def _eps(text: str) -> Fraction:
    try:
        e = to_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad epsilon {text!r}") from exc
    if e < 0:
        raise argparse.ArgumentTypeError("epsilon must be non-negative")
    return e


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("STRONGNASH_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(f"STRONGNASH_SEED must be an integer, got {env!r}")


def _read_game(path: str) -> Game:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}")
    return parse_game(data)


def _emit(obj: dict) -> None:
    print(json.dumps({"schema": SCHEMA, **obj}, indent=1))


# ------------------------------------------------------------------- solve

def cmd_solve(args) -> int:
    game = _read_game(args.game)
    if game.n_agents != 2:
        raise CliError(f"solve needs a two-agent game, got {game.n_agents} agents")
    cfg = SearchConfig(algorithm=args.algorithm, mode=args.mode, backend=args.oracle,
                       eps=args.eps, seed=_seed(args), time_limit=args.timeout)
    t0 = time.monotonic()
    out = find_sne(game, cfg)
    elapsed = time.monotonic() - t0
    if args.format == "json":
        _emit({
            "command": "solve",
            "status": out.status.value,
            "profile": None if out.profile is None else out.profile.to_json_obj()["strategies"],
            "values": None if out.values is None else [_num(v) for v in out.values],
            "sne_kind": out.sne_kind,
            "time_s": round(elapsed, 6),
            "trace": out.trace.to_json_obj(),
        })
    else:
        print(out.status.value)
        if out.profile is not None:
            for i, s in enumerate(out.profile.strategies, 1):
                print(f"  agent {i}: " + " ".join(str(p) for p in s))
            print("  values: " + ", ".join(str(v) for v in out.values))
        t = out.trace
        print(f"  iterations {t.iterations}, oracle calls {t.oracle_calls}, "
              f"{elapsed:.3f}s, verification share {t.verify_share:.0%}")
        if not t.exhaustive:
            print("  note: oracle ran on balanced supports only; NoSNE is not a proof")
    return EXIT[out.status]


# ------------------------------------------------------------------ verify

def cmd_verify(args) -> int:
    game = _read_game(args.game)
    try:
        x = parse_profile(Path(args.profile).read_bytes(), game)
    except OSError as exc:
        raise CliError(f"cannot read {args.profile}: {exc.strerror}")
    report = {"command": "verify", "what": args.what, "eps": _num(args.eps)}
    if args.what == "ne":
        chk = check_ne(game, x)
        holds = all(r <= args.eps for r in chk.regrets)
        report.update(verdict="IsNE" if holds else "NotNE",
                      regrets=[_num(r) for r in chk.regrets])
    elif args.what in ("pareto-weak", "pareto-strong"):
        if args.what == "pareto-weak":
            res = verify_weak_pareto(game, x, args.eps)
        else:
            if args.eps:
                raise CliError("--eps applies to ne, pareto-weak and sne only")
            res = verify_strong_pareto(game, x)
        holds = res.efficient
        report.update(verdict=res.verdict, certified=res.certified)
        if res.witness is not None:
            report["witness"] = res.witness.to_json_obj()["strategies"]
            report["gains"] = [_num(g) for g in res.gains]
    else:
        res = verify_sne(game, x, args.eps)
        holds = res.is_sne
        report.update(verdict=res.verdict, certified=res.certified)
        if res.coalition is not None:
            report["coalition"] = [i + 1 for i in res.coalition]  # agents numbered from 1
            report["witness"] = res.witness.to_json_obj()["strategies"]
            report["gains"] = [_num(g) for g in res.gains]
    report["holds"] = holds
    _emit(report)
    return 0 if holds else 1


# --------------------------------------------------------------------- gen

def _cert_path(out: Path) -> Path:
    return out.with_name(out.stem + ".cert.json")


def cmd_gen(args) -> int:
    spec = GenSpec(args.m, args.supp, args.decoys, _seed(args), args.high_share)
    game, cert = generate(spec)
    if args.check:
        cert = certify(game, cert, ENUM_LIMIT)
    out = Path(args.out or f"game_m{spec.m}_s{spec.supp}_d{spec.decoys}_seed{spec.seed}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(serialize_game(game))
    _cert_path(out).write_bytes(cert.to_bytes())
    sne = "none" if cert.sne is None else f"support size {len(cert.sne.supports()[0])}"
    print(f"wrote {out} and {_cert_path(out)}")
    print(f"  planted SNE: {sne}; decoy NEs: {len(cert.decoys)}; "
          f"uniqueness {'verified' if cert.uniqueness_verified else 'unverified'}")
    return 0


def cmd_fixtures(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in FIXTURES:
        (out / f"{name}.json").write_bytes(serialize_game(fixture(name)))
        print(out / f"{name}.json")
    return 0


# ------------------------------------------------------------------- bench

def parse_grid(text: str) -> dict:
    """``"m=10..20:5,supp=0|2,decoys=0,n=3"`` -> lists per key.

    ``a..b`` is inclusive with step 1 unless ``:step`` is given; ``|``
    separates alternatives. ``n`` is the number of instances per class.
    """
    grid = {"m": None, "supp": [0], "decoys": [0], "n": [1]}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in grid:
            raise CliError(f"bad grid item {part!r}; keys are m, supp, decoys, n")
        vals = []
        try:
            for alt in val.split("|"):
                if ".." in alt:
                    rng, _, step = alt.partition(":")
                    a, b = rng.split("..")
                    vals.extend(range(int(a), int(b) + 1, int(step or 1)))
                else:
                    vals.append(int(alt))
        except ValueError:
            raise CliError(f"bad grid values {val!r}")
        grid[key] = vals
    if grid["m"] is None:
        raise CliError("grid needs m")
    return grid


def _instance_seed(base: int, *parts: int) -> int:
    return int(np.random.SeedSequence([base, *parts]).generate_state(1, np.uint64)[0])


def _grid_instances(grid, base_seed):
    for m in grid["m"]:
        for supp in grid["supp"]:
            for d in grid["decoys"]:
                cls = f"m={m};supp={supp};decoys={d}"
                for k in range(grid["n"][0]):
                    seed = _instance_seed(base_seed, m, supp, d, k)
                    game, _ = generate(GenSpec(m, supp, d, seed))
                    yield f"{cls};k={k}", cls, serialize_game(game)


def _dir_instances(path: Path):
    files = sorted(p for p in path.glob("*.json") if not p.name.endswith(".cert.json"))
    if not files:
        raise CliError(f"no game files in {path}")
    for p in files:
        data = p.read_bytes()
        parse_game(data)  # fail early on bad files
        yield p.stem, path.name or "dir", data


def _sne_profile_kinds(game: Game):
    """(has mixed SNE, has only mixed SNEs) over the enumerated equilibria."""
    kinds = [e.is_pure() for e in enumerate_nes(game) if verify_sne(game, e).is_sne]
    return any(not k for k in kinds), bool(kinds) and not any(kinds)


def _bench_instance(job):
    name, data, modes, algorithm, oracle, timeout, repeats, seed = job
    game = parse_game(data)
    rows = []
    for mode in modes:
        runs = []
        for r in range(repeats):
            cfg = SearchConfig(algorithm=algorithm, mode=mode, backend=oracle,
                               seed=seed + r, time_limit=timeout)
            t0 = time.monotonic()
            out = find_sne(game, cfg)
            runs.append((time.monotonic() - t0, out))
        status = runs[0][1].status
        if any(o.status is not status for _, o in runs):
            status = SearchStatus.UNKNOWN  # repeats disagree; should not happen
        _, out = runs[0]
        rows.append({
            "instance": name, "mode": mode, "algorithm": algorithm,
            "outcome": OUTCOME_CODE[status], "sne_kind": out.sne_kind or "",
            "time_s": statistics.median(t for t, _ in runs),
            "iterations": out.trace.iterations, "oracle_calls": out.trace.oracle_calls,
            "verify_share": out.trace.verify_share,
        })
    kinds = _sne_profile_kinds(game) if max(game.actions) <= ENUM_LIMIT else None
    return rows, kinds


def _pct(flags):
    return f"{100.0 * sum(flags) / len(flags):.1f}" if flags else "n/a"


def _mean(xs):
    return f"{statistics.fmean(xs):.4f}" if xs else "n/a"


def aggregate(rows: list[dict], kinds: dict) -> list[dict]:
    """Aggregate rows per (class, mode), computed from the run rows only."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["class"], r["mode"], r["algorithm"]), []).append(r)
    out = []
    for (cls, mode, alg), rs in groups.items():
        ks = [kinds.get(r["instance"]) for r in rs]
        known = None not in ks
        times = [float(r["time_s"]) for r in rs]
        out.append({
            "instance": "*", "mode": mode, "algorithm": alg, "class": cls,
            "Y_pct": _pct([r["outcome"] == "Y" for r in rs]),
            "mY_pct": _pct([k[0] for k in ks]) if known else "n/a",
            "omY_pct": _pct([k[1] for k in ks]) if known else "n/a",
            "time_mean": _mean(times),
            "time_Y": _mean([float(r["time_s"]) for r in rs if r["outcome"] == "Y"]),
            "time_N": _mean([float(r["time_s"]) for r in rs if r["outcome"] == "N"]),
        })
    return out


def cmd_bench(args) -> int:
    base = _seed(args)
    modes = sorted({int(m) for m in args.modes.split(",")})
    if any(m not in (0, 1, 2, 3) for m in modes):
        raise CliError("--modes takes values in 0..3")
    if args.repeats < 1 or args.jobs < 1:
        raise CliError("--repeats and --jobs must be positive")
    if args.dir:
        instances = list(_dir_instances(Path(args.dir)))
    else:
        instances = list(_grid_instances(parse_grid(args.gen_grid), base))
    classes = {name: cls for name, cls, _ in instances}
    jobs = [(name, data, modes, args.algorithm, args.oracle, args.timeout, args.repeats, base)
            for name, _, data in instances]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_bench_instance, jobs))  # map keeps input order
    else:
        results = [_bench_instance(j) for j in jobs]
    rows, kinds = [], {}
    for (name, _, _), (rs, k) in zip(instances, results):
        kinds[name] = k
        for r in rs:
            r["class"] = classes[name]
            r["time_s"] = f"{r['time_s']:.4f}"
            r["verify_share"] = f"{r['verify_share']:.4f}"
            rows.append(r)
    aggs = aggregate(rows, kinds)
    if args.omit_times:
        for r in rows:
            r["time_s"] = r["verify_share"] = "-"
        for a in aggs:
            a.update(time_mean="-", time_Y="-", time_N="-")
    buf = io.StringIO()
    w = csv.DictWriter(buf, CSV_COLUMNS + AGG_COLUMNS, restval="", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    w.writerows(aggs)
    if args.csv:
        Path(args.csv).write_text(buf.getvalue())
        print(f"wrote {len(rows)} runs and {len(aggs)} aggregate rows to {args.csv}")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strongnash",
                                description="Strong Nash equilibria of normal-form games.")
    sub = p.add_subparsers(dest="command", required=True)

    def search_flags(sp):
        sp.add_argument("--algorithm", choices=["spatial", "iterated"], default="iterated")
        sp.add_argument("--oracle", choices=["support", "milp"], default="support")
        sp.add_argument("--timeout", type=float, default=300.0, help="seconds per solve")
        sp.add_argument("--seed", type=int, default=None,
                        help="random seed (default: $STRONGNASH_SEED, else 0)")

    s = sub.add_parser("solve", help="find a strong NE of a two-agent game")
    s.add_argument("game")
    search_flags(s)
    s.add_argument("--mode", type=int, choices=[0, 1, 2, 3], default=1)
    s.add_argument("--eps", type=_eps, default=Fraction(0))
    s.add_argument("--format", choices=["json", "text"], default="json")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a profile against a game")
    v.add_argument("game")
    v.add_argument("profile")
    v.add_argument("--what", choices=["ne", "pareto-weak", "pareto-strong", "sne"],
                   default="sne")
    v.add_argument("--eps", type=_eps, default=Fraction(0))
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", help="generate an instance with a planted mixed SNE")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--supp", type=int, required=True)
    g.add_argument("--decoys", type=int, default=0)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--high-share", type=float, default=0.5,
                   help="fraction of decoys with welfare above the planted SNE")
    g.add_argument("--out", default=None, help="game file; the certificate goes next to it")
    g.add_argument("--check", action="store_true",
                   help=f"re-verify the certificate (full enumeration when m <= {ENUM_LIMIT})")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fixtures", help="write the four worked-example games")
    f.add_argument("--out", default="fixtures")
    f.set_defaults(func=cmd_fixtures)

    b = sub.add_parser("bench", help="run a benchmark and write a CSV report")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--dir")
    src.add_argument("--gen-grid", metavar="SPEC",
                     help='e.g. "m=10..20:10,supp=0|2,decoys=0,n=3"')
    search_flags(b)
    b.add_argument("--modes", default="0,1,2,3")
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--csv", default=None)
    b.add_argument("--omit-times", action="store_true",
                   help="write '-' for timing-derived columns so reruns are byte-identical")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, GameFormatError, ShapeError, GenSpecError, ValueError) as exc:
        print(f"strongnash {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
