"""Command-line front end: ``altfolner <subcommand> [flags]``.

Tables go out as CSV (default) or as a JSON report with ``metadata``, ``rows``
and ``summary``.  Exit codes: 0 all checks pass, 1 a check failed, 2 usage
error, 3 resource bound exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .dp import decay_report, epsilon_sequence, mixed_brute_force
from .errors import ResourceLimitError
from .folner import (
    DEFAULT_EXACT_INDEX,
    FolnerSampler,
    brute_force_ratio,
    calibrate,
    cardinalities,
    closed_form_size,
    delta_sequence,
    folner_function_bound,
    is_interior,
    is_member,
    lemma_check,
    profile_from_json,
    profile_to_json,
    recognize_word,
    stream_rng,
)
from .mother import BElement, embedding_check, level_orbit
from .perm import Permutation
from .words import GroupWord, ValencySequence, level_size, parse_word

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
SEED_ENV = "ALTFOLNER_SEED"

SUBCOMMANDS = ("delta", "epsilon", "cardinality", "sample", "member", "lemma-check",
               "oracle", "folfun", "embed", "orbit", "decay")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "csv"

    def get(self, key, default=None):
        v = self.params.get(key)
        return default if v is None else v

    def need(self, key):
        v = self.params.get(key)
        if v is None:
            raise UsageError(f"{self.subcommand}: missing --{key.replace('_', '-')}")
        return v


@dataclass
class Report:
    metadata: dict
    columns: list
    rows: list
    summary: dict

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.summary["checks"])

    def to_json(self) -> str:
        return json.dumps({"metadata": self.metadata, "rows": self.rows, "summary": self.summary},
                          indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in self.columns})
        return buf.getvalue()


def rat(x) -> str | None:
    """``"num/den"`` for exact values, None for floats."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return f"{x}/1"
    return None


def num(x) -> str | None:
    return str(x.numerator) if isinstance(x, Fraction) else None


def den(x) -> str | None:
    return str(x.denominator) if isinstance(x, Fraction) else None


def fl(x) -> float:
    return float(x)


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name: str, ok: bool, witness=None, detail: str = ""):
        item = {"name": name, "pass": bool(ok)}
        if detail:
            item["detail"] = detail
        if not ok and witness is not None:
            item["witness"] = witness
        self.items.append(item)

    def summary(self) -> dict:
        return {"checks": self.items, "passed": all(c["pass"] for c in self.items)}


def _valency(cfg: RunConfig) -> ValencySequence:
    spec = cfg.params.get("valency")
    if spec is not None:
        if isinstance(spec, str):
            try:
                spec = json.loads(spec)
            except json.JSONDecodeError as exc:
                raise UsageError(f"--valency is not valid JSON: {exc}") from None
        try:
            return ValencySequence.from_config(spec)
        except (ValueError, TypeError, KeyError) as exc:
            raise UsageError(str(exc)) from None
    return ValencySequence.constant(_d(cfg))


def _d(cfg: RunConfig, lo: int = 2) -> int:
    d = int(cfg.need("d"))
    if d < lo:
        raise UsageError(f"--d must be >= {lo}")
    return d


def _nonneg(cfg: RunConfig, key: str, default=None) -> int:
    v = cfg.get(key, default)
    if v is None:
        raise UsageError(f"{cfg.subcommand}: missing --{key.replace('_', '-')}")
    v = int(v)
    if v < 0:
        raise UsageError(f"--{key.replace('_', '-')} must be >= 0")
    return v


def _seed(cfg: RunConfig) -> int:
    s = cfg.get("seed")
    if s is None:
        s = os.environ.get(SEED_ENV, "0")
    try:
        return int(s)
    except ValueError:
        raise UsageError(f"seed must be an integer, got {s!r}") from None


# --- subcommands -------------------------------------------------------------

def cmd_delta(cfg, checks):
    d = _d(cfg)
    k_max = _nonneg(cfg, "k_max", 10)
    ds = delta_sequence(d, k_max, exact_index=_nonneg(cfg, "exact_index", DEFAULT_EXACT_INDEX))
    rows = [{"k": k, "delta_num": num(x), "delta_den": den(x), "delta_float": fl(x)} for k, x in enumerate(ds.values)]
    checks.add("delta_0 = 1 - 1/d", ds[0] == 1 - Fraction(1, d))
    bad = next((k for k in range(1, len(ds)) if not ds[k] < ds[k - 1]), None)
    checks.add("delta strictly decreasing", bad is None, witness={"k": bad})
    return ["k", "delta_num", "delta_den", "delta_float"], rows


def cmd_epsilon(cfg, checks):
    val = _valency(cfg)
    K = _nonneg(cfg, "K", 10)
    tab = epsilon_sequence(val, K, exact_index=_nonneg(cfg, "exact_index", DEFAULT_EXACT_INDEX))
    rows = [{"k": k, "D": val.d(K - k), "eps": rat(x), "eps_float": fl(x)} for k, x in enumerate(tab.values)]
    checks.add("eps_0 = 1 - 1/d_K", tab[0] == 1 - Fraction(1, val.d(K)))
    bad = next((k for k in range(1, len(tab)) if not 0 < tab[k] < tab[k - 1]), None)
    checks.add("eps strictly decreasing in (0,1)", bad is None, witness={"k": bad})
    return ["k", "D", "eps", "eps_float"], rows


def cmd_cardinality(cfg, checks):
    d = _d(cfg, 3)
    k_max = _nonneg(cfg, "k_max", 6)
    counts = cardinalities(d, k_max)
    ds = delta_sequence(d, k_max)
    rows = []
    for k, c in enumerate(counts):
        r = c.interior_ratio()
        rows.append({"k": k, "total": str(c.total), "interior": str(c.interior), "boundary": str(c.boundary),
                     "digits": len(str(c.total)), "interior_ratio": rat(r), "interior_ratio_float": fl(r)})
        if isinstance(ds[k], Fraction):
            checks.add(f"k={k}: interior ratio = 1 - delta_k", r == 1 - ds[k],
                       witness={"k": k, "ratio": rat(r), "delta": rat(ds[k])})
        if k <= 5:
            checks.add(f"k={k}: |L_k| >= 2^(2^k)", c.total.bit_length() > 2 ** k, witness={"k": k})
        bound = closed_form_size(d, k)
        rows[-1]["closed_form_digits"] = len(str(bound))
        checks.add(f"k={k}: |L_k| <= closed form", c.total <= bound, witness={"k": k})
    return ["k", "total", "interior", "boundary", "digits", "closed_form_digits",
            "interior_ratio", "interior_ratio_float"], rows


def cmd_sample(cfg, checks):
    d = _d(cfg, 3)
    k = _nonneg(cfg, "k", 1)
    n = _nonneg(cfg, "n", 1000)
    seed = _seed(cfg)
    stratum = cfg.get("stratum", "member")
    jobs = int(cfg.get("jobs", 1))
    if stratum == "member":
        r = calibrate(d, k, n, seed, jobs=jobs)
        rows = [{"d": d, "k": k, "stratum": stratum, "n": n, "interior": r["interior"],
                 "fraction": r["fraction"], "expected": rat(r["expected"]),
                 "expected_float": fl(r["expected"]), "se": r["se"], "z": r["z"]}]
        checks.add("interior fraction within 4 SE of 1 - delta_k", abs(r["z"]) <= 4,
                   witness={"z": r["z"], "seed": seed})
    elif stratum in ("interior", "boundary"):
        sampler = FolnerSampler(d, k)
        rng = stream_rng(seed, 0)
        wrong = None
        hits = 0
        for i in range(n):
            p = sampler.sample(stratum, rng)
            ok = is_member(p) and is_interior(p) == (stratum == "interior")
            hits += ok
            if not ok and wrong is None:
                wrong = {"index": i, "profile": profile_to_json(p)}
        rows = [{"d": d, "k": k, "stratum": stratum, "n": n, "interior": hits if stratum == "interior" else n - hits,
                 "fraction": hits / n if n else 1.0}]
        checks.add(f"every sample is a {stratum} member", wrong is None, witness=wrong)
    else:
        raise UsageError(f"unknown stratum {stratum!r}")
    return ["d", "k", "stratum", "n", "interior", "fraction", "expected", "expected_float", "se", "z"], rows


def _read_json_arg(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _generator_table(d: int, spec: dict) -> dict:
    """Named generators: ``{"x": "(1 2 3)"}`` is rooted, ``{"y": {"a": [...], "rho": ...}}`` is in B."""
    table = {}
    for name, val in spec.items():
        if isinstance(val, str):
            table[name] = Permutation.from_cycles(val, d)
        else:
            b = BElement([Permutation.from_cycles(x, d) for x in val["a"]], Permutation.from_cycles(val["rho"], d))
            table[name] = b.to_spec()
    return table


def cmd_member(cfg, checks):
    if cfg.get("profile"):
        try:
            p = profile_from_json(_read_json_arg(cfg.get("profile")))
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"bad profile: {exc}") from None
        source = "profile"
    elif cfg.get("word"):
        d = _d(cfg, 5)
        k = _nonneg(cfg, "k", 0)
        gens = cfg.get("generators")
        if gens is None:
            raise UsageError("--word needs --generators (JSON file or object naming the letters)")
        if isinstance(gens, str):
            gens = _read_json_arg(gens) if os.path.exists(gens) else json.loads(gens)
        try:
            w = parse_word(cfg.get("word"), _generator_table(d, gens), ValencySequence.constant(d))
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"bad word: {exc}") from None
        p = recognize_word(w, k)
        source = "word"
        if p is None:
            rows = [{"source": source, "k": k, "member": False, "interior": None, "spine": None, "root_open_set": None}]
            checks.add("input parsed", True)
            return ["source", "k", "member", "interior", "spine", "root_open_set"], rows
    else:
        raise UsageError("member needs --profile or --word")
    member = is_member(p)
    rows = [{"source": source, "k": p.k, "member": member,
             "interior": is_interior(p) if member else None,
             "spine": " ".join(map(str, p.spine())),
             "root_open_set": " ".join(map(str, sorted(p.open_sets()[()])))}]
    checks.add("input parsed", True)
    return ["source", "k", "member", "interior", "spine", "root_open_set"], rows


def cmd_lemma_check(cfg, checks):
    d = _d(cfg, 3)
    k = _nonneg(cfg, "k", 1)
    n = _nonneg(cfg, "n", 1000)
    seed = _seed(cfg)
    r = lemma_check(d, k, n, seed, jobs=int(cfg.get("jobs", 1)))
    rows = [{"d": d, "k": k, "n": n, "interior_samples": r["interior_samples"],
             "invariant": name, "violations": v} for name, v in r["violations"].items()]
    for name, v in r["violations"].items():
        wit = next((w for w in r["witnesses"] if name in w["violated"]), None)
        checks.add(name, v == 0, witness=None if wit is None else dict(wit, k=k))
    return ["d", "k", "n", "interior_samples", "invariant", "violations"], rows


def cmd_oracle(cfg, checks):
    rows = []
    if cfg.get("valency") is not None:
        val = _valency(cfg)
        K = _nonneg(cfg, "K", 1)
        tab = epsilon_sequence(val, K)
        for k in range(K + 1):
            brute = mixed_brute_force(val, K, k)
            rec = 1 - tab[k]
            rows.append({"k": k, "degrees": " ".join(str(val.d(K - k + l)) for l in range(k + 1)),
                         "brute": rat(brute), "recursion": rat(rec), "match": brute == rec})
            checks.add(f"k={k}: brute force = 1 - eps_k^K", brute == rec,
                       witness={"k": k, "brute": rat(brute), "recursion": rat(rec)})
    else:
        d = _d(cfg)
        k_top = _nonneg(cfg, "k", 1)
        ds = delta_sequence(d, k_top)
        for k in range(k_top + 1):
            brute = brute_force_ratio(d, k)
            rec = 1 - ds[k]
            rows.append({"k": k, "degrees": " ".join([str(d)] * (k + 1)),
                         "brute": rat(brute), "recursion": rat(rec), "match": brute == rec})
            checks.add(f"k={k}: brute force = 1 - delta_k", brute == rec,
                       witness={"k": k, "brute": rat(brute), "recursion": rat(rec)})
    return ["k", "degrees", "brute", "recursion", "match"], rows


def cmd_folfun(cfg, checks):
    d = _d(cfg)
    ns = cfg.get("n") or [10, 100, 1000]
    if isinstance(ns, int):
        ns = [ns]
    rows = []
    for n in ns:
        n = int(n)
        if n < 1:
            raise UsageError("--n values must be >= 1")
        r = folner_function_bound(d, n)
        rows.append({"n": n, "k_star": r.k_star, "delta": rat(r.delta), "delta_float": fl(r.delta),
                     "log2_size": r.log2_size, "loglog2_size": r.loglog2_size,
                     "size": None if r.size is None else str(r.size)})
        checks.add(f"n={n}: delta_k* <= 1/n", r.delta <= Fraction(1, n))
    return ["n", "k_star", "delta", "delta_float", "log2_size", "loglog2_size", "size"], rows


def cmd_embed(cfg, checks):
    n = _nonneg(cfg, "n", 100)
    d = _d(cfg) if cfg.get("d") is not None else 3
    depth = _nonneg(cfg, "depth", 3)
    r = embedding_check(n, _seed(cfg), d=d, depth=depth)
    rows = [{"d": d, "depth": depth, "n": n, "invariant": name, "violations": v}
            for name, v in r["violations"].items()]
    for name, v in r["violations"].items():
        wit = next((w for w in r["witnesses"] if name in w["violated"]), None)
        checks.add(name, v == 0, witness=wit)
    return ["d", "depth", "n", "invariant", "violations"], rows


def cmd_orbit(cfg, checks):
    d = _d(cfg, 5)
    j_max = _nonneg(cfg, "j", 3)
    rows = []
    for j in range(1, j_max + 1):
        orb = level_orbit(d, j)
        size = level_size(ValencySequence.constant(d), j)
        rows.append({"j": j, "points": size, "orbit": len(orb), "transitive": len(orb) == size})
        missing = min(set(range(1, size + 1)) - orb, default=None)
        checks.add(f"level {j} transitive", len(orb) == size, witness={"j": j, "missing_point": missing})
    return ["j", "points", "orbit", "transitive"], rows


def cmd_decay(cfg, checks):
    val = _valency(cfg)
    K_max = _nonneg(cfg, "K_max", 1000)
    eta = cfg.get("eta")
    stride = max(1, int(cfg.get("stride", 1)))
    try:
        table = decay_report(val, K_max, None if eta is None else float(eta))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [{"K": r.K, "D": val.d(r.K), "eps": r.eps, "normalized": r.normalized}
            for r in table if r.K % stride == 0 or r.K == K_max]
    bad = next((r.K for r in table if not 0 < r.eps < 1), None)
    checks.add("eps_K^K in (0,1)", bad is None, witness={"K": bad})
    if val.is_periodic and len(val.period) == 1 and not val.prefix:
        ds = delta_sequence(val.period[0], K_max).floats()
        err = float(np.max(np.abs(ds - np.array([r.eps for r in table]))))
        checks.add("constant d: eps_K^K = delta_K", err <= 1e-12, witness={"max_abs_error": err})
    return ["K", "D", "eps", "normalized"], rows


HANDLERS = {
    "delta": cmd_delta, "epsilon": cmd_epsilon, "cardinality": cmd_cardinality, "sample": cmd_sample,
    "member": cmd_member, "lemma-check": cmd_lemma_check, "oracle": cmd_oracle, "folfun": cmd_folfun,
    "embed": cmd_embed, "orbit": cmd_orbit, "decay": cmd_decay,
}


def run(config: RunConfig) -> Report:
    if config.subcommand not in HANDLERS:
        raise UsageError(f"unknown subcommand {config.subcommand!r}")
    # exact cardinalities run to hundreds of thousands of digits
    sys.set_int_max_str_digits(0)
    checks = Checks()
    t0 = time.perf_counter()
    columns, rows = HANDLERS[config.subcommand](config, checks)
    meta = {
        "subcommand": config.subcommand,
        "config": {k: v for k, v in sorted(config.params.items()) if v is not None},
        "versions": {"altfolner": __version__, "python": platform.python_version(), "numpy": np.__version__},
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }
    if config.subcommand in ("sample", "lemma-check", "embed"):
        meta["config"]["seed"] = _seed(config)
    return Report(meta, columns, rows, checks.summary())


# --- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameters; flags override it")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--seed", type=int, help=f"RNG seed (default ${SEED_ENV} or 0)")
    common.add_argument("--jobs", type=int, help="worker processes for sampled suites")
    common.add_argument("--exact-index", type=int, dest="exact_index")

    p = argparse.ArgumentParser(prog="altfolner", description="Folner sets of alternate mother groups")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    s = add("delta", "boundary ratios delta_k")
    s.add_argument("--d", type=int)
    s.add_argument("--k-max", type=int, dest="k_max")

    s = add("epsilon", "eps_k^K for a valency sequence")
    s.add_argument("--d", type=int)
    s.add_argument("--valency", help='JSON: {"constant": d}, {"prefix": [...], "period": [...]} or {"formula": name}')
    s.add_argument("--K", type=int, dest="K")

    s = add("cardinality", "exact |L_k| and |Int L_k|")
    s.add_argument("--d", type=int)
    s.add_argument("--k-max", type=int, dest="k_max")

    s = add("sample", "uniform samples of L_k strata")
    s.add_argument("--d", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--stratum", choices=("member", "interior", "boundary"))

    s = add("member", "membership of a profile or a word")
    s.add_argument("--profile", help="JSON profile file")
    s.add_argument("--word", help="space separated generator names, ^-1 for inverses")
    s.add_argument("--generators", help="JSON file or object naming the generators")
    s.add_argument("--d", type=int)
    s.add_argument("--k", type=int)

    s = add("lemma-check", "sampled right-multiplication suite")
    s.add_argument("--d", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--n", type=int)

    s = add("oracle", "brute-force interior ratio against the recursion")
    s.add_argument("--d", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--valency")
    s.add_argument("--K", type=int, dest="K")

    s = add("folfun", "smallest k with delta_k <= 1/n and |L_k|")
    s.add_argument("--d", type=int)
    s.add_argument("--n", type=int, nargs="+")

    s = add("embed", "doubling embedding checks")
    s.add_argument("--d", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--depth", type=int)

    s = add("orbit", "transitivity on levels 1..j")
    s.add_argument("--d", type=int)
    s.add_argument("--j", type=int)

    s = add("decay", "eps_K^K for K <= K_max")
    s.add_argument("--d", type=int)
    s.add_argument("--valency")
    s.add_argument("--K-max", type=int, dest="K_max")
    s.add_argument("--eta", type=float)
    s.add_argument("--stride", type=int)
    return p


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    params = {}
    if args.config:
        data = _read_json_arg(args.config)
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        params.update({k.replace("-", "_"): v for k, v in data.items()})
    for k, v in vars(args).items():
        if k in ("subcommand", "config", "out", "format"):
            continue
        if v is not None:
            params[k] = v
    fmt = args.format or params.pop("format", None) or "csv"
    out = args.out or params.pop("out", None)
    params.pop("format", None)
    params.pop("out", None)
    return RunConfig(args.subcommand, params, out, fmt)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
        report = run(cfg)
    except SystemExit as exc:          # argparse
        return EXIT_USAGE if exc.code else EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = report.to_json() + "\n" if cfg.format == "json" else report.to_csv()
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for c in report.summary["checks"]:
        if not c["pass"]:
            print(f"FAILED {c['name']}: {json.dumps(c.get('witness'), sort_keys=True)}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
