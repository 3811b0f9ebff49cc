"""Command-line front end: ``adfmoments <subcommand> ...``.

Exit status is 0 on success, 1 with a JSON error object on stdout for domain,
capacity and fit errors (and for failed verifications), and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import satcount
from .errors import CapacityError, DomainError, FitError
from .moments import (
    asymptotic_report,
    closed_form_suite,
    default_degree,
    fitted_moment,
    pipeline,
)
from .partition import TriplePartition, all_partitions
from .quasipoly import DEFAULT_PERIODS, detect_period, fit
from .seqcore import LENGTH_CAP, StandardizedMoment, format_fraction, oracle_central_moment
from .wreath import OrbitClass, enumerate_con_reps, orbit_labels

THREADS_ENV = "ADFMOMENTS_THREADS"
ORBITS_ALL_P_CAP = 2


class UsageError(Exception):
    """Bad argument values that argparse cannot catch; reported with exit 2."""


@dataclass
class RunConfig:
    subcommand: str
    format: str = "json"
    output: str | None = None
    threads: int = 1
    len_cap: int = LENGTH_CAP
    class_cap: int = satcount.COARSENING_CLASS_CAP
    state_cap: int = satcount.STATE_CAP
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("threads", "len_cap", "class_cap", "state_cap"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be positive")


def parse_range(text: str) -> list[int]:
    """``"A..B"`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected A..B") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_int_list(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "pretty"), default="json", help="output format (default json)")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument(
        "--threads", type=_positive, default=None, help=f"worker processes for the oracle (default 1, or ${THREADS_ENV})"
    )
    common.add_argument("--len-cap", type=_positive, default=LENGTH_CAP, help=f"oracle length cap (default {LENGTH_CAP})")
    common.add_argument(
        "--class-cap",
        type=_positive,
        default=satcount.COARSENING_CLASS_CAP,
        help=f"max classes for coarsening lattices (default {satcount.COARSENING_CLASS_CAP})",
    )
    common.add_argument(
        "--state-cap", type=_positive, default=satcount.STATE_CAP, help=f"max DP states (default {satcount.STATE_CAP})"
    )

    parser = argparse.ArgumentParser(prog="adfmoments", description="Exact moments of autocorrelation demerit factors.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    b = sub.add_parser("brute", parents=[common], help="exhaustive oracle over all 2^L sequences")
    b.add_argument("--len", dest="length", type=int, required=True, help="sequence length L")
    b.add_argument("--p", type=_nonneg, required=True, help="moment order")

    m = sub.add_parser("moments", parents=[common], help="central moments over a range of lengths")
    m.add_argument("--p", type=_nonneg, required=True)
    m.add_argument("--len-range", type=parse_range, required=True, help="A..B inclusive")
    m.add_argument("--method", choices=("brute", "partition", "both"), default="partition")
    m.add_argument("--fit", action="store_true", help="also fit a quasi-polynomial to the partition values")
    m.add_argument("--degree", type=_nonneg, default=None, help="fit degree (default floor(3p/2))")
    m.add_argument("--periods", type=parse_int_list, default=list(DEFAULT_PERIODS), help="candidate periods, e.g. 1,2,4,8")

    o = sub.add_parser("orbits", parents=[common], help="isomorphism classes of partitions")
    o.add_argument("--p", type=_nonneg, required=True)
    o.add_argument("--con-only", action="store_true", help="only contributory classes")

    c = sub.add_parser("count", parents=[common], help="solution counts of a partition's system")
    c.add_argument("--partition", help='classes as "e.s.v,e.s.v;..."')
    c.add_argument("--len", dest="length", type=_nonneg, help="range [L] for every variable")
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--relaxed", dest="mode", action="store_const", const="relaxed")
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    c.add_argument(
        "--batch", help='JSON file ("-" for stdin): list of {"partition", "len", "mode"} objects'
    )

    f = sub.add_parser("fit", parents=[common], help="fit a quasi-polynomial to moment values")
    f.add_argument("--p", type=_nonneg, help="fit the pipeline moment of this order")
    f.add_argument("--values", help='JSON file ("-" for stdin) mapping length to "num/den"')
    f.add_argument("--degree", type=_nonneg, default=None)
    f.add_argument("--periods", type=parse_int_list, default=list(DEFAULT_PERIODS))
    f.add_argument("--period", type=_positive, default=None, help="skip detection and use this period")
    f.add_argument(
        "--extrapolate",
        action="store_true",
        help="lengths above 32 from per-component quasi-polynomials (needed for p=4)",
    )

    a = sub.add_parser("asymptote", parents=[common], help="scaled moments from fitted closed forms")
    a.add_argument("--p", type=_positive, required=True)
    a.add_argument("--lengths", type=parse_int_list, default=[16, 64, 256, 512, 4096, 10**6])

    v = sub.add_parser("verify", parents=[common], help="check the published closed forms")
    v.add_argument("--oracle-max", type=_positive, default=12)
    v.add_argument("--pipeline-max", type=_positive, default=24)
    return parser


def config_from_args(ns: argparse.Namespace, environ: dict[str, str] | None = None) -> RunConfig:
    environ = os.environ if environ is None else environ
    threads = ns.threads
    if threads is None:
        raw = environ.get(THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    generic = {"subcommand", "format", "output", "threads", "len_cap", "class_cap", "state_cap"}
    return RunConfig(
        subcommand=ns.subcommand,
        format=ns.format,
        output=ns.output,
        threads=threads,
        len_cap=ns.len_cap,
        class_cap=ns.class_cap,
        state_cap=ns.state_cap,
        options={k: v for k, v in vars(ns).items() if k not in generic},
    )


# rendering


def to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if x is None else x for x in r])
    return buf.getvalue()


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def _std_decimal(st: StandardizedMoment | None) -> str | None:
    return None if st is None else str(st.decimal())


@dataclass
class Output:
    data: Any
    header: list[str] | None = None
    rows: list[list[Any]] | None = None
    text: str | None = None
    ok: bool = True

    def render(self, fmt: str) -> str:
        if fmt == "csv" and self.header is not None:
            return to_csv(self.header, self.rows or [])
        if fmt == "pretty" and self.text is not None:
            return self.text if self.text.endswith("\n") else self.text + "\n"
        if fmt == "pretty" and self.header is not None:
            widths = [max(len(str(h)), *(len(str(r[i])) for r in self.rows or [])) for i, h in enumerate(self.header)]
            lines = ["  ".join(str(h).ljust(w) for h, w in zip(self.header, widths))]
            lines += ["  ".join(str(x).ljust(w) for x, w in zip(r, widths)) for r in self.rows or []]
            return "\n".join(lines) + "\n"
        return to_json(self.data)


# subcommands


def cmd_brute(cfg: RunConfig) -> Output:
    o = cfg.options
    rep = oracle_central_moment(o["length"], o["p"], cap=cfg.len_cap, workers=cfg.threads)
    d = rep.as_dict()
    header = ["length", "p", "central_ssac", "central_adf", "standardized", "mean_adf"]
    row = [d["length"], d["p"], d["central_ssac"], d["central_adf"], _std_decimal(rep.standardized), d["mean_adf"]]
    return Output(d, header, [row])


def cmd_moments(cfg: RunConfig) -> Output:
    o = cfg.options
    p, lengths, method = o["p"], o["len_range"], o["method"]
    if lengths[0] < 1:
        raise DomainError("lengths must be at least 1")
    brute: dict[int, Fraction] = {}
    part: dict[int, int] = {}
    result = None
    if method in ("brute", "both"):
        for l in lengths:
            brute[l] = oracle_central_moment(l, p, cap=cfg.len_cap, workers=cfg.threads).central_ssac
    if method in ("partition", "both") or o["fit"]:
        result = pipeline(p, lengths)
        part = result.central_ssac
    variance = pipeline(2, lengths).central_ssac if p != 2 else part or None
    rows = []
    agree = True
    for l in lengths:
        row: dict[str, Any] = {"length": l}
        if method in ("brute", "both"):
            row["brute_central_ssac"] = format_fraction(brute[l])
        if method in ("partition", "both"):
            row["partition_central_ssac"] = format_fraction(Fraction(part[l]))
        value = Fraction(part[l]) if l in part else brute[l]
        row["central_adf"] = format_fraction(value / l ** (2 * p))
        var = Fraction(variance[l]) if variance else oracle_central_moment(l, 2, cap=cfg.len_cap).central_ssac
        row["standardized"] = _std_decimal(StandardizedMoment.from_moments(p, value, var))
        if method == "both":
            row["agree"] = brute[l] == part[l]
            agree &= row["agree"]
        rows.append(row)
    data: dict[str, Any] = {"p": p, "method": method, "rows": rows}
    if method == "both":
        data["agree"] = agree
    if o["fit"]:
        degree = default_degree(p) if o["degree"] is None else o["degree"]
        period = detect_period(part, degree, o["periods"])
        data["fitted"] = fit(part, period, degree).to_json()
    if result is not None:
        data["classes"] = [
            {"representative": str(c.representative), "orbit_size": c.orbit_size, "sols": [str(x) for x in s]}
            for c, s in zip(result.classes, result.sols)
        ]
    header = list(rows[0].keys())
    return Output(data, header, [[r[h] for h in header] for r in rows], ok=agree)


def _all_orbits(p: int) -> list[OrbitClass]:
    if p > ORBITS_ALL_P_CAP:
        raise CapacityError(f"listing every orbit needs p <= {ORBITS_ALL_P_CAP}; use --con-only")
    seen: set[tuple[int, ...]] = set()
    out = []
    for P in all_partitions(p):
        if P.labels in seen:
            continue
        orbit = orbit_labels(P)
        seen |= orbit
        rep = TriplePartition(P.equations, min(orbit))
        out.append(OrbitClass(rep, len(orbit), len(orbit)))
    out.sort(key=lambda c: c.representative.labels)
    return out


def cmd_orbits(cfg: RunConfig) -> Output:
    o = cfg.options
    classes = list(enumerate_con_reps(o["p"])) if o["con_only"] else _all_orbits(o["p"])
    data = [c.describe() for c in classes]
    header = ["representative", "orbit_size", "gelo", "satisfiable", "separable", "principal"]
    rows = [[d[h] for h in header] for d in data]
    return Output(data, header, rows)


def _count_one(text: str, length: int, mode: str, cap: int) -> dict:
    if length is None or length < 0:
        raise DomainError("len must be a nonnegative integer")
    P = TriplePartition.parse(text)
    if mode == "exact":
        value = satcount.exact_counts(P, [length], cap)[0]
    elif mode == "relaxed":
        value = satcount.count_relaxed(P, length)
    else:
        raise DomainError(f"unknown count mode {mode!r}")
    return {"partition": str(P), "len": length, "mode": mode, "count": value}


def _read_json(path: str) -> Any:
    if path == "-":
        return json.load(sys.stdin)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_count(cfg: RunConfig) -> Output:
    o = cfg.options
    mode = o["mode"] or "exact"
    if o["batch"]:
        items = _read_json(o["batch"])
        if not isinstance(items, list):
            raise DomainError("batch input must be a JSON list")
        results = [_count_one(it["partition"], it["len"], it.get("mode", mode), cfg.class_cap) for it in items]
    else:
        if o["partition"] is None or o["length"] is None:
            raise UsageError("count needs --partition and --len, or --batch")
        results = [_count_one(o["partition"], o["length"], mode, cfg.class_cap)]
    header = ["partition", "len", "mode", "count"]
    rows = [[r[h] for h in header] for r in results]
    data: Any = results if o["batch"] else results[0]
    text = "\n".join(str(r["count"]) for r in results)
    return Output(data, header, rows, text=text)


def cmd_fit(cfg: RunConfig) -> Output:
    o = cfg.options
    if (o["p"] is None) == (o["values"] is None):
        raise UsageError("fit needs exactly one of --p or --values")
    if o["values"] is not None:
        raw = _read_json(o["values"])
        values = {int(k): Fraction(v) for k, v in raw.items()}
        degree = o["degree"]
        if degree is None:
            raise UsageError("--degree is required with --values")
        period = o["period"] or detect_period(values, degree, o["periods"])
        q = fit(values, period, degree)
    else:
        p = o["p"]
        degree = default_degree(p) if o["degree"] is None else o["degree"]
        candidates = [o["period"]] if o["period"] else o["periods"]
        q = fitted_moment(p, degree, candidates, extrapolate=o["extrapolate"])
    rows = [[b["residue"], i, c] for b in q.to_json()["branches"] for i, c in enumerate(b["coeffs"])]
    return Output(q.to_json(), ["residue", "power", "coefficient"], rows, text=q.pretty())


def cmd_asymptote(cfg: RunConfig) -> Output:
    o = cfg.options
    rows = asymptotic_report(o["p"], o["lengths"])
    data = {"p": o["p"], "rows": [r.as_dict() for r in rows]}
    header = ["length", "scaled_moment", "standardized", "limit_scaled", "limit_standardized"]
    return Output(data, header, [[r.as_dict()[h] for h in header] for r in rows])


def cmd_verify(cfg: RunConfig) -> Output:
    o = cfg.options
    rep = closed_form_suite(o["oracle_max"], o["pipeline_max"])
    header = ["name", "branch", "length", "expected", "observed", "ok"]
    d = rep.as_dict()
    rows = [[c[h] for h in header] for c in d["comparisons"]]
    text = "\n".join(c.line() for c in rep.comparisons) + f"\n{'PASS' if rep.ok else 'FAIL'}"
    return Output(d, header, rows, text=text, ok=rep.ok)


COMMANDS = {
    "brute": cmd_brute,
    "moments": cmd_moments,
    "orbits": cmd_orbits,
    "count": cmd_count,
    "fit": cmd_fit,
    "asymptote": cmd_asymptote,
    "verify": cmd_verify,
}

_ERROR_KINDS = {DomainError: "domain_error", CapacityError: "capacity_error", FitError: "fit_error"}


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    old_cap = satcount.STATE_CAP
    satcount.STATE_CAP = cfg.state_cap
    try:
        out = COMMANDS[cfg.subcommand](cfg)
    except (DomainError, CapacityError, FitError) as exc:
        kind = next(v for k, v in _ERROR_KINDS.items() if isinstance(exc, k))
        stdout.write(to_json({"error": {"type": kind, "message": str(exc)}}))
        return 1
    finally:
        satcount.STATE_CAP = old_cap
    text = out.render(cfg.format)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0 if out.ok else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
