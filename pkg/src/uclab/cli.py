"""Command-line surface: reproducible runs with JSON reports on stdout.

Every invocation prints one RunReport object: {command, parameters, seed,
results, timing_ms, tool_version}.  All floats carry 17 significant digits
and infinities serialize as the string "inf", so identical commands with
identical seeds emit byte-identical reports apart from timing_ms.  Progress
notes go to stderr.

Exit codes: 0 clean, 1 usage or parse errors, 2 hypothesis violations in
the inputs, 3 critical findings (a verified inequality failed on valid
input, i.e. an implementation bug or a genuine counterexample witness).
"""

import argparse
import math
import os
import sys
import time

from . import __version__
from . import conjecture_lab, families, formats, lemma_engine, subset_dist
from .entropy_core import DEFAULT_MU, DEFAULT_THRESHOLD, binary_entropy
from .errors import UclabError, UsageError
from .reports import STATUS_CRITICAL, STATUS_HYPOTHESIS, STATUS_OK, dumps

EXIT_BY_STATUS = {STATUS_OK: 0, STATUS_HYPOTHESIS: 2, STATUS_CRITICAL: 3}

_INLINE_ENTRY_CAP = 4096


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _progress(message):
    print(message, file=sys.stderr)


def _env_jobs():
    raw = os.environ.get("UCLAB_JOBS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise UsageError(f"UCLAB_JOBS must be an integer, got {raw!r}") from exc


def _jobs(args):
    jobs = getattr(args, "jobs", None)
    if jobs is None:
        return _env_jobs()
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return jobs


def _read_text(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _display(value):
    return format(value, ".12g")


def _dist_payload(d, include_entries=True):
    payload = {
        "n": d.n,
        "support_size": d.support_size,
        "representation": d.representation,
        "normalization_residual": d.residual,
    }
    if include_entries and d.support_size <= _INLINE_ENTRY_CAP:
        payload["text"] = formats.format_distribution(d)
    else:
        payload["text"] = None
    return payload


def _family_payload(family, include_members=True):
    payload = {"n": family.n, "size": family.size}
    if include_members and family.size <= _INLINE_ENTRY_CAP:
        payload["text"] = formats.format_family(family)
    else:
        payload["text"] = None
    return payload


# ---------------------------------------------------------------- entropy


def _cmd_entropy(args):
    results = {}
    if args.h is not None:
        value = binary_entropy(args.h)
        results["h"] = {"p": args.h, "value": value, "display": _display(value)}
    if args.f is not None:
        value = lemma_engine.ratio_f(args.f[0], args.f[1])
        results["f"] = {
            "p": args.f[0],
            "p2": args.f[1],
            "value": value,
            "display": _display(value),
        }
    if args.g is not None:
        value = lemma_engine.ratio_g(args.g)
        results["g"] = {"p": args.g, "value": value, "display": _display(value)}
    if not results:
        raise UsageError("provide at least one of --h, --f, --g")
    return results, STATUS_OK


# ------------------------------------------------------------------ lemma


def _cmd_lemma_scan_l1(args):
    _progress(f"scanning the low-bias ratio grid at step {args.step} ...")
    report = lemma_engine.scan_lemma_l1(step=args.step, jobs=_jobs(args))
    return report.to_payload(), report.status


def _cmd_lemma_scan_l2(args):
    _progress(f"scanning the union lower-bound grid at step {args.step} ...")
    report = lemma_engine.scan_lemma_l2(step=args.step, jobs=_jobs(args))
    return report.to_payload(), report.status


def _cmd_lemma_verify(args):
    inst = formats.parse_instance(
        _read_text(args.file), mu=args.mu, threshold=args.threshold
    )
    report = lemma_engine.verify_instance(inst, ratio=args.ratio)
    if not report.hypothesis_ok:
        status = STATUS_HYPOTHESIS
    elif not report.passed:
        status = STATUS_CRITICAL
    else:
        status = STATUS_OK
    return report.to_payload(), status


def _cmd_lemma_minimize(args):
    _progress(
        f"annealing {args.restarts} restarts x {args.iters} iterations "
        f"at mu={args.mu} ..."
    )
    inst, ratio = lemma_engine.adversarial_minimize(
        size=args.size,
        mu=args.mu,
        seed=args.seed,
        iters=args.iters,
        restarts=args.restarts,
        threshold=args.threshold,
    )
    results = {
        "min_ratio": ratio,
        "mu": args.mu,
        "mean_p": inst.mean_p,
        "instance_text": formats.format_instance(inst),
    }
    status = STATUS_OK
    if args.mu <= DEFAULT_MU + 1e-15 and ratio < lemma_engine.DEFAULT_RATIO - 1e-9:
        # a ratio below the proven bound can only be an implementation bug
        # or a genuine counterexample; surface it loudly with its witness
        results["finding"] = "ratio-below-proven-bound"
        status = STATUS_CRITICAL
    return results, status


def _cmd_lemma_figure1(args):
    rows, summary = lemma_engine.figure1_grid(step=args.step)
    results = {
        "rows": len(rows),
        "min_f": summary["min_f"],
        "argmin": summary["argmin"],
        "csv_path": args.out,
    }
    if args.out:
        _write_text(args.out, formats.format_grid_csv(rows))
        _progress(f"wrote {len(rows)} grid rows to {args.out}")
    return results, STATUS_OK


# ------------------------------------------------------------------- dist


def _load_distribution(args):
    has_gen = args.which is not None
    if (args.file is None) == (not has_gen):
        raise UsageError("provide exactly one of --file or --which/--n/--p")
    if args.file is not None:
        return formats.parse_distribution(_read_text(args.file))
    if args.n is None or args.p is None:
        raise UsageError("generator input needs --n and --p")
    if args.which == 1:
        return subset_dist.product_bernoulli(args.n, args.p)
    if args.which == 2:
        return subset_dist.two_point(args.n, args.p)
    if args.which == 3:
        return subset_dist.gated_product(args.n, args.p, args.q)
    raise UsageError(f"unknown generator {args.which}")


def _cmd_dist_entropy(args):
    d = _load_distribution(args)
    results = _dist_payload(d, include_entries=False)
    results["entropy"] = subset_dist.dist_entropy(d)
    return results, STATUS_OK


def _cmd_dist_union(args):
    d = _load_distribution(args)
    u = subset_dist.union_distribution(d)
    results = {
        "input": _dist_payload(d, include_entries=False),
        "union": _dist_payload(u),
        "entropy": subset_dist.dist_entropy(u),
    }
    if args.out:
        _write_text(args.out, formats.format_distribution(u))
    return results, STATUS_OK


def _cmd_dist_marginals(args):
    d = _load_distribution(args)
    margs = subset_dist.marginals(d)
    results = {
        "marginals": margs,
        "max_marginal": max(margs),
        "n": d.n,
    }
    return results, STATUS_OK


def _cmd_dist_check_thm1(args):
    d = _load_distribution(args)
    report = subset_dist.check_theorem1(d, ratio=args.ratio, mu=args.mu)
    return report.to_payload(), report.status


def _cmd_dist_bit_chain(args):
    d = _load_distribution(args)
    chain = subset_dist.bit_chain(d)
    results = {
        "n": d.n,
        "h_bits": list(chain.h_bits),
        "total": chain.total,
        "entropy": subset_dist.dist_entropy(d),
        "instances": [
            {"bit": i + 1, "entries": inst.pairs()}
            for i, inst in enumerate(chain.instances)
            if inst.size <= _INLINE_ENTRY_CAP
        ],
    }
    return results, STATUS_OK


def _closed_forms(which, n, p, q):
    hp = binary_entropy(p)
    hu = binary_entropy(2 * p - p * p)
    if which == 1:
        return n * hp, n * hu
    if which == 2:
        return hp, hu
    hq = binary_entropy(q)
    hqq = binary_entropy(2 * q - q * q)
    return (
        hp + p * hq * (n - 1),
        hu + 2 * p * (1 - p) * hq * (n - 1) + p * p * hqq * (n - 1),
    )


def _cmd_dist_example(args):
    if args.which is None or args.n is None or args.p is None:
        raise UsageError("example needs --which, --n and --p")
    d = _load_distribution(args)
    u = subset_dist.union_distribution(d)
    h_a = subset_dist.dist_entropy(d)
    h_u = subset_dist.dist_entropy(u)
    closed_a, closed_u = _closed_forms(args.which, args.n, args.p, args.q)
    results = {
        "which": args.which,
        "n": args.n,
        "p": args.p,
        "q": args.q,
        "h_a": h_a,
        "h_a_closed_form": closed_a,
        "h_a_residual": h_a - closed_a,
        "h_union": h_u,
        "h_union_closed_form": closed_u,
        "h_union_residual": h_u - closed_u,
    }
    return results, STATUS_OK


# ----------------------------------------------------------------- family


def _load_family(args):
    has_gen = args.n is not None or args.gens is not None
    if (args.file is None) == (not has_gen):
        raise UsageError("provide exactly one of --file or --n/--gens/--seed")
    if args.file is not None:
        return formats.parse_family(_read_text(args.file))
    if args.n is None or args.gens is None or args.seed is None:
        raise UsageError("generator input needs --n, --gens and --seed")
    return families.random_union_closed(args.n, args.gens, args.seed)


def _cmd_family_check(args):
    family = _load_family(args)
    closed, witness = families.is_union_closed(family)
    results = {
        "family": _family_payload(family, include_members=False),
        "union_closed": closed,
        "witness": None
        if witness is None
        else {
            "a": formats.format_mask(witness[0]),
            "b": formats.format_mask(witness[1]),
        },
    }
    return results, STATUS_OK


def _cmd_family_closure(args):
    family = _load_family(args)
    closed = families.union_closure(family)
    results = {
        "generators": _family_payload(family, include_members=False),
        "closure": _family_payload(closed),
    }
    if args.out:
        _write_text(args.out, formats.format_family(closed))
    return results, STATUS_OK


def _cmd_family_freq(args):
    family = _load_family(args)
    prof = families.frequency_profile(family)
    results = {
        "family": _family_payload(family, include_members=False),
        "counts": list(prof.counts),
        "fractions": list(prof.fractions),
        "argmax": prof.argmax,
        "max_fraction": prof.max_fraction,
    }
    return results, STATUS_OK


def _cmd_family_self_union(args):
    family = _load_family(args)
    merged = families.family_self_union(family)
    results = {
        "family": _family_payload(family, include_members=False),
        "self_union": _family_payload(merged),
        "equals_input": merged.size == family.size,
    }
    if args.out:
        _write_text(args.out, formats.format_family(merged))
    return results, STATUS_OK


def _cmd_family_enumerate(args):
    listing = list(families.enumerate_union_closed(args.n))
    results = {"n": args.n, "count": len(listing)}
    if len(listing) <= 64:
        results["families"] = [formats.format_family(f) for f in listing]
    return results, STATUS_OK


def _cmd_family_random(args):
    family = families.random_union_closed(args.n, args.gens, args.seed)
    results = {"family": _family_payload(family)}
    if args.out:
        _write_text(args.out, formats.format_family(family))
    return results, STATUS_OK


def _cmd_family_frankl_brute(args):
    _progress(f"sweeping every union-closed family on n={args.n} ...")
    sweep = families.frankl_sweep(args.n, jobs=_jobs(args))
    results = {
        "n": args.n,
        "count": sweep["count_dfs"],
        "count_cross_check": sweep["count_filter"],
        "counts_agree": sweep["counts_agree"],
        "min_max_fraction": sweep["min_max_fraction"],
        "worst_family": None
        if sweep["worst_family"] is None
        else formats.format_family(sweep["worst_family"]),
    }
    status = STATUS_OK
    if not sweep["counts_agree"] or sweep["min_max_fraction"] < 0.01 - 1e-12:
        status = STATUS_CRITICAL
    return results, status


def _cmd_family_kl_identity(args):
    family = _load_family(args)
    report = conjecture_lab.kl_identity_check(family)
    return report.to_payload(), report.status


# ------------------------------------------------------------ conjecture1


def _cmd_conjecture1_gap(args):
    d = formats.parse_distribution(_read_text(args.file))
    gap = conjecture_lab.conjecture1_gap(d)
    return gap.to_payload(), STATUS_OK


def _cmd_conjecture1_search(args):
    _progress(
        f"searching gap minima on n={args.n} with {args.restarts} restarts ..."
    )
    best, witness, info = conjecture_lab.search_conjecture1(
        n=args.n,
        support_size=args.support,
        seed=args.seed,
        iters=args.iters,
        restarts=args.restarts,
    )
    results = {
        "best": best.to_payload(),
        "witness_text": formats.format_distribution(witness),
        "escapes": info["escapes"],
        "first_escape_text": None
        if info["first_escape"] is None
        else formats.format_distribution(info["first_escape"]),
        "negative_gap_found": best.gap < -1e-9,
    }
    return results, STATUS_OK


def _cmd_conjecture1_section4(args):
    values = conjecture_lab.parity_counterexample()
    expected = {
        "h_f_pair": 2.0,
        "h_x": 2.0,
        "h_x_given_c": 1.0,
        "h_f_given_histories": 0.0,
    }
    residual = max(abs(values[k] - expected[k]) for k in expected)
    results = dict(values)
    results["max_residual"] = residual
    status = STATUS_OK if residual <= 1e-12 else STATUS_CRITICAL
    return results, status


# ------------------------------------------------------------------ wiring


def build_parser():
    parser = _Parser(prog="uclab", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="group", required=True)

    p = sub.add_parser("entropy", help="evaluate the scalar kernels")
    p.add_argument("--h", type=float, help="binary entropy at p")
    p.add_argument("--f", type=float, nargs=2, metavar=("P", "P2"),
                   help="pairwise union-entropy ratio")
    p.add_argument("--g", type=float, help="H(0.9p)/H(0.5p)")
    p.set_defaults(func=_cmd_entropy, _command="entropy")

    lemma = sub.add_parser("lemma", help="inequality scans and instances")
    lsub = lemma.add_subparsers(dest="sub", required=True)

    p = lsub.add_parser("scan-l1", help="grid scan of the low-bias ratio")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_lemma_scan_l1, _command="lemma scan-l1")

    p = lsub.add_parser("scan-l2", help="grid scan of the union lower bound")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_lemma_scan_l2, _command="lemma scan-l2")

    p = lsub.add_parser("verify", help="verify one instance file")
    p.add_argument("file")
    p.add_argument("--mu", type=float, default=DEFAULT_MU)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--ratio", type=float, default=lemma_engine.DEFAULT_RATIO)
    p.set_defaults(func=_cmd_lemma_verify, _command="lemma verify")

    p = lsub.add_parser("minimize", help="anneal for the smallest ratio")
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--mu", type=float, default=DEFAULT_MU)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--iters", type=int, default=10_000)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=_cmd_lemma_minimize, _command="lemma minimize")

    p = lsub.add_parser("figure1", help="emit the ratio surface grid as CSV")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=_cmd_lemma_figure1, _command="lemma figure1")

    dist = sub.add_parser("dist", help="subset distributions")
    dsub = dist.add_subparsers(dest="sub", required=True)
    dist_input = argparse.ArgumentParser(add_help=False)
    dist_input.add_argument("--file", help="distribution file")
    dist_input.add_argument("--which", type=int, choices=(1, 2, 3),
                            help="generator family")
    dist_input.add_argument("--n", type=int)
    dist_input.add_argument("--p", type=float)
    dist_input.add_argument("--q", type=float, default=0.99)

    p = dsub.add_parser("entropy", parents=[dist_input])
    p.set_defaults(func=_cmd_dist_entropy, _command="dist entropy")
    p = dsub.add_parser("union", parents=[dist_input])
    p.add_argument("--out", help="write the union distribution here")
    p.set_defaults(func=_cmd_dist_union, _command="dist union")
    p = dsub.add_parser("marginals", parents=[dist_input])
    p.set_defaults(func=_cmd_dist_marginals, _command="dist marginals")
    p = dsub.add_parser("check-thm1", parents=[dist_input])
    p.add_argument("--ratio", type=float, default=lemma_engine.DEFAULT_RATIO)
    p.add_argument("--mu", type=float, default=DEFAULT_MU)
    p.set_defaults(func=_cmd_dist_check_thm1, _command="dist check-thm1")
    p = dsub.add_parser("bit-chain", parents=[dist_input])
    p.set_defaults(func=_cmd_dist_bit_chain, _command="dist bit-chain")
    p = dsub.add_parser("example", parents=[dist_input])
    p.set_defaults(func=_cmd_dist_example, _command="dist example")

    family = sub.add_parser("family", help="set-family combinatorics")
    fsub = family.add_subparsers(dest="sub", required=True)
    family_input = argparse.ArgumentParser(add_help=False)
    family_input.add_argument("--file", help="family file")
    family_input.add_argument("--n", type=int)
    family_input.add_argument("--gens", type=int,
                              help="random generator count")
    family_input.add_argument("--seed", type=int)

    p = fsub.add_parser("check", parents=[family_input])
    p.set_defaults(func=_cmd_family_check, _command="family check")
    p = fsub.add_parser("closure", parents=[family_input])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_family_closure, _command="family closure")
    p = fsub.add_parser("freq", parents=[family_input])
    p.set_defaults(func=_cmd_family_freq, _command="family freq")
    p = fsub.add_parser("self-union", parents=[family_input])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_family_self_union, _command="family self-union")
    p = fsub.add_parser("enumerate")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_family_enumerate, _command="family enumerate")
    p = fsub.add_parser("random")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gens", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_family_random, _command="family random")
    p = fsub.add_parser("frankl-brute")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_family_frankl_brute, _command="family frankl-brute")
    p = fsub.add_parser("kl-identity", parents=[family_input])
    p.set_defaults(func=_cmd_family_kl_identity, _command="family kl-identity")

    conj = sub.add_parser("conjecture1", help="divergence gap tooling")
    csub = conj.add_subparsers(dest="sub", required=True)
    p = csub.add_parser("gap")
    p.add_argument("--file", required=True)
    p.set_defaults(func=_cmd_conjecture1_gap, _command="conjecture1 gap")
    p = csub.add_parser("search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--support", type=int, default=64)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=8)
    p.set_defaults(func=_cmd_conjecture1_search, _command="conjecture1 search")
    p = csub.add_parser("section4")
    p.set_defaults(func=_cmd_conjecture1_section4, _command="conjecture1 section4")

    return parser


_SKIP_PARAMS = {"func", "_command", "group", "sub", "seed"}


def _parameters(args):
    out = {}
    for key in sorted(vars(args)):
        if key in _SKIP_PARAMS:
            continue
        value = getattr(args, key)
        if value is None:
            continue
        if isinstance(value, float) and math.isnan(value):
            raise UsageError(f"--{key} must not be NaN")
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        results, status = args.func(args)
    except UclabError as exc:
        print(f"uclab: error: {exc}", file=sys.stderr)
        return 1
    report = {
        "command": args._command,
        "parameters": _parameters(args),
        "seed": getattr(args, "seed", None),
        "results": results,
        "timing_ms": int(round((time.perf_counter() - started) * 1000.0)),
        "tool_version": __version__,
    }
    print(dumps(report))
    return EXIT_BY_STATUS[status]


if __name__ == "__main__":
    sys.exit(main())
