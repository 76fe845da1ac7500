"""Command-line interface.

Subcommands: fit, metrics, generate, hist, curves.  All outputs are
written atomically (temp file + rename) and JSON numbers keep full double
precision, so identical inputs and flags give byte-identical outputs.

Exit codes: 0 success, 1 input error, 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import generator, metrics, netio, posterior
from .fit import FitError, FitOptions, fit_all, fit_to_dict
from .likelihood import DEFAULT_LAMBDA
from .metrics import UndefinedMetricError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGED = 2


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".prefmix-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _load_network(args) -> netio.LabeledNetwork:
    drop = frozenset(args.drop or [])
    keep_loops = not getattr(args, "drop_self_loops", False)
    try:
        if getattr(args, "json", None):
            with open(args.json) as fh:
                return netio.parse_network_json(fh, drop_labels=drop,
                                                keep_self_loops=keep_loops)
        if not args.edges or not args.labels:
            raise CliError("either --json or both --edges and --labels are required")
        with open(args.edges) as e, open(args.labels) as l:
            return netio.parse_network(e, l, directed=args.directed,
                                       drop_labels=drop, keep_self_loops=keep_loops)
    except FileNotFoundError as exc:
        raise CliError(f"cannot open input file: {exc.filename}") from exc
    except netio.ParseError as exc:
        name = args.json or args.edges or args.labels
        raise CliError(f"{name}: {exc}") from exc
    except netio.NetworkError as exc:
        raise CliError(str(exc)) from exc


def _fit_options(args) -> FitOptions:
    lam = getattr(args, "lam", None)
    if lam is None:
        lam = DEFAULT_LAMBDA
    if lam <= 0:
        raise CliError("--lambda must be positive")
    return FitOptions(lam=lam)


def cmd_fit(args) -> int:
    net = _load_network(args)
    try:
        nf = fit_all(net, _fit_options(args))
    except FitError as exc:
        raise CliError(str(exc), code=EXIT_NONCONVERGED) from exc
    _atomic_write(args.out, _dump_json(fit_to_dict(nf)))
    return EXIT_OK if nf.converged else EXIT_NONCONVERGED


def cmd_metrics(args) -> int:
    net = _load_network(args)
    opts = _fit_options(args)
    init = None
    if getattr(args, "fit", None):
        with open(args.fit) as fh:
            init = json.load(fh)
    try:
        nf = fit_all(net, opts)
        if init is not None and init.get("groups") == nf.group_names:
            # warm start from a previous fit of the same network
            refits = []
            for r, f in enumerate(init["fits"]):
                refit = FitOptions(lam=opts.lam, init_y=np.asarray(f["y"], float))
                from .fit import fit_group
                refits.append(fit_group(nf.ctxs[r], refit))
            nf = type(nf)(group_names=nf.group_names, fits=refits, ctxs=nf.ctxs,
                          counts=nf.counts, summary=nf.summary, lam=nf.lam)
        if not nf.converged:
            raise CliError("fit did not converge for all groups", code=EXIT_NONCONVERGED)
        doc = build_metrics_doc(nf, opts)
    except FitError as exc:
        raise CliError(str(exc), code=EXIT_NONCONVERGED) from exc
    _atomic_write(args.out, _dump_json(doc))
    return EXIT_OK


def build_metrics_doc(nf, opts: FitOptions | None = None) -> dict:
    alpha = nf.alpha
    summary = nf.summary
    a = metrics.assortativity_point(alpha, summary)
    a_null = metrics.null_assortativity(summary)
    per_group = []
    for r, (name, f, ctx) in enumerate(zip(nf.group_names, nf.fits, nf.ctxs)):
        vm, vv = posterior.group_moments("V", ctx, f, r, opts)
        per_group.append({
            "group": name,
            "mean_preference": metrics.dirichlet_mean(f.alpha_hat).tolist(),
            "V_r": {"mean": vm, "std": float(np.sqrt(max(vv, 0.0)))},
        })
    v_est = posterior.estimate_metric("V", nf, opts)
    doc = {
        "R": None,
        "V": {"mean": v_est.mean, "std": v_est.std},
        "a": a,
        "a_null": a_null,
        "per_group": per_group,
    }
    try:
        r_est = posterior.estimate_metric("R", nf, opts)
        doc["R"] = {"mean": r_est.mean, "std": r_est.std}
    except UndefinedMetricError as exc:
        doc["R"] = None
        doc["R_undefined_reason"] = str(exc)
    return doc


def cmd_generate(args) -> int:
    try:
        with open(args.spec) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise CliError(f"cannot open spec file: {exc.filename}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid JSON in spec: {exc}") from exc
    try:
        params, seed = generator.params_from_spec(doc)
    except (ValueError, KeyError) as exc:
        raise CliError(f"invalid generator spec: {exc}") from exc
    if args.seed is not None:
        seed = args.seed
    net = generator.sample_network(params, seed)
    import io
    buf = io.StringIO()
    netio.write_edge_file(net, buf)
    _atomic_write(args.out_edges, buf.getvalue())
    buf = io.StringIO()
    netio.write_label_file(net, buf)
    _atomic_write(args.out_labels, buf.getvalue())
    return EXIT_OK


def cmd_hist(args) -> int:
    net = _load_network(args)
    if args.bins < 2:
        raise CliError("--bins must be >= 2")
    counts = netio.group_counts(net)
    lines = ["group,bin_left,bin_right,count,frequency"]
    edges = np.linspace(0.0, 1.0, args.bins + 1)
    for r, name in enumerate(net.group_names):
        rows = counts.group_rows(r)
        tot = rows.sum(axis=1)
        rows = rows[tot > 0]
        tot = tot[tot > 0]
        target = r
        if args.target is not None:
            if args.target not in net.group_names:
                raise CliError(f"unknown target group '{args.target}'")
            target = net.group_names.index(args.target)
        if rows.shape[0] == 0:
            lines.append(f"{name},,,0,0  # no nonzero-degree nodes")
            continue
        ratios = rows[:, target] / tot
        hist, _ = np.histogram(ratios, bins=edges)
        freq = hist / hist.sum()
        for b in range(args.bins):
            lines.append(f"{name},{float(edges[b])!r},{float(edges[b + 1])!r},"
                         f"{int(hist[b])},{float(freq[b])!r}")
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_curves(args) -> int:
    if args.grid < 2:
        raise CliError("--grid must be >= 2")
    if getattr(args, "fit", None):
        try:
            with open(args.fit) as fh:
                doc = json.load(fh)
            groups = doc["groups"]
            alphas = [np.asarray(f["alpha"], float) for f in doc["fits"]]
        except (FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
            raise CliError(f"invalid fit JSON: {exc}") from exc
    else:
        net = _load_network(args)
        try:
            nf = fit_all(net, _fit_options(args))
        except FitError as exc:
            raise CliError(str(exc), code=EXIT_NONCONVERGED) from exc
        if not nf.converged:
            raise CliError("fit did not converge for all groups", code=EXIT_NONCONVERGED)
        groups = nf.group_names
        alphas = [f.alpha_hat for f in nf.fits]
    grid = (np.arange(args.grid) + 0.5) / args.grid
    lines = ["group,target_group,x,density"]
    for r, name in enumerate(groups):
        for s, target in enumerate(groups):
            curve = metrics.beta_marginal_curve(alphas[r], s, grid)
            for x, d in curve:
                lines.append(f"{name},{target},{float(x)!r},{float(d)!r}")
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _add_network_args(p):
    p.add_argument("--edges", help="edge list file (source target per line)")
    p.add_argument("--labels", help="label file (node group per line)")
    p.add_argument("--json", help="combined JSON input (alternative to --edges/--labels)")
    p.add_argument("--directed", action="store_true",
                   help="treat edge lines as directed (default: undirected)")
    p.add_argument("--drop", action="append", metavar="LABEL",
                   help="discard nodes carrying this label (repeatable)")
    p.add_argument("--drop-self-loops", action="store_true")
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                   help="regularization strength (default 2^-7)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="prefmix",
        description="Infer mixing preference distributions in labeled networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit per-group Dirichlet parameters")
    _add_network_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("metrics", help="assortativity and variance with error bars")
    _add_network_args(p)
    p.add_argument("--fit", help="previous fit JSON used as a warm start")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("generate", help="sample a network from a generator spec")
    p.add_argument("--spec", required=True, help="generator spec JSON")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-labels", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("hist", help="histogram of raw per-node preference ratios")
    _add_network_args(p)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--target", help="target group (default: each node's own group)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("curves", help="fitted marginal density curves")
    _add_network_args(p)
    p.add_argument("--fit", help="use an existing fit JSON instead of refitting")
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curves)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
