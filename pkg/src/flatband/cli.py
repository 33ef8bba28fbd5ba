"""Command-line front end.

Usage:
    flatband lattice  --size 4,4,4 [--format json|dot|csv] [--graph G|LG]
    flatband decomp   {count,enumerate,towers,slice,packings2d} --size ...
    flatband manybody {column-gram,rotated-rank,span-rank,zero2,entropy} ...
    flatband report   --size 4,4,4 [--format json|csv]

Exit codes: 0 success, 2 usage or validation error, 3 budget exhausted
(partial result written), 4 bracket violation.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import bounds, decomp, exactalg, manybody
from .lattice import LatticeError, TorusSpec, build_torus, hopping_matrix

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_BRACKET = 4

OUTPUT_DIR_ENV = "FLATBAND_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _size(text: str) -> TorusSpec:
    try:
        return TorusSpec.parse(text)
    except LatticeError as exc:
        raise UsageError(str(exc)) from None


def _size2(text: str) -> tuple[int, int]:
    parts = text.replace("x", ",").split(",")
    try:
        La, Lb = (int(p) for p in parts)
    except ValueError:
        raise UsageError(f"2-D size must be two integers, got {text!r}") from None
    for n in (La, Lb):
        if n < 4 or n % 2:
            raise UsageError(f"extent must be even ≥ 4 (got {n})")
    return La, Lb


def emit(args, text: str, stem: str, ext: str):
    if not text.endswith("\n"):
        text += "\n"
    path = args.output
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        path = Path(os.environ[OUTPUT_DIR_ENV]) / f"{stem}.{ext}"
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}", file=sys.stderr)


def dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _csv(header, row) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerow(row)
    return buf.getvalue()


# -- lattice ------------------------------------------------------------------


def lattice_summary(spec: TorusSpec, seed=None, tol: float = 1e-9) -> dict:
    torus = build_torus(spec)
    T = hopping_matrix(torus)
    deg = torus.degrees()
    lg_deg = {len(n) for n in torus.line_graph_neighbors}
    kdim = exactalg.kernel_dimension(torus, seed=seed)
    return {
        "spec": list(spec.extents),
        "vertices": torus.n_vertices,
        "edges": torus.n_edges,
        "faces": torus.n_faces,
        "degrees": sorted({int(d) for d in deg}),
        "bipartite": torus.is_proper_coloring(),
        "lineGraphDegrees": sorted(lg_deg),
        "hoppingDiagonal": sorted({int(v) for v in T.diagonal()}),
        "kernelDim": kdim,
        "kernelDimFormula": torus.n_edges - torus.n_vertices + 1,
        "faceSpanRank": exactalg.face_span_rank(torus, seed=seed),
        "flatBandMultiplicity": exactalg.flat_band_multiplicity(torus, tol),
        "criticalParticleNumber": torus.n_edges // 4,
    }


def cmd_lattice(args) -> int:
    spec = _size(args.size)
    torus = build_torus(spec)
    stem = f"lattice-{spec.L1}x{spec.L2}x{spec.L3}"
    if args.format == "dot":
        text = torus.to_dot() if args.graph == "G" else torus.line_graph_dot()
        emit(args, text, stem + ("" if args.graph == "G" else "-lg"), "dot")
        return EXIT_OK
    summary = lattice_summary(spec, args.seed, args.tol)
    if args.format == "csv":
        keys = ["vertices", "edges", "faces", "kernelDim", "faceSpanRank", "flatBandMultiplicity", "criticalParticleNumber"]
        emit(args, _csv(["spec"] + keys, [str(spec)] + [summary[k] for k in keys]), stem, "csv")
        return EXIT_OK
    out = {"summary": summary}
    if args.full:
        out["graph"] = torus.to_json_dict()
        out["lineGraph"] = {"edges": [list(e) for e in torus.line_graph_edges()]}
    emit(args, dump(out), stem, "json")
    return EXIT_OK


# -- decompositions ---------------------------------------------------------------


def cmd_decomp(args) -> int:
    action = args.action
    if action == "packings2d":
        La, Lb = _size2(args.size)
        packs = decomp.enumerate_2d_packings(La, Lb)
        classes = [decomp.classify_2d_packing(p) for p in packs]
        stem = f"packings2d-{La}x{Lb}"
        if args.format == "csv":
            text = _csv(
                ["La", "Lb", "count", "all_classified", "bound"],
                [La, Lb, len(packs), str(all(c.classified for c in classes)).lower(), bounds.layer_configurations(La, Lb)],
            )
            emit(args, text, stem, "csv")
        elif args.format == "ascii":
            blocks = [f"# {k} {c.kind} base={c.base} shifts={list(c.shifts)}\n{p.to_ascii()}" for k, (p, c) in enumerate(zip(packs, classes))]
            emit(args, "\n\n".join(blocks), stem, "txt")
        else:
            emit(
                args,
                dump(
                    {
                        "extents": [La, Lb],
                        "count": len(packs),
                        "allClassified": all(c.classified for c in classes),
                        "bound": bounds.layer_configurations(La, Lb),
                        "packings": [dict(p.to_json_dict(), classification=c.to_json_dict()) for p, c in zip(packs, classes)],
                    }
                ),
                stem,
                "json",
            )
        return EXIT_OK

    spec = _size(args.size)
    torus = build_torus(spec)
    tag = f"{spec.L1}x{spec.L2}x{spec.L3}"
    if action == "count":
        res = decomp.count_decompositions(torus, args.budget_nodes, args.budget_seconds, args.threads)
        if args.format == "json":
            emit(args, dump(dict(res.as_row(), completed=res.completed)), f"count-{tag}", "json")
        else:
            emit(args, res.to_csv(), f"count-{tag}", "csv")
        return EXIT_OK if res.completed else EXIT_BUDGET
    if action == "enumerate":
        decs = list(decomp.enumerate_decompositions(torus, args.limit))
        out = {
            "spec": list(spec.extents),
            "count": len(decs),
            "decompositions": [d.sorted_ids() for d in decs],
        }
        emit(args, dump(out), f"enumerate-{tag}", "json")
        return EXIT_OK
    if action == "towers":
        d = decomp.tower_decomposition(torus)
        rep = decomp.verify_decomposition(torus, d)
        out = {"spec": list(spec.extents), "faces": d.sorted_ids(), "valid": rep.valid, "nFaces": len(d)}
        emit(args, dump(out), f"towers-{tag}", "json")
        return EXIT_OK
    if action == "slice":
        d = decomp.tower_decomposition(torus)
        if args.index is not None:
            decs = list(decomp.enumerate_decompositions(torus, args.index + 1))
            if len(decs) <= args.index:
                raise UsageError(f"only {len(decs)} decompositions exist")
            d = decs[args.index]
        try:
            pk = decomp.plane_slice(torus, d, args.plane, args.layer)
        except LatticeError as exc:
            raise UsageError(str(exc)) from None
        cl = decomp.classify_2d_packing(pk)
        if args.format == "ascii":
            emit(args, f"# {args.plane} layer {args.layer}: {cl.kind} base={cl.base} shifts={list(cl.shifts)}\n{pk.to_ascii()}", f"slice-{tag}", "txt")
        else:
            emit(args, dump(dict(pk.to_json_dict(), valid=pk.is_valid(), classification=cl.to_json_dict())), f"slice-{tag}", "json")
        return EXIT_OK
    raise UsageError(f"unknown decomp action {action!r}")


# -- many-body ------------------------------------------------------------------


def cmd_manybody(args) -> int:
    action = args.action
    if action == "column-gram":
        try:
            rep = manybody.column_gram_check(args.length)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        emit(args, dump(rep.to_json_dict()), f"column-gram-{args.length}", "json")
        return EXIT_OK
    if action == "entropy":
        if args.nc is not None:
            Nc = args.nc
        else:
            Nc = build_torus(_size(args.size)).n_edges // 4
        try:
            rep = manybody.dilution_entropy(Nc, args.particles)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.format == "csv":
            emit(args, rep.to_csv(), f"entropy-{Nc}-{args.particles}", "csv")
        else:
            emit(args, dump(rep.to_json_dict()), f"entropy-{Nc}-{args.particles}", "json")
        return EXIT_OK

    spec = _size(args.size)
    torus = build_torus(spec)
    tag = f"{spec.L1}x{spec.L2}x{spec.L3}"
    if action == "rotated-rank":
        fam = manybody.rotated_family(torus)
        rank = manybody.gram_rank(torus, fam, seed=args.seed)
        out = {"spec": list(spec.extents), "states": len(fam), "rank": rank, "theorem2Lower": str(bounds.theorem2_lower(spec))}
        emit(args, dump(out), f"rotated-rank-{tag}", "json")
        return EXIT_OK
    if action == "span-rank":
        try:
            rep = manybody.decomposition_span_rank(torus, args.limit, args.method, args.seed)
        except exactalg.CapExceeded as exc:
            print(f"permanent cap exceeded: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        emit(args, dump(rep.to_json_dict()), f"span-rank-{tag}", "json")
        return EXIT_OK
    if action == "zero2":
        res = manybody.two_boson_zero_dim(torus, seed=args.seed)
        vecs = manybody.zero_mode_vectors(res, args.samples, seed=args.seed or 0)
        rng = random.Random(args.seed)
        U_site = [rng.randint(1, 9) for _ in range(torus.n_edges)]
        sound = all(not manybody.apply_hamiltonian(torus, manybody.pair_wavefunction(res, v), U_site).any() for v in vecs)
        out = dict(res.to_json_dict(), sampled=len(vecs), sound=sound)
        emit(args, dump(out), f"zero2-{tag}", "json")
        return EXIT_OK if sound else EXIT_BRACKET
    raise UsageError(f"unknown manybody action {action!r}")


# -- report ----------------------------------------------------------------------


def cmd_report(args) -> int:
    spec = _size(args.size)
    torus = build_torus(spec)
    if args.load:
        rep = bounds.BoundsReport.from_json_dict(json.loads(Path(args.load).read_text()))
        omega, span, fam = rep.omega4, rep.span_rank, rep.span_includes_family
    else:
        omega = decomp.count_decompositions(torus, args.budget_nodes, args.budget_seconds, args.threads)
        states = manybody.rotated_family(torus)
        if args.span_limit:
            seen = set(states)
            for d in decomp.enumerate_decompositions(torus, args.span_limit):
                s = manybody.FaceProductState.from_decomposition(d)
                if s not in seen:
                    seen.add(s)
                    states.append(s)
        span = manybody.span_rank(torus, states, seed=args.seed).rank
        fam = True
    try:
        rep = bounds.assemble_report(spec, omega, span, fam)
    except bounds.BracketViolation as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_BRACKET
    tag = f"{spec.L1}x{spec.L2}x{spec.L3}"
    if args.format == "csv":
        emit(args, rep.to_csv(), f"report-{tag}", "csv")
    else:
        emit(args, rep.to_json(), f"report-{tag}", "json")
    return EXIT_OK if omega is None or omega.completed else EXIT_BUDGET


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help=f"output file (default: stdout, or ${OUTPUT_DIR_ENV}/<name>)")
    common.add_argument("--seed", type=int, default=None, help="seed for random primes and spot checks")
    common.add_argument("--threads", type=int, default=1, help="worker processes for counting")
    common.add_argument("--tol", type=float, default=1e-9, help="tolerance of floating cross-checks")

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--budget-nodes", type=int, default=None)
    budget.add_argument("--budget-seconds", type=float, default=None)

    p = argparse.ArgumentParser(prog="flatband", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    lat = sub.add_parser("lattice", parents=[common], help="lattice objects and summary")
    lat.add_argument("--size", required=True)
    lat.add_argument("--format", choices=["json", "csv", "dot"], default="json")
    lat.add_argument("--graph", choices=["G", "LG"], default="G", help="graph exported by --format dot")
    lat.add_argument("--full", action="store_true", help="include vertex/edge/face lists in JSON")
    lat.set_defaults(func=cmd_lattice)

    dec = sub.add_parser("decomp", parents=[common, budget], help="4-cycle decompositions")
    dec.add_argument("action", choices=["count", "enumerate", "towers", "slice", "packings2d"])
    dec.add_argument("--size", required=True, help="L1,L2,L3 (two extents for packings2d)")
    dec.add_argument("--format", choices=["json", "csv", "ascii"], default=None)
    dec.add_argument("--limit", type=int, default=100)
    dec.add_argument("--plane", default="XY")
    dec.add_argument("--layer", type=int, default=0)
    dec.add_argument("--index", type=int, default=None, help="slice the n-th enumerated decomposition instead of the tower")
    dec.set_defaults(func=cmd_decomp)

    mb = sub.add_parser("manybody", parents=[common], help="many-boson states")
    mb.add_argument("action", choices=["column-gram", "rotated-rank", "span-rank", "zero2", "entropy"])
    mb.add_argument("--size")
    mb.add_argument("--length", type=int, default=4)
    mb.add_argument("--limit", type=int, default=100)
    mb.add_argument("--method", choices=["auto", "gram", "evaluation"], default="auto")
    mb.add_argument("--samples", type=int, default=10)
    mb.add_argument("--particles", type=int, default=0)
    mb.add_argument("--nc", type=int, default=None)
    mb.add_argument("--format", choices=["json", "csv"], default="json")
    mb.set_defaults(func=cmd_manybody)

    rp = sub.add_parser("report", parents=[common, budget], help="bounds versus computed values")
    rp.add_argument("--size", required=True)
    rp.add_argument("--format", choices=["json", "csv"], default="json")
    rp.add_argument("--span-limit", type=int, default=0, help="also include this many enumerated decompositions in the span rank")
    rp.add_argument("--load", help="check a previously written JSON report instead of recomputing")
    rp.set_defaults(func=cmd_report)
    return p


_DEFAULT_FORMAT = {"count": "csv", "enumerate": "json", "towers": "json", "slice": "ascii", "packings2d": "json"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "decomp" and args.format is None:
        args.format = _DEFAULT_FORMAT[args.action]
    if args.command == "manybody" and args.action not in ("column-gram", "entropy") and not args.size:
        parser.error(f"manybody {args.action} requires --size")
    if args.command == "manybody" and args.action == "entropy" and args.nc is None and not args.size:
        parser.error("manybody entropy requires --size or --nc")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
