"""Command-line front end.

Subcommands: analyze (full pipeline on one action), verify (the invariant
battery over catalog actions, one PASS/FAIL line per check), classify (a
single user-specified point), catalog (list the built-in actions). Reports
are JSON-shaped with a stable field order and a sha256 trailer over the
payload region, so identical invocations are byte-comparable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from types import SimpleNamespace

import numpy as np

from . import __version__, actions, groups, quotient, strata
from .errors import (
    InputError,
    OrthofoldError,
    PointSpecError,
    UnknownActionError,
)
from .isotropy import reps_equivalent, slice_representation, stabilizer
from .numerics import Tolerance
from .seeding import rng_for

SCHEMA_VERSION = "1"

# principal-class probe size for classify; small because only the class of
# the generic stabilizer is needed, not a stratification
_CLASSIFY_PROBE = 160

_POINT_ALIASES = {
    "rp2-so2": {"k": "0,0,1"},
    "cp2-u1": {"P0": "1,0,0", "P1": "0,1,0", "P2": "0,0,1"},
    "s2xs2-so3": {"diag": "0,0,1,0,0,1", "antidiag": "0,0,1,0,0,-1"},
    "s2-zn": {"north": "0,0,1", "south": "0,0,-1"},
}


# ---------------------------------------------------------------------------
# deterministic JSON-shaped serialization
# ---------------------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    f = float(x)
    if not math.isfinite(f):
        raise InputError("reports cannot carry non-finite numbers")
    return format(f, ".12g")


def _json_value(v, indent: int) -> str:
    pad = " " * indent
    inner = " " * (indent + 1)
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (bool, np.bool_, int, np.integer, float, np.floating)):
        return _num(v)
    if isinstance(v, dict):
        if not v:
            return "{}"
        rows = [f'{inner}{json.dumps(str(k))}: {_json_value(u, indent + 1)}' for k, u in v.items()]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        items = list(v)
        if not items:
            return "[]"
        flat = all(
            isinstance(u, (str, bool, np.bool_, int, np.integer, float, np.floating))
            for u in items
        )
        if flat:
            return "[" + ", ".join(_json_value(u, indent) for u in items) + "]"
        rows = [f"{inner}{_json_value(u, indent + 1)}" for u in items]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    raise InputError(f"unserializable report value of type {type(v).__name__}")


def render_report(payload: dict, stream) -> str:
    """Write the report document; returns the payload hash.

    The sha256 covers exactly the serialized payload region, so documents
    from identical runs differ only in the timestamp outside it.
    """
    body = _json_value(payload, 1)
    sha = hashlib.sha256(body.encode("utf-8")).hexdigest()
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc = (
        "{\n"
        f' "schema_version": {json.dumps(SCHEMA_VERSION)},\n'
        f' "tool_version": {json.dumps(__version__)},\n'
        f' "generated_at": {json.dumps(stamp)},\n'
        f' "payload": {body}\n'
        "}\n"
        f"report-sha256: {sha}\n"
    )
    stream.write(doc)
    return sha


def _out_stream(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def _tolerance(args) -> Tolerance:
    return Tolerance(
        rank_eps=args.rank_eps,
        match_eps=args.match_eps,
        cluster_eps_factor=args.cluster_eps_factor,
    )


def run_pipeline(a, samples: int, seed: int, tol: Tolerance) -> SimpleNamespace:
    """Every derived structure of one action, computed once."""
    cloud = strata.build_cloud(a, samples, seed=seed, tol=tol)
    orbit_type = strata.orbit_type_partition(cloud)
    iso = strata.isostabilizer_decomposition(cloud)
    klein = quotient.klein_partition(cloud)
    corr = quotient.correspondence(iso, klein)
    principal = strata.principal_dimension(cloud)
    labels = strata.singularity_labels(cloud)
    interval = None
    frontier = None
    interval_note = ""
    if a.interval is not None:
        try:
            interval = quotient.quotient_interval_model(a, cloud, klein)
            frontier = quotient.frontier_check(interval)
        except InputError as e:
            # a too-small cloud can push every block into point strata;
            # keep the report valid and record the degeneracy
            interval = None
            interval_note = str(e)
    orbifold = quotient.orbifold_criterion(cloud)
    return SimpleNamespace(
        action=a,
        cloud=cloud,
        orbit_type=orbit_type,
        iso=iso,
        klein=klein,
        corr=corr,
        principal=principal,
        labels=labels,
        interval=interval,
        frontier=frontier,
        interval_note=interval_note,
        orbifold=orbifold,
    )


def _signature_doc(sig: tuple):
    return [list(s) if isinstance(s, tuple) else s for s in sig]


def _fingerprint_doc(fp) -> dict:
    kind, rows, zero_dims, characters = fp.rep_fingerprint
    return {
        "slice_dim": fp.slice_dim,
        "stabilizer": fp.stab_class.display(),
        "dim_at_origin": fp.dim_at_origin,
        "rep_kind": kind,
        "weights": [list(r) for r in rows],
        "zero_dims": zero_dims,
        "characters": list(characters),
        "slice_stab_profile": list(fp.slice_stab_profile),
        "free_away_from_origin": bool(fp.free_away_from_origin),
        "effective_signature": _signature_doc(fp.effective_signature),
    }


def _partition_doc(part) -> dict:
    return {
        "blocks": len(part.blocks),
        "sizes": [len(b) for b in part.blocks],
        "labels": [lab["label"] for lab in part.block_labels],
    }


def _interval_doc(model) -> dict:
    return {
        "endpoints": list(model.endpoints),
        "strata": [[list(piece) for piece in stratum] for stratum in model.strata],
        "klein_labels": list(model.labels),
    }


def _analysis_payload(r, samples: int, seed: int, tol: Tolerance) -> dict:
    a = r.action
    cloud = r.cloud
    sing = {}
    for lab in r.labels:
        sing[lab.display()] = sing.get(lab.display(), 0) + 1
    merge_doc = [
        {"iso_blocks": list(pair), "klein_block": kid}
        for pair, kid in r.corr.merge_witnesses
    ]
    split_doc = [
        {"class": cls, "klein_blocks": list(kids)}
        for cls, kids in r.corr.split_witnesses
    ]
    return {
        "action": a.name,
        "samples": samples,
        "seed": seed,
        "tolerance": {
            "rank_eps": tol.rank_eps,
            "match_eps": tol.match_eps,
            "cluster_eps_factor": tol.cluster_eps_factor,
        },
        "cloud": {
            "points": len(cloud),
            "orbits": len(r.klein.orbits),
            "intrinsic_dim": a.manifold.intrinsic_dim,
        },
        "dimension": {
            "principal": r.principal.value,
            "values": sorted({int(d) for d in cloud.quotient_dims}),
            "exceptional_points": int(r.principal.exceptional.sum()),
        },
        "partitions": {
            "orbit_type": _partition_doc(r.orbit_type),
            "isostabilizer": _partition_doc(r.iso),
            "klein": {
                "blocks": len(r.klein.blocks),
                "sizes": [len(b) for b in r.klein.blocks],
                "dims": list(r.klein.dims),
                "fingerprints": [_fingerprint_doc(fp) for fp in r.klein.fingerprints],
            },
        },
        "correspondence": {
            "mapping": list(r.corr.mapping),
            "surjective": r.corr.surjective,
            "injective": r.corr.injective,
            "merge_witnesses": merge_doc,
            "split_witnesses": split_doc,
        },
        "singularities": dict(sorted(sing.items())),
        "interval_model": (
            {"degenerate": r.interval_note}
            if r.interval is None and r.interval_note
            else None
            if r.interval is None
            else {**_interval_doc(r.interval), "frontier": bool(r.frontier)}
        ),
        "orbifold_criterion": r.orbifold,
    }


# ---------------------------------------------------------------------------
# verify battery
# ---------------------------------------------------------------------------


def _check(results, name, ok, detail=""):
    results.append({"name": name, "ok": bool(ok), "detail": detail if not ok else ""})


def _generic_checks(r, results, seed: int):
    a = r.action
    cloud = r.cloud
    lhs = cloud.quotient_dims + cloud.orbit_dims
    bad = int(np.count_nonzero(lhs != a.manifold.intrinsic_dim))
    _check(results, "dimension-identity", bad == 0, f"{bad} violations")

    const = all(
        len({int(cloud.quotient_dims[i]) for i in b}) == 1 for b in r.klein.blocks
    )
    _check(results, "klein-dimension-constant", const, "a klein block mixes dimensions")

    # correspondence was computed without a straddle, so well-definedness held
    _check(results, "correspondence-defined", True)
    _check(results, "correspondence-surjective", r.corr.surjective, "missed klein blocks")

    ik = quotient.inverse_klein(r.klein, cloud)
    rel_ot = quotient.compare_partitions(r.iso, r.orbit_type)
    _check(
        results,
        "iso-refines-orbit-type",
        rel_ot in ("PRefinesQ", "Equal"),
        f"relation {rel_ot}",
    )
    rel_ik = quotient.compare_partitions(r.iso, ik)
    _check(
        results,
        "iso-refines-klein",
        rel_ik in ("PRefinesQ", "Equal"),
        f"relation {rel_ik}",
    )

    # orbifold_criterion raises when local structure and dimension-map
    # constancy disagree; reaching this line with a boolean is the pass
    _check(results, "orbifold-criterion-consistent", isinstance(r.orbifold, bool))

    if a.interval is not None:
        vals = np.asarray(a.interval.projection(cloud.points))
        take = cloud.points[: min(len(cloud), 256)]
        els = groups.sample_elements(a.group, 32, rng_for(seed, a.name, "pi-invariance"))
        worst = 0.0
        for g in els:
            moved = np.stack([actions.act(a, g, x) for x in take])
            worst = max(
                worst,
                float(np.abs(np.asarray(a.interval.projection(moved)) - vals[: take.shape[0]]).max()),
            )
        _check(
            results,
            "pi-orbit-invariant",
            worst <= cloud.tol.match_eps,
            f"max drift {worst:.3e}",
        )
        _check(
            results,
            "frontier-condition",
            bool(r.frontier),
            r.interval_note or "frontier fails",
        )


def _point_strata_values(model) -> set:
    out = set()
    for stratum in model.strata:
        if all(piece[0] == "point" for piece in stratum):
            out.update(piece[1] for piece in stratum)
    return out


def _klein_block_of_point(r, point: np.ndarray):
    d = np.array(
        [actions.distance(r.action.manifold, point, p) for p in r.cloud.points]
    )
    i = int(d.argmin())
    if d[i] > 1e-7:
        return None
    return r.klein.block_of()[i]


def _pinned_checks(r, results, seed: int, tol: Tolerance):
    a = r.action
    cloud = r.cloud
    name = a.name

    if name == "s2xs2-so3":
        _check(results, "klein-block-count-2", len(r.klein.blocks) == 2,
               f"got {len(r.klein.blocks)}")
        _check(results, "klein-dims-1-2", sorted(r.klein.dims) == [1, 2],
               f"got {sorted(r.klein.dims)}")
        pts = _point_strata_values(r.interval)
        _check(results, "interval-endpoints-singular", pts == {-1.0, 1.0},
               f"point strata at {sorted(pts)}")

    elif name == "rp2-so2":
        _check(results, "klein-block-count-3", len(r.klein.blocks) == 3,
               f"got {len(r.klein.blocks)}")
        _check(results, "klein-dims-1-1-2", sorted(r.klein.dims) == [1, 1, 2],
               f"got {sorted(r.klein.dims)}")
        vals = np.asarray(a.interval.projection(cloud.points))
        at0 = {r.labels[i].display() for i in np.where(np.abs(vals) < 1e-9)[0]}
        at1 = {r.labels[i].display() for i in np.where(np.abs(vals - 1.0) < 1e-9)[0]}
        _check(results, "t0-orbifold-point-2", at0 == {"OrbifoldPoint(2)"}, f"got {at0}")
        _check(results, "t1-orthofold-point", at1 == {"OrthofoldPoint"}, f"got {at1}")
        _check(results, "exceptional-locus-flagged",
               bool(r.principal.exceptional[np.abs(vals) < 1e-9].all()),
               "t=0 points not flagged exceptional")
        _check(results, "orbifold-criterion-false", r.orbifold is False, f"got {r.orbifold}")

    elif name == "cp2-so3":
        ot_labels = sorted(lab["label"] for lab in r.orbit_type.block_labels)
        _check(results, "orbit-type-blocks-3", ot_labels == ["O2", "SO2", "Zn(2)"],
               f"got {ot_labels}")
        _check(results, "klein-block-count-2", len(r.klein.blocks) == 2,
               f"got {len(r.klein.blocks)}")
        _check(results, "correspondence-non-injective", not r.corr.injective,
               "correspondence is injective")
        merged = set()
        for (i, j), _ in r.corr.merge_witnesses:
            merged.add(r.iso.block_labels[i]["subgroup"].label)
            merged.add(r.iso.block_labels[j]["subgroup"].label)
        _check(results, "merge-witness-so2-o2", {"SO2", "O2"} <= merged,
               f"merged classes {sorted(merged)}")
        ik = quotient.inverse_klein(r.klein, cloud)
        rel = quotient.compare_partitions(ik, r.orbit_type)
        _check(results, "inverse-klein-coarser-than-orbit-type", rel == "QRefinesP",
               f"relation {rel}")

    elif name == "cp2-u1":
        fixed = {
            "P0": ("1,0,0", ((1,), (2,))),
            "P1": ("0,1,0", ((-1,), (1,))),
            "P2": ("0,0,1", ((-2,), (-1,))),
        }
        reps = {}
        kids = {}
        for label, (spec, want) in fixed.items():
            x = actions.parse_point(a, spec)
            st = stabilizer(a, x, seed=seed, tol=tol)
            rep = slice_representation(a, st, tol, seed=seed)
            reps[label] = rep
            kids[label] = _klein_block_of_point(r, x)
            _check(results, f"slice-weights-{label}", rep.weights == want,
                   f"got {rep.weights}")
        _check(results, "reps-p0-p2-equivalent",
               reps_equivalent(reps["P0"], reps["P2"]), "not equivalent")
        _check(results, "reps-p0-p1-inequivalent",
               not reps_equivalent(reps["P0"], reps["P1"]), "unexpectedly equivalent")
        same = kids["P0"] is not None and kids["P0"] == kids["P2"]
        other = kids["P1"] is not None and kids["P1"] != kids["P0"]
        _check(results, "p0-p2-share-klein-block", same, f"blocks {kids}")
        _check(results, "p1-separate-klein-block", other, f"blocks {kids}")
        _check(results, "split-witness-present", len(r.corr.split_witnesses) > 0,
               "no split witnesses")
        ik = quotient.inverse_klein(r.klein, cloud)
        rel = quotient.compare_partitions(ik, r.orbit_type)
        _check(results, "inverse-klein-finer-than-orbit-type", rel == "PRefinesQ",
               f"relation {rel}")

    elif name.startswith("s2-zn"):
        ik = quotient.inverse_klein(r.klein, cloud)
        rel = quotient.compare_partitions(r.orbit_type, ik)
        _check(results, "klein-equals-orbit-type", rel == "Equal", f"relation {rel}")
        dims = sorted({int(d) for d in cloud.quotient_dims})
        _check(results, "constant-dimension-2", dims == [2], f"got {dims}")
        _check(results, "orbifold-criterion-true", r.orbifold is True, f"got {r.orbifold}")

    elif name.startswith("cn-tn"):
        n = a.params["n"]
        ok = True
        detail = ""
        for x in cloud.points:
            if not strata.toric_consistency(a, x, cloud.tol):
                ok = False
                detail = f"formula fails at {np.round(x, 4)}"
                break
        _check(results, "toric-dimension-formula", ok, detail)
        if n == 2:
            _check(results, "klein-block-count-3", len(r.klein.blocks) == 3,
                   f"got {len(r.klein.blocks)}")


def verify_action(a, samples: int, seed: int, tol: Tolerance) -> list:
    results = []
    try:
        r = run_pipeline(a, samples, seed, tol)
    except OrthofoldError as e:
        _check(results, "pipeline", False, str(e))
        return results
    _generic_checks(r, results, seed)
    _pinned_checks(r, results, seed, tol)
    return results


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    a = actions.get_action(args.action)
    tol = _tolerance(args)
    r = run_pipeline(a, args.samples, args.seed, tol)
    payload = _analysis_payload(r, args.samples, args.seed, tol)
    stream, close = _out_stream(args.out)
    try:
        render_report(payload, stream)
    finally:
        if close:
            stream.close()
    return 0


def cmd_verify(args) -> int:
    if len(args.actions) == 1 and args.actions[0] == "all":
        models = actions.catalog()
    else:
        models = [actions.get_action(t) for t in args.actions]
    tol = _tolerance(args)
    action_docs = []
    failures = 0
    for a in models:
        results = verify_action(a, args.samples, args.seed, tol)
        for res in results:
            tag = "PASS" if res["ok"] else "FAIL"
            line = f"[{tag}] {a.name} :: {res['name']}"
            if not res["ok"] and res["detail"]:
                line += f" ({res['detail']})"
            print(line)
            failures += 0 if res["ok"] else 1
        action_docs.append({"action": a.name, "checks": results})
    print(f"{'FAIL' if failures else 'PASS'}: {failures} failing check(s)")
    payload = {
        "command": "verify",
        "samples": args.samples,
        "seed": args.seed,
        "actions": action_docs,
        "failures": failures,
    }
    stream, close = _out_stream(args.out)
    try:
        render_report(payload, stream)
    finally:
        if close:
            stream.close()
    return 1 if failures else 0


def _resolve_point(a, spec: str) -> np.ndarray:
    text = spec.strip()
    family = a.name.split("(")[0]
    alias = _POINT_ALIASES.get(a.name, _POINT_ALIASES.get(family, {}))
    text = alias.get(text, text)
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    return actions.parse_point(a, text)


def cmd_classify(args) -> int:
    a = actions.get_action(args.action)
    tol = _tolerance(args)
    x = _resolve_point(a, args.point)
    st = stabilizer(a, x, seed=args.seed, tol=tol)
    rep = slice_representation(a, st, tol, seed=args.seed)
    orbit_dim = int(a.manifold.intrinsic_dim - rep.slice_dim)
    qdim = strata.quotient_dimension(a, x, tol)
    probe = strata.build_cloud(a, _CLASSIFY_PROBE, seed=args.seed, tol=tol)
    principal = strata.principal_dimension(probe)
    label = strata.classify_singularity(st, principal.subgroup, tol)
    fp = quotient.local_model(a, st, rep, seed=args.seed, tol=tol)
    payload = {
        "action": a.name,
        "point": [float(t) for t in x],
        "seed": args.seed,
        "stabilizer": st.subgroup.display(),
        "orbit_dim": orbit_dim,
        "quotient_dim": qdim,
        "principal_dim": principal.value,
        "singularity": label.display(),
        "fingerprint": _fingerprint_doc(fp),
    }
    stream, close = _out_stream(args.out)
    try:
        render_report(payload, stream)
    finally:
        if close:
            stream.close()
    return 0


def cmd_catalog(args) -> int:
    del args
    for a in actions.catalog():
        m = a.manifold
        print(
            f"{a.name:12s} group={a.group.name:8s} manifold={m.kind}"
            f" ambient={m.ambient_dim} intrinsic={m.intrinsic_dim}"
        )
    return 0


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def _default_seed() -> int:
    try:
        return int(os.environ.get("ORTHOFOLD_SEED", "0"))
    except ValueError:
        return 0


def _add_common(p: argparse.ArgumentParser, with_samples: bool = True):
    if with_samples:
        p.add_argument("--samples", type=int, default=2000,
                       help="points sampled per action (default 2000)")
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help="seed for all sampling (default 0, or ORTHOFOLD_SEED)")
    p.add_argument("--rank-eps", type=float, default=Tolerance().rank_eps)
    p.add_argument("--match-eps", type=float, default=Tolerance().match_eps)
    p.add_argument("--cluster-eps-factor", type=float,
                   default=Tolerance().cluster_eps_factor)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="orthofold",
        description="Stratification toolkit for compact matrix group actions.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run the full pipeline on one action")
    pa.add_argument("action", help="catalog action id, e.g. cp2-so3 or s2-zn(5)")
    _add_common(pa)
    pa.set_defaults(func=cmd_analyze)

    pv = sub.add_parser("verify", help="run the invariant battery as checks")
    pv.add_argument("actions", nargs="+", help="action ids, or 'all'")
    _add_common(pv)
    pv.set_defaults(func=cmd_verify)

    pc = sub.add_parser("classify", help="classify a single point")
    pc.add_argument("action")
    pc.add_argument("point", help="comma-separated coordinates, or a named point")
    _add_common(pc, with_samples=False)
    pc.set_defaults(func=cmd_classify)

    pt = sub.add_parser("catalog", help="list the built-in actions")
    pt.set_defaults(func=cmd_catalog)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UnknownActionError, PointSpecError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OrthofoldError as e:
        print(f"pipeline failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
