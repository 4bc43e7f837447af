"""
Exact polymatroid and entropy inequality toolkit.

Usage:
    entropy_cli.py shannon --n N [options]
    entropy_cli.py check FILE [options]
    entropy_cli.py eval --expr EXPR FILE [options]
    entropy_cli.py rays --n N [--long] [options]
    entropy_cli.py derive SPEC [--balanced] [--symmetric-acopy] [--target FILE] [--method M] [options]
    entropy_cli.py maxe SPEC [--balanced] [--target FILE] [--method M] [options]
    entropy_cli.py gmaxe SPEC [--balanced] [--target FILE] [--method M] [options]
    entropy_cli.py implies --ineq INEQ --system SPEC [--balanced] [--symmetric-acopy] [--labels MAP] [options]
    entropy_cli.py decompose --ineq INEQ [options]
    entropy_cli.py profile FILE [options]
    entropy_cli.py precheck SPEC [--target FILE] [options]
    entropy_cli.py catalog [show NAME] [options]
    entropy_cli.py rep FILE [--principal Z --alpha K] [options]
    entropy_cli.py (-h | --help)

Options:
    -h, --help            Show this screen
    --n N                 Ground set size
    --expr EXPR           Information expression, e.g. "[a,b,c,d] + (a,b|c)"
    --target FILE         Rank vector tested against the system instead of enumerating
    --ineq INEQ           Catalog name or functional file
    --system SPEC         A .copy, .maxe or .gmaxe spec, or shannon:LABELS
    --labels MAP          Rename inequality labels onto the system ground, e.g. a=a1,b=b1
    --balanced            Only the balanced basic inequalities
    --symmetric-acopy     Treat the canonical map as a symmetry of partial copies
    --method M            Projection method, dd or fme [default: dd]
    --long                Allow enumerations that take hours
    --principal Z         Subset spanning the generic new element (rep)
    --alpha K             Rank of the new element (rep)
    --seed S              Seed for randomized steps; required where randomness is used
    --jobs K              Worker processes [default: 1]
    --max-rays R          Cap on intermediate rays and rows [default: 2000000]
    --max-cells C         Cap on probability table cells [default: 16777216]
    --timeout T           Seconds before giving up
    --verify              Re-check every certificate and fail if it does not verify
    --json                Machine readable output
    -v, --verbose         Debug logging
    -q, --quiet           Warnings only
"""

import json
import logging
import sys
from dataclasses import replace

import pandas as pd
from docopt import DocoptExit, docopt

import inequality_catalog
from copy_lemma import build_copy_system, explicit_copy, precheck_sequence, read_copy_sequence
from cone_enum import consequence_cone, is_vamos_type, orbit_dedup, polymatroid_rays, symmetric_group_generators
from defaults import EXIT_CAP, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, SHANNON_RAY_COUNTS
from distributions import is_quasi_uniform, profile, read_distribution
from errors import EntropyToolError, FormatError, GroundSetError, PreconditionFailed, ResourceCapExceeded
from exact_lp import CONSTANT, Implied, Infeasible, feasible, implies, shannon_decompose, shannon_system
from linear_rep import generic_principal_extension, ingleton_all, read_rep, to_polymatroid
from max_entropy import build_gmaxe_system, build_maxe_system, no4_check, read_gmaxe_spec, read_maxe_spec
from polymatroid import (GroundSet, eval_expr, format_number, ingleton_instances, is_polymatroid,
                         parse_expr, read_functional, read_polymatroid, shannon_basic)
from polymatroid_ops import embed_functional, substitute

logger = logging.getLogger("entropy_cli")

LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _header(title):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def _emit(opts, payload):
    """JSON goes to stdout when asked; returns True if it did."""
    if opts["--json"]:
        print(json.dumps(payload, indent=2, sort_keys=True, default=format_number))
        return True
    return False


def _int_opt(opts, key):
    value = opts.get(key)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        raise GroundSetError(f"{key} expects an integer, got {value!r}") from None


def _timeout(opts):
    value = opts.get("--timeout")
    return None if value is None else float(value)


def _ranks_table(f):
    return pd.DataFrame({"subset": [f.ground.name(m) for m in f.ground.subsets()],
                         "value": [format_number(f(m)) for m in f.ground.subsets()]})


# =============================================================================
# VERBS
# =============================================================================

def run_shannon(opts):
    n = _int_opt(opts, "--n")
    ground = GroundSet.of(LETTERS[:n])
    rows = shannon_basic(ground)
    if _emit(opts, {"n": n, "count": len(rows),
                    "inequalities": [{"tag": e.tag, "text": e.pretty()} for e in rows]}):
        return EXIT_OK
    _header(f"📐 BASIC SHANNON INEQUALITIES ON {ground.name(ground.full)}")
    print(f"Count: {len(rows)}")
    for e in rows:
        print(f"{e.tag:<20} {e.pretty()} >= 0")
    return EXIT_OK


def run_check(opts):
    f = read_polymatroid(opts["FILE"])
    res = is_polymatroid(f)
    payload = {"polymatroid": res.ok,
               "violated": res.witness.tag if res.witness is not None else None}
    if f.ground.n == 4:
        payload["ingleton"] = [format_number(v) for v in ingleton_all(f)]
    if not _emit(opts, payload):
        _header("🔍 POLYMATROID CHECK")
        print(f"Ground: {f.ground}")
        if res:
            print("✅ All basic inequalities hold")
            print(f"Matroid: {'yes' if f.is_matroid() else 'no'}")
            if f.ground.n == 4:
                print(f"Ingleton values: {', '.join(payload['ingleton'])}")
                print(f"Vamos type: {'yes' if is_vamos_type(f) else 'no'}")
        else:
            print(f"❌ Violated: {res.witness.tag}: {res.witness.pretty()} = "
                  f"{format_number(res.witness(f))}")
    return EXIT_OK if res else EXIT_NEGATIVE


def run_eval(opts):
    f = read_polymatroid(opts["FILE"])
    expr = parse_expr(opts["--expr"], f.ground)
    value = eval_expr(expr, f)
    if not _emit(opts, {"expression": expr.describe(), "value": format_number(value)}):
        print(f"{expr.describe()} = {format_number(value)}")
    return EXIT_OK


def run_rays(opts):
    n = _int_opt(opts, "--n")
    if n >= 5 and not opts["--long"]:
        raise GroundSetError(f"ray enumeration for n = {n} takes hours; pass --long")
    ground = GroundSet.of(LETTERS[:n])
    rays = polymatroid_rays(ground, max_rays=_int_opt(opts, "--max-rays"), timeout=_timeout(opts))
    orbits = orbit_dedup(rays, symmetric_group_generators(n))
    vamos = sum(1 for r in rays if is_vamos_type(r))
    table = pd.DataFrame([{
        "class": i + 1,
        "size": o.size,
        "vamos": is_vamos_type(o.representative),
        "ranks": " ".join(format_number(v) for v in o.representative.ranks),
    } for i, o in enumerate(orbits)])
    payload = {"n": n, "rays": len(rays), "classes": len(orbits), "vamos_type": vamos,
               "orbits": table.to_dict(orient="records")}
    if _emit(opts, payload):
        return EXIT_OK
    _header(f"🔺 EXTREMAL RAYS OF THE SHANNON CONE, n = {n}")
    print(f"Rays: {len(rays)}")
    print(f"Orbit classes: {len(orbits)}")
    if n == 4:
        print(f"Vamos type rays: {vamos}")
    expected = SHANNON_RAY_COUNTS.get(n)
    if expected and expected != (len(rays), len(orbits)):
        logger.warning("expected %s rays in %s classes", *expected)
    print("\n" + table.to_string(index=False))
    return EXIT_OK


# -- systems ---------------------------------------------------------------

def _load_system(opts, path):
    """(ConstraintSystem, description lines) for a spec file or shannon:LABELS."""
    path = str(path)
    balanced = bool(opts.get("--balanced"))
    if path.startswith("shannon:"):
        ground = GroundSet.of(path.split(":", 1)[1])
        return shannon_system(ground, balanced=balanced), []
    if path.endswith(".maxe"):
        built = build_maxe_system(read_maxe_spec(path), balanced=balanced)
        ground = built.system.ground
        lines = [f"Separating partitions: {len(built.partitions)}",
                 f"Forced independences: {len(built.independences)}"]
        lines += [f"  {p.describe(ground)}" for p in built.partitions[:12]]
        return built.system, lines
    if path.endswith(".gmaxe"):
        spec = read_gmaxe_spec(path)
        built = build_gmaxe_system(spec, balanced=balanced)
        lines = [f"Transversals: {len(spec.transversals)}",
                 f"Forced independences: {len(built.independences)}"]
        if built.book_extension:
            lines.append("Sunflower transversals: book extension")
        return built.system, lines
    seq = read_copy_sequence(path)
    if opts.get("--symmetric-acopy"):
        seq = replace(seq, assume_symmetric_acopy=True)
    built = build_copy_system(seq, balanced=balanced)
    lines = [f"Copy sequence: {built.sequence.describe()}",
             f"Final ground: {built.final_ground}",
             f"Variable classes: {built.class_count} of {built.final_ground.full}",
             f"Eliminated by independence: {built.eliminated}"]
    lines += [f"Symmetry {name}: {cycles}" for name, cycles in built.symmetry.describe()]
    return built.system, lines


def _summary_table(sys_):
    s = sys_.summary()
    return pd.DataFrame([{"quantity": k, "count": v} for k, v in s.items()])


def _verified(opts, cert, sys_):
    if opts["--verify"] and not cert.verify(sys_):
        logger.error("certificate failed exact verification")
        return False
    return True


def _target_feasibility(opts, sys_, target_path):
    f = read_polymatroid(target_path)
    if f.ground != sys_.ground:
        raise GroundSetError(f"target ground {f.ground} differs from system ground {sys_.ground}")
    tsys = sys_.with_target(f)
    res = feasible(tsys, normalization={CONSTANT: 1}, timeout=_timeout(opts))
    if isinstance(res, Infeasible):
        cert = res.certificate
        ok = _verified(opts, cert, tsys)
        if not _emit(opts, {"feasible": False, "certificate": cert.as_json(),
                            "verified": cert.verify(tsys)}):
            print("\n❌ Target is infeasible: the system refutes it")
            print(f"Reduced LP: {tsys.summary()['variables'] - 1} variables, {len(tsys.rows)} rows")
            print("\n📜 FARKAS CERTIFICATE")
            print(cert.to_text(tsys), end="")
        return EXIT_NEGATIVE if ok else EXIT_USAGE
    if not _emit(opts, {"feasible": True,
                        "point": {v: format_number(x) for v, x in res.point.items()}}):
        print("\n✅ Target is feasible: the system has an extension")
        for v, x in sorted(res.point.items()):
            if v != CONSTANT:
                print(f"  {v} = {format_number(x)}")
    return EXIT_OK


def _consequences(opts, sys_):
    cons = consequence_cone(sys_, shannon_ground=sys_.ground, jobs=_int_opt(opts, "--jobs"),
                            max_rays=_int_opt(opts, "--max-rays"), timeout=_timeout(opts),
                            method=opts.get("--method") or "dd")
    table = pd.DataFrame([{"tag": e.tag, "balanced": e.is_balanced(), "inequality": e.pretty() + " >= 0"}
                          for e in cons])
    if not _emit(opts, {"consequences": [e.pretty() for e in cons]}):
        print(f"\n🧮 NON-SHANNON CONSEQUENCES: {len(cons)}")
        if len(cons):
            print(table.to_string(index=False))
    return EXIT_OK


def run_system_verb(opts, title):
    sys_, lines = _load_system(opts, opts["SPEC"])
    if not opts["--json"]:
        _header(title)
        for line in lines:
            print(line)
        print("\n" + _summary_table(sys_).to_string(index=False))
    if opts["gmaxe"] and sys_.ground.n == 4:
        spec = read_gmaxe_spec(opts["SPEC"])
        target = read_polymatroid(opts["--target"]) if opts["--target"] else None
        verdict = no4_check(spec, target)
        if not opts["--json"]:
            print(f"\nNo-4 check: {verdict.verdict}")
            if verdict.witness is not None:
                print(f"  separating {verdict.witness.describe(spec.big)}")
            if verdict.g is not None:
                print(f"  explicit extension: {'verified' if not verdict.failures else verdict.failures}")
    if opts["--target"]:
        return _target_feasibility(opts, sys_, opts["--target"])
    return _consequences(opts, sys_)


def _load_inequality(spec):
    try:
        return inequality_catalog.get(spec).functional
    except GroundSetError:
        if spec.endswith((".ineq", ".txt", ".func")) or "/" in spec:
            return read_functional(spec)
        raise


def _place(e, ground, labels):
    if labels:
        mapping = {lab: lab for lab in e.ground.labels}
        for item in labels.split(","):
            src, sep, dst = item.partition("=")
            if not sep:
                raise GroundSetError(f"label map entry {item!r} needs 'x=y'")
            mapping[src.strip()] = dst.strip()
        return substitute(e, mapping, ground)
    if e.ground == ground:
        return e
    return embed_functional(e, ground)


def run_implies(opts):
    e = _load_inequality(opts["--ineq"])
    sys_, lines = _load_system(opts, opts["--system"])
    e = _place(e, sys_.ground, opts["--labels"])
    res = implies(sys_, e, timeout=_timeout(opts))
    if isinstance(res, Implied):
        cert = res.certificate
        ok = _verified(opts, cert, sys_)
        if not _emit(opts, {"implied": True, "certificate": cert.as_json(), "verified": cert.verify(sys_)}):
            _header("✅ IMPLIED")
            print(f"{e.pretty()} >= 0")
            for line in lines:
                print(line)
            print("\n📜 CERTIFICATE")
            print(cert.to_text(sys_), end="")
        return EXIT_OK if ok else EXIT_USAGE
    if not _emit(opts, {"implied": False,
                        "counterexample": {v: format_number(x) for v, x in res.counterexample.items()}}):
        _header("❌ NOT IMPLIED")
        print(f"{e.pretty()} >= 0")
        print("Counterexample (main variables):")
        for v in sys_.main:
            if v in res.counterexample:
                print(f"  {v} = {format_number(res.counterexample[v])}")
    return EXIT_NEGATIVE


def run_decompose(opts):
    e = _load_inequality(opts["--ineq"])
    dec = shannon_decompose(e, timeout=_timeout(opts))
    if not dec:
        if not _emit(opts, {"decomposed": False}):
            print(f"❌ {e.tag or e.pretty()} is not a non-negative combination of basic inequalities")
        return EXIT_NEGATIVE
    table = pd.DataFrame([{"basic": b.tag, "weight": format_number(w)} for b, w in dec.terms])
    if not _emit(opts, {"decomposed": True, "total": format_number(dec.total),
                        "terms": table.to_dict(orient="records"), "verified": dec.verify(e)}):
        _header(f"🧩 SHANNON DECOMPOSITION OF {e.tag or 'functional'}")
        print(table.to_string(index=False))
        print(f"\nTotal weight: {format_number(dec.total)}")
        print(f"Check: {'OK' if dec.verify(e) else 'FAILED'}")
    return EXIT_OK


def run_profile(opts):
    d = read_distribution(opts["FILE"], max_cells=_int_opt(opts, "--max-cells"))
    p = profile(d)
    table = pd.DataFrame({"subset": [p.ground.name(m) for m in p.ground.subsets()],
                          "entropy": [round(p(m), 12) for m in p.ground.subsets()]})
    payload = {"profile": table.to_dict(orient="records"), "quasi_uniform": is_quasi_uniform(d)}
    if p.ground.n == 4:
        payload["ingleton"] = [e(p) for e in ingleton_instances(p.ground)]
    if _emit(opts, payload):
        return EXIT_OK
    _header("🎲 ENTROPY PROFILE (bits)")
    print(f"Ground: {d.ground}   alphabets: {' '.join(map(str, d.alphabet_sizes))}")
    print(table.to_string(index=False))
    print(f"\nQuasi-uniform: {'yes' if payload['quasi_uniform'] else 'no'}")
    if "ingleton" in payload:
        print("Ingleton values: " + ", ".join(f"{v:.6f}" for v in payload["ingleton"]))
    return EXIT_OK


def run_precheck(opts):
    seq = read_copy_sequence(opts["SPEC"])
    f = read_polymatroid(opts["--target"]) if opts["--target"] else None
    report = precheck_sequence(seq, f)
    grounds = seq.expanded().grounds()
    rows = []
    for k, advisories in report:
        for a in advisories:
            rows.append({"step": k + 1, "code": a.code, "advice": a.message})
    constructed = None
    if f is not None and seq.steps:
        try:
            g = explicit_copy(f, seq.expanded().steps[0])
            constructed = g.ground.name(g.ground.full)
        except PreconditionFailed as exc:
            logger.debug("no explicit copy: %s", exc)
    if _emit(opts, {"advisories": rows, "explicit_copy": constructed}):
        return EXIT_OK
    _header("🚦 COPY PRECONDITIONS")
    for k, step in enumerate(seq.expanded().steps):
        print(f"Step {k + 1}: {step.describe(grounds[k])}")
    if rows:
        print("\n" + pd.DataFrame(rows).to_string(index=False))
    else:
        print("\nNo advisories")
    if constructed:
        print(f"\n✅ Explicit copy of the target constructed and verified on {constructed}")
    return EXIT_OK


def run_catalog(opts):
    if opts["show"]:
        item = inequality_catalog.get(opts["NAME"])
        if not _emit(opts, {"name": item.name, "ground": str(item.ground), "text": item.text,
                            "note": item.note, "coefficients": {item.ground.name(m): format_number(c)
                                                                for m, c in item.functional.coeffs.items()}}):
            _header(f"📚 {item.name}")
            print(f"{item.text} >= 0")
            print(f"# {item.note}")
            print(item.functional.to_text(), end="")
        return EXIT_OK
    rows = []
    for name in inequality_catalog.names():
        item = inequality_catalog.get(name)
        rows.append({"name": name, "n": item.size, "note": item.note})
    if not _emit(opts, {"entries": rows}):
        _header("📚 INEQUALITY CATALOG")
        print(pd.DataFrame(rows).to_string(index=False))
    return EXIT_OK


def run_rep(opts):
    rep = read_rep(opts["FILE"])
    f = to_polymatroid(rep)
    payload = {"prime": rep.prime, "ranks": {f.ground.name(m): int(f(m)) for m in f.ground.subsets()}}
    if f.ground.n == 4:
        payload["ingleton"] = [format_number(v) for v in ingleton_all(f)]
    ext = None
    if opts["--principal"]:
        seed = _int_opt(opts, "--seed")
        if seed is None:
            raise GroundSetError("--principal draws random vectors; pass --seed")
        alpha = _int_opt(opts, "--alpha")
        if alpha is None:
            raise GroundSetError("--principal needs --alpha")
        ext = generic_principal_extension(rep, opts["--principal"], alpha, "z_", rng_seed=seed)
        g = to_polymatroid(ext)
        payload["extension"] = {g.ground.name(m): int(g(m)) for m in g.ground.subsets()}
    if _emit(opts, payload):
        return EXIT_OK
    _header(f"🧮 LINEAR REPRESENTATION OVER GF({rep.prime})")
    print(_ranks_table(f).to_string(index=False))
    if "ingleton" in payload:
        print(f"\nIngleton values: {', '.join(payload['ingleton'])}")
    if ext is not None:
        print(f"\n✅ Generic principal extension along {opts['--principal']} verified")
        print(_ranks_table(to_polymatroid(ext)).to_string(index=False))
    return EXIT_OK


# =============================================================================
# ENTRY POINT
# =============================================================================

def dispatch(opts):
    if opts["shannon"]:
        return run_shannon(opts)
    if opts["check"]:
        return run_check(opts)
    if opts["eval"]:
        return run_eval(opts)
    if opts["rays"]:
        return run_rays(opts)
    if opts["derive"]:
        return run_system_verb(opts, "🔗 COPY LEMMA SYSTEM")
    if opts["maxe"]:
        return run_system_verb(opts, "🔥 MAXIMUM ENTROPY SYSTEM")
    if opts["gmaxe"]:
        return run_system_verb(opts, "🔥 GENERALIZED MAXIMUM ENTROPY SYSTEM")
    if opts["implies"]:
        return run_implies(opts)
    if opts["decompose"]:
        return run_decompose(opts)
    if opts["profile"]:
        return run_profile(opts)
    if opts["precheck"]:
        return run_precheck(opts)
    if opts["catalog"]:
        return run_catalog(opts)
    if opts["rep"]:
        return run_rep(opts)
    raise GroundSetError("no command given")


def main(args=None):
    try:
        opts = docopt(__doc__, args)
    except DocoptExit as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    level = logging.DEBUG if opts["--verbose"] else logging.WARNING if opts["--quiet"] else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(opts)
    except ResourceCapExceeded as exc:
        logger.error("%s", exc)
        return EXIT_CAP
    except FormatError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except (EntropyToolError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
