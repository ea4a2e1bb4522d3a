"""Command-line entry point.

Exit codes: 0 success, 1 usage or missing input, 2 parse failure or fatal
diagnostic, 3 benchmark parity failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys

from . import abox, bench, express, psd, sparql, step, synthetic, tbox, turtle
from .store import MaterializationError, Rule, Store, materialize, rules_from_store

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_PARITY = 0, 1, 2, 3

log = logging.getLogger("ifcwod")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _need(path, what="file"):
    if path is not None and not os.path.exists(path):
        raise UsageError(f"{what} not found: {path}")
    return path


def _write_graph(graph, out, fmt=None):
    fmt = fmt or (turtle.format_for_path(out) if out else "turtle")
    text = turtle.serialize(graph, fmt)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_graph(path):
    with open(path, encoding="utf-8") as fh:
        return turtle.parse(fh.read(), turtle.format_for_path(path))


def _log_diagnostic(d):
    if isinstance(d, express.Diagnostic):
        level = logging.ERROR if d.severity == "error" else logging.WARNING
        log.log(level, "%s%s", f"line {d.line}: " if d.line else "", d.message)
    else:
        log.warning("%s", d)


def _characteristics(path):
    if not path:
        return []
    with open(_need(path), encoding="utf-8") as fh:
        return tbox.parse_characteristics(fh.read())


# --- subcommands -----------------------------------------------------------

def cmd_derive_tbox(args):
    schema = express.read_schema(_need(args.schema))
    warnings = []
    g = tbox.core_tbox(args.ifcowl) if not args.no_core else tbox.base_graph(args.ifcowl)
    g = g | tbox.derive_relationship_properties(schema, args.ifcowl, warnings)
    for d in schema.diagnostics + warnings:
        _log_diagnostic(d)
    tbox.apply_characteristics(g, _characteristics(args.characteristics))
    _write_graph(g, args.out, args.format)
    return EXIT_OK


def cmd_derive_psets(args):
    docs = psd.read_psd_dir(_need(args.psd, "PSD path"), parallel=args.parallel)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for doc in docs:
            _write_graph(tbox.map_psd(doc, args.ifcowl), os.path.join(args.out_dir, f"{doc.name}.ttl"))
        return EXIT_OK
    merged = tbox.base_graph(args.ifcowl)
    props = []
    for doc in docs:
        merged = merged | tbox.map_psd(doc, args.ifcowl)
        props += tbox.pset_properties(doc, args.ifcowl)
    tbox.check_unique(props)
    _write_graph(merged, args.out, args.format)
    return EXIT_OK


def cmd_convert(args):
    schema = express.read_schema(_need(args.schema))
    model = step.read_spf(_need(args.input, "STEP file"))
    for w in model.warnings:
        log.warning("%s", w)
    docs = psd.read_psd_dir(_need(args.psd, "PSD path")) if args.psd else []
    t = tbox.forge(schema, docs, args.ifcowl)
    for extra in args.tbox or ():
        t = t | _read_graph(_need(extra))
    cfg = abox.ConversionConfig(mode=args.mode, base=args.base, ifcowl=args.ifcowl,
                                flatten_fixed_lists=not args.no_flatten, value_node_policy=args.value_nodes)
    diags = abox.Diagnostics()
    g = abox.convert(model, schema, t, cfg, diags)
    if args.with_tbox:
        g = g | t
    _write_graph(g, args.out, args.format)
    return EXIT_PARSE if diags.errors else EXIT_OK


def cmd_infer(args):
    g = tbox.base_graph()
    for path in [args.input] + (args.tbox or []):
        g = g | _read_graph(_need(path))
    store = Store(g)
    rules = rules_from_store(store) if not args.no_owl else []
    for entry in _characteristics(args.characteristics):
        if entry[0] in ("transitive", "symmetric", "inverse"):
            rules.append(Rule(entry[0], *entry[1:]))
    materialize(store, rules, budget=args.budget)
    _write_graph(store.to_graph(g.prefixes), args.out, args.format)
    return EXIT_OK


def cmd_query(args):
    g = tbox.base_graph()
    for path in args.data:
        g = g | _read_graph(_need(path))
    with open(_need(args.query, "query file"), encoding="utf-8") as fh:
        q = sparql.parse_query(fh.read())
    report = sparql.evaluate(Store(g), q)
    sys.stdout.write(sparql.to_tsv(report))
    return EXIT_OK


def cmd_bench(args):
    spec = bench.load_spec(_need(args.spec, "bench spec"))
    if args.repetitions is not None:
        spec.repetitions = args.repetitions
    if args.parallel:
        spec.parallel = True
    spec.__post_init__()
    for pair in spec.pairs:
        _need(pair.baseline, "query file")
        _need(pair.ifcwod, "query file")
    report = bench.run_bench(spec)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    print(bench.format_table(report))
    return EXIT_OK if report["summary"]["failed"] == 0 else EXIT_PARITY


def cmd_generate(args):
    params = synthetic.SyntheticParams(
        walls=args.walls, external_walls=args.external_walls, doors=args.doors,
        doors_with_reference=args.doors_with_reference, spaces=args.spaces, spaces_above=args.spaces_above,
        processes=args.processes, threshold=args.threshold, seed=args.seed)
    text = step.write_spf(synthetic.generate(params))
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(json.dumps(synthetic.expected_counts(params)), file=sys.stderr)
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def build_parser():
    p = _Parser(prog="ifcwod", description="IFC to RDF with direct relationship and property-set properties.")
    p.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    p.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out_opts(sp):
        sp.add_argument("--out", "-o", help="output file (format from extension; stdout if omitted)")
        sp.add_argument("--format", choices=turtle.FORMATS, help="override the output format")
        sp.add_argument("--ifcowl", default=tbox.DEFAULT_IFCOWL, help="ifcOWL namespace IRI")

    sp = sub.add_parser("derive-tbox", help="EXPRESS schema -> core and relationship TBox")
    sp.add_argument("schema", help="EXPRESS .exp file")
    sp.add_argument("--characteristics", help="file of transitive/symmetric/inverse property typings")
    sp.add_argument("--no-core", action="store_true", help="omit the core property vocabulary")
    out_opts(sp)
    sp.set_defaults(func=cmd_derive_tbox)

    sp = sub.add_parser("derive-psets", help="PSD XML files -> property-set TBox")
    sp.add_argument("psd", help="PSD file or directory of PSD files")
    sp.add_argument("--out-dir", help="write one Turtle file per property set instead of one merged graph")
    sp.add_argument("--parallel", action="store_true", help="parse PSD files concurrently")
    out_opts(sp)
    sp.set_defaults(func=cmd_derive_psets)

    sp = sub.add_parser("convert", help="STEP physical file -> RDF instance data")
    sp.add_argument("input", help="IFC (.ifc) file")
    sp.add_argument("--schema", required=True, help="EXPRESS .exp file")
    sp.add_argument("--psd", help="PSD file or directory")
    sp.add_argument("--tbox", action="append", help="extra TBox file (Turtle or N-Triples); repeatable")
    sp.add_argument("--mode", choices=abox.MODES, default="both")
    sp.add_argument("--base", default=abox.DEFAULT_BASE, help="instance IRI base")
    sp.add_argument("--value-nodes", choices=abox.POLICIES, default="literal_unless_unit")
    sp.add_argument("--no-flatten", action="store_true", help="keep coordinates as index-suffixed attributes only")
    sp.add_argument("--with-tbox", action="store_true", help="include the forged TBox in the output")
    out_opts(sp)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("infer", help="materialize transitive, sub-property and inverse closures")
    sp.add_argument("input", help="RDF file (Turtle or N-Triples)")
    sp.add_argument("--tbox", action="append", help="TBox file whose OWL typings drive the rules; repeatable")
    sp.add_argument("--characteristics", help="file of extra property typings")
    sp.add_argument("--no-owl", action="store_true", help="ignore OWL typings found in the data")
    sp.add_argument("--budget", type=int, help="abort when the store exceeds this many triples")
    out_opts(sp)
    sp.set_defaults(func=cmd_infer)

    sp = sub.add_parser("query", help="evaluate one query file and print sorted TSV")
    sp.add_argument("query", help=".rq file")
    sp.add_argument("data", nargs="+", help="RDF files")
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("bench", help="run paired queries and report parity, pattern counts and timings")
    sp.add_argument("spec", nargs="?", default=os.path.join(bench.DATA_DIR, "bench.ini"), help="bench spec (.ini)")
    sp.add_argument("--json", help="write the JSON report here")
    sp.add_argument("--repetitions", type=int, help="override the timed repetitions")
    sp.add_argument("--parallel", action="store_true", help="run pairs concurrently (timings not comparable)")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("generate", help="write a seeded synthetic IFC model")
    d = synthetic.SyntheticParams()
    for name in ("walls", "external_walls", "doors", "doors_with_reference", "spaces", "spaces_above",
                 "processes", "seed"):
        sp.add_argument("--" + name.replace("_", "-"), type=int, default=getattr(d, name))
    sp.add_argument("--threshold", type=float, default=d.threshold)
    sp.add_argument("--out", "-o", help="output .ifc file (stdout if omitted)")
    sp.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"ifcwod: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, configparser.Error, MaterializationError) as e:
        # every parser error (EXPRESS, STEP, PSD, RDF, query, spec) derives from ValueError
        print(f"ifcwod: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"ifcwod: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
