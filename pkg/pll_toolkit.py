#!/usr/bin/env python3
"""
PLL Toolkit: parsimonious linear logic proofs, coderivations and their encodings

This script validates proofs and coderivations against the rules and the global
criteria, measures and truncates them, runs cut elimination (exhaustively or
with the shallow strategy), evaluates representation proofs on encoded inputs,
typechecks and translates lambda terms, compiles Turing machines and
polynomials, and cross-checks cut elimination against the relational
semantics. Batch commands accept directories and run over a thread pool.

Usage:
    python pll_toolkit.py check proofs/ --jobs 4 --results checked.json
    python pll_toolkit.py normalize catalog:d_abs --strategy exhaustive --format json
    python pll_toolkit.py eval --system wrpll notmap.pll --input 01
    python pll_toolkit.py bench parity.pll --lengths 1..8
    python pll_toolkit.py gen --count 1000 --seed 7 --output corpus/
"""

import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List

from tqdm import tqdm

import rules as R
from bench import parse_lengths, run_bench
from catalog import lookup
from cli_parser import parse_arguments
from corpus_finder import expand_inputs
from criteria import criteria_flags, hypertruncate, measure, offending_cycle, truncate
from dagger import translate_dagger
from data_encodings import (
    decode,
    decode_nat,
    declared_types,
    encode,
    encode_nat,
    evaluate_polynomial,
    library_hints,
    polynomial_function,
)
from expgraph import build_exp_graph, enumerate_flows
from generators import generate_corpus
from io_handler import (
    load_inputs,
    load_oracle_table,
    load_results,
    should_process,
    update_results,
    write_json,
    write_text,
)
from lambda_calculus import DEFAULT_BETA_CAP, App, beta_normalize, beta_reduce, parse_term
from lambda_calculus import render as render_term
from normalizer import eval_representation, normalize_finite, shallow_normalize
from proof_script import graph_to_script, load_graph, save_graph
from proofgraph import (
    FINITE,
    NU,
    OPEN,
    REGULAR,
    WEAKLY_REGULAR,
    ProofGraph,
    expand_fp,
    expand_nu,
    graph_to_dot,
    graph_to_json,
    to_graph,
    to_tree,
    validate,
)
from selector import Selector
from semantics import DIFFERENT, EQUAL, Universe, check_all_steps, interp_derivation, stabilize
from syntax import ParseError, PLLError, PreconditionError, render
from turing import (
    compile_function,
    evaluate_function,
    example_machines,
    function_type,
    load_machine,
    reference_function,
)
from type_system import parse_type, render_derivation, render_type, try_typecheck, typecheck

# Set up logging
logger = logging.getLogger(__name__)

SYSTEM_KINDS = {
    "pll2": {FINITE, OPEN},
    "nupll2": {FINITE, OPEN, NU},
    "rpll": {REGULAR},
    "wrpll": {REGULAR, WEAKLY_REGULAR},
}


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def load_source(source: str) -> ProofGraph:
    """A proof file, or catalog:NAME for a built-in example."""
    if source.startswith("catalog:"):
        return lookup(source.split(":", 1)[1])
    return load_graph(source)


def read_text_argument(text: str) -> str:
    """The argument itself, or the contents of the file it names."""
    if os.path.isfile(text):
        with open(text, 'r', encoding='utf-8') as f:
            return f.read()
    return text


def input_value(text):
    """CLI input: n:5 is a natural, anything else a bit string; JSON inputs keep their type."""
    if isinstance(text, str) and text.startswith("n:"):
        try:
            return int(text[2:])
        except ValueError:
            raise ParseError(f"not a natural number: {text!r}") from None
    return text


def parse_bits(text: str) -> List[int]:
    try:
        return [int(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from None


def require_system(g: ProofGraph, system: str):
    if g.kind not in SYSTEM_KINDS[system]:
        raise PreconditionError(f"a {g.kind} graph is not a {system} proof")


def emit(args, data: dict, text: str):
    if args.format == 'json':
        write_json(data, args.output)
    else:
        write_text(text, args.output)


def emit_graph(args, g: ProofGraph, extra: dict = None):
    if args.format == 'json':
        data = graph_to_json(g)
        if extra:
            data = dict(extra, graph=data)
        write_json(data, args.output)
    elif args.format == 'dot':
        write_text(graph_to_dot(g), args.output)
    else:
        write_text(graph_to_script(g), args.output)


def run_batch(args, inputs: List[str], command: str, work: Callable[[str], dict]) -> List[dict]:
    """Apply work to every input on a thread pool, skipping inputs already in the results file."""
    results_file = getattr(args, 'results', None)
    recorded = load_results(results_file)
    pending = [i for i in inputs if i.startswith("catalog:") or should_process(i, command, recorded, args.force)]
    skipped = len(inputs) - len(pending)
    if skipped:
        logger.info(f"Skipping {skipped} inputs already processed (use --force to redo them)")

    def guarded(path: str) -> dict:
        try:
            result = work(path)
        except PLLError as e:
            result = {"input": path, "ok": False, "error": type(e).__name__, "message": str(e)}
        except Exception as e:
            logger.error(f"Error processing {path}: {str(e)}")
            result = {"input": path, "ok": False, "error": type(e).__name__, "message": str(e)}
        if not path.startswith("catalog:"):
            update_results(results_file, path, command, result)
        return result

    reports = []
    with ThreadPoolExecutor(max_workers=args.jobs) as executor:
        with tqdm(total=len(pending), desc=command.capitalize(), unit="proof", disable=len(pending) < 2) as pbar:
            for result in executor.map(guarded, pending):
                reports.append(result)
                pbar.update(1)
    return reports


def batch_inputs(paths: List[str]) -> List[str]:
    catalog = [p for p in paths if p.startswith("catalog:")]
    files = expand_inputs([p for p in paths if not p.startswith("catalog:")])
    return catalog + files


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    def check_one(path: str) -> dict:
        g = load_source(path)
        report = validate(g)
        result = {"input": path, "kind": g.kind, "conclusion": render(list(g.conclusion)),
                  "validation": report.to_json()}
        if not report.valid:
            result["ok"] = False
            return result
        criteria_graph = expand_nu(g) if g.kind in (FINITE, OPEN, NU) else g
        flags = criteria_flags(criteria_graph)
        result["flags"] = flags
        ok = flags["progressing"] and flags["weakly_regular"]
        if not flags["progressing"]:
            result["offending_cycle"] = offending_cycle(criteria_graph)
        if args.system and g.kind not in SYSTEM_KINDS[args.system]:
            result["system_mismatch"] = f"a {g.kind} graph is not a {args.system} proof"
            ok = False
        result["ok"] = ok
        return result

    inputs = batch_inputs(args.inputs)
    if not inputs:
        raise PreconditionError("no inputs to check")
    reports = run_batch(args, inputs, "check", check_one)
    failed = [r for r in reports if not r["ok"]]
    logger.info(f"Check complete: {len(reports) - len(failed)} passed, {len(failed)} failed")

    lines = []
    for r in reports:
        if r["ok"]:
            lines.append(f"{r['input']}: ok ({r['kind']})")
        elif "error" in r:
            lines.append(f"{r['input']}: {r['error']}: {r['message']}")
        elif not r["validation"]["valid"]:
            problems = "; ".join(f"{v['vertex']}: {v['message']}" for v in r["validation"]["violations"])
            lines.append(f"{r['input']}: invalid ({problems})")
        else:
            failing = [k for k, v in r["flags"].items() if not v]
            detail = f", cycle {' -> '.join(r['offending_cycle'])}" if r.get("offending_cycle") else ""
            mismatch = f", {r['system_mismatch']}" if r.get("system_mismatch") else ""
            lines.append(f"{r['input']}: failed {', '.join(failing) or 'system'}{detail}{mismatch}")
    emit(args, {"results": reports, "passed": len(reports) - len(failed), "failed": len(failed)}, "\n".join(lines))
    return 1 if failed else 0


def cmd_measure(args) -> int:
    report = measure(load_source(args.input))
    text = (f"depth {report.depth}, cosize {report.cosize}, base size {report.base_size}, S {report.s}\n"
            f"nwbs: {len(report.nwbs)}, prebar: {[list(a) for a in report.prebar]}\n"
            f"cosize by depth: {report.cosize_at}")
    emit(args, report.to_json(), text)
    return 0


def cmd_truncate(args) -> int:
    g = load_source(args.input)
    result = hypertruncate(g, args.n) if args.hyper else truncate(g, args.n)
    logger.info(f"{'Hyper' if args.hyper else ''}truncation at {args.n}: {len(result.vertices)} vertices")
    emit_graph(args, result)
    return 0


def cmd_normalize(args) -> int:
    g = load_source(args.input)
    if args.strategy == 'shallow' or g.kind in (REGULAR, WEAKLY_REGULAR):
        if args.strategy != 'shallow':
            logger.info(f"A {g.kind} graph is normalized with the shallow strategy")
        normal, trace = shallow_normalize(g, args.max_steps, cross_check=args.cross_check)
    else:
        normal, trace = normalize_finite(g, args.max_steps, policy=args.policy, seed=args.seed,
                                         postpone_promotions=args.strategy == 'lazy')
    if args.trace:
        write_text(trace.to_jsonl(), args.trace)
    logger.info(f"Normalized in {len(trace.steps)} steps ({len(trace.rounds)} rounds), "
                f"cubic bound {trace.cubic_bound}")
    emit_graph(args, to_graph(normal, cycles=False), {"trace": trace.to_json()})
    return 0


def cmd_eval(args) -> int:
    g = load_source(args.input)
    require_system(g, args.system)
    values = [input_value(v) for v in args.values]
    if args.inputs_file:
        values.extend(input_value(v) for v in load_inputs(args.inputs_file))
    value, trace = eval_representation(g, values, args.system, args.kind, args.max_steps)
    emit(args, {"inputs": values, "value": value, "steps": len(trace.steps), "trace": trace.to_json()}, str(value))
    return 0


def cmd_rank(args) -> int:
    eg = build_exp_graph(load_source(args.input))
    if args.format == 'dot':
        write_text(eg.to_dot(), args.output)
        return 0
    data = {"rank": eg.rank(), "nodes": len(eg.nodes), "edges": eg.graph.number_of_edges(),
            "nwbs": [list(a) for a in eg.nwbs()]}
    emit(args, data, f"rank {data['rank']} ({data['nodes']} exponential nodes, {len(data['nwbs'])} nwbs)")
    return 0


def cmd_flows(args) -> int:
    eg = build_exp_graph(load_source(args.input))
    flows = enumerate_flows(eg, args.flow_cap)
    lines = []
    for flow in flows:
        path = " -> ".join(f"{'.'.join(map(str, a)) or 'root'}:{p}" for a, p in flow.nodes)
        lines.append(f"b={flow.b_count} balanced={flow.balanced}  {path}")
    emit(args, {"rank": eg.rank(), "flows": [f.to_json() for f in flows]}, "\n".join(lines) or "no flows")
    return 0


def cmd_typecheck(args) -> int:
    hints = library_hints()
    if args.library:
        rows, failures = [], 0
        for name, (term, expected) in declared_types().items():
            d, error = try_typecheck(term, expected, args.system, hints=hints)
            rows.append({"name": name, "type": render_type(expected), "ok": d is not None, "error": error})
            failures += d is None
        text = "\n".join(f"{r['name']:>10} : {r['type']}  {'ok' if r['ok'] else 'FAILED ' + r['error']}" for r in rows)
        emit(args, {"library": rows}, text)
        return 1 if failures else 0
    term = parse_term(read_text_argument(args.term))
    expected = parse_type(args.expected) if args.expected else None
    d = typecheck(term, expected, args.system, hints=hints)
    emit(args, d.to_json(), d.judgement() + ("\n" + render_derivation(d) if args.verbose else ""))
    return 0


def cmd_beta(args) -> int:
    term = parse_term(read_text_argument(args.term))
    result = beta_reduce(term, args.cap or DEFAULT_BETA_CAP)
    emit(args, result.to_json(), f"{render_term(result.term)}\n({result.steps} steps)")
    return 0


def cmd_translate(args) -> int:
    if args.mode == 'dagger':
        term = parse_term(read_text_argument(args.input))
        expected = parse_type(args.expected) if args.expected else None
        d = typecheck(term, expected, "nupta2", hints=library_hints())
        result = translate_dagger(d)
    else:
        g = load_source(args.input)
        result = expand_fp(g) if args.mode == 'fp' else expand_nu(g)
    logger.info(f"Translated into a {result.kind} graph with {len(result.vertices)} vertices")
    emit_graph(args, result)
    return 0


def _universe(args) -> Universe:
    return Universe(args.level, args.multiset_cap)


def cmd_sem(args) -> int:
    g = load_source(args.input)
    universe = _universe(args)
    if args.n is not None:
        points = interp_derivation(g, args.n, universe)
        data = dict(points.to_json(), n=args.n, universe=universe.to_json())
        flag = " (truncated)" if points.truncated else ""
        text = f"[[D]]_{args.n} has {len(points)} points{flag}\n" + "\n".join(
            repr(p) for p in points.sorted_points()[:50])
        emit(args, data, text)
        return 0
    approximants = stabilize(g, universe, args.max_index)
    data = dict(approximants.to_json(), universe=universe.to_json())
    if approximants.stable:
        text = f"stable from n = {approximants.stable_at} with {len(approximants.final)} points"
    else:
        text = f"not stable within {args.max_index} indices"
    text += f"; sizes {approximants.sizes}; monotone {approximants.monotone}; truncated {approximants.truncated}"
    emit(args, data, text)
    return 0 if approximants.stable else 1


def cmd_invariance(args) -> int:
    universe = _universe(args)

    def check_one(path: str) -> dict:
        g = load_source(path)
        if g.kind not in (FINITE, OPEN, NU):
            raise PreconditionError(f"invariance is checked on finite derivations, got a {g.kind} graph")
        verdicts = check_all_steps(to_tree(g), universe, args.max_index)
        counts: Dict[str, int] = {}
        for v in verdicts:
            counts[v.verdict] = counts.get(v.verdict, 0) + 1
        return {"input": path, "ok": not counts.get(DIFFERENT), "counts": counts,
                "steps": [v.to_json() for v in verdicts]}

    inputs = batch_inputs(args.inputs)
    reports = run_batch(args, inputs, "invariance", check_one)
    equal = sum(r.get("counts", {}).get(EQUAL, 0) for r in reports)
    failed = [r for r in reports if not r["ok"]]
    logger.info(f"Invariance: {equal} steps with equal interpretations, {len(failed)} inputs failed")
    lines = [f"{r['input']}: {r.get('counts', r.get('message'))}" for r in reports]
    emit(args, {"results": reports, "equal_steps": equal, "failed": len(failed)}, "\n".join(lines))
    return 1 if failed else 0


def _advice(text: str):
    if text is None:
        return None
    if os.path.isfile(text):
        return Selector.from_table(2, load_oracle_table(text))
    return Selector.periodic(2, (), parse_bits(text))


def cmd_compile_tm(args) -> int:
    machines = example_machines()
    machine = machines[args.machine] if args.machine in machines else load_machine(args.machine)
    time, space = parse_bits(args.time), parse_bits(args.space)
    advice = _advice(args.advice)
    term = compile_function(machine, time, space, advice)
    runs, disagreements = [], 0
    for s in args.values:
        got = evaluate_function(machine, time, space, s, advice)
        expected = reference_function(machine, time, space, s, advice)
        runs.append({"input": s, "output": got, "reference": expected, "agree": got == expected})
        disagreements += got != expected
    data = {"machine": machine.name, "type": render_type(function_type(machine, time, space)),
            "term": render_term(term), "runs": runs}
    lines = [f"{machine.name} : {data['type']}"]
    lines += [f"{r['input']!r} -> {r['output']!r}" + ("" if r["agree"] else f" (simulator: {r['reference']!r})")
              for r in runs]
    if not runs:
        lines.append(data["term"])
    emit(args, data, "\n".join(lines))
    return 1 if disagreements else 0


def cmd_compile_poly(args) -> int:
    coefficients = parse_bits(args.coefficients)
    term = polynomial_function(coefficients)
    runs, wrong = [], 0
    for n in args.at:
        got = decode_nat(beta_normalize(App(term, encode_nat(n))))
        expected = evaluate_polynomial(coefficients, n)
        runs.append({"at": n, "value": got, "expected": expected})
        wrong += got != expected
    text = render_term(term) + "".join(f"\nP({r['at']}) = {r['value']}" for r in runs)
    emit(args, {"coefficients": coefficients, "term": render_term(term), "runs": runs}, text)
    return 1 if wrong else 0


def cmd_encode(args) -> int:
    value = args.value
    if args.kind == 'stream':
        value = Selector.periodic(2, (), parse_bits(value))
    encoded = encode(args.kind, value)
    emit(args, encoded.to_json(), f"{render_term(encoded.term)} : {render_type(encoded.type)}")
    return 0


def cmd_decode(args) -> int:
    term = parse_term(read_text_argument(args.term))
    value = decode(term, args.kind, length=args.length)
    emit(args, {"kind": args.kind, "value": value}, str(value))
    return 0


def cmd_bench(args) -> int:
    g = load_source(args.input)
    require_system(g, args.system)
    report = run_bench(g, parse_lengths(args.lengths), args.system, args.kind, args.pattern, args.seed,
                       args.max_steps, args.jobs, args.expected_degree, show_progress=True)
    emit(args, report.to_json(), report.table())
    return 0 if report.within_bound in (None, True) else 1


def cmd_gen(args) -> int:
    corpus = generate_corpus(args.seed, args.count, args.steps, args.depth, not args.closed, args.max_size)
    os.makedirs(args.output, exist_ok=True)
    suffix = ".json" if args.format == 'json' else ".pll"
    for k, proof in enumerate(tqdm(corpus, desc="Writing", unit="proof")):
        save_graph(to_graph(proof, cycles=False), os.path.join(args.output, f"gen_{args.seed}_{k:05d}{suffix}"))
    cuts = sum(R.count_rules(p, {"cut"}) for p in corpus)
    logger.info(f"Wrote {len(corpus)} derivations with {cuts} cuts to {args.output}")
    return 0


COMMAND_HANDLERS: Dict[str, Callable] = {
    "check": cmd_check,
    "measure": cmd_measure,
    "truncate": cmd_truncate,
    "normalize": cmd_normalize,
    "eval": cmd_eval,
    "rank": cmd_rank,
    "flows": cmd_flows,
    "typecheck": cmd_typecheck,
    "beta": cmd_beta,
    "translate": cmd_translate,
    "sem": cmd_sem,
    "invariance": cmd_invariance,
    "compile-tm": cmd_compile_tm,
    "compile-poly": cmd_compile_poly,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "bench": cmd_bench,
    "gen": cmd_gen,
}


def main(argv=None) -> int:
    """Main entry point for the script."""
    args = parse_arguments(argv)

    # Set up logging
    log_level = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    try:
        return COMMAND_HANDLERS[args.command](args)
    except PLLError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        if args.format == 'json':
            error = {"error": type(e).__name__, "message": str(e)}
            if isinstance(e, ParseError) and e.line is not None:
                error.update(line=e.line, column=e.column)
            write_json(error)
        return 1
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {str(e)}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
