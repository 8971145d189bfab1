#!/usr/bin/env python3
"""
Command-line interface parser for the PLL toolkit.
"""

import argparse
import multiprocessing
import os

from expgraph import DEFAULT_FLOW_CAP
from normalizer import DEFAULT_MAX_STEPS, SYSTEMS
from semantics import DEFAULT_MAX_INDEX, DEFAULT_MULTISET_CAP, DEFAULT_UNIVERSE_LEVEL

FORMATS = ("text", "json", "dot")


def _env_int(name, default):
    """Integer default from the environment; unreadable values fall back to default."""
    value = os.environ.get(name)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        return default


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')
    common.add_argument('--format', default='text', choices=FORMATS, help='Output format (default: text)')
    common.add_argument('--output', '-o', help='Write the result to this file or directory instead of stdout')
    common.add_argument('--jobs', type=int, default=multiprocessing.cpu_count(),
                        help=f'Number of worker threads for batch inputs (default: {multiprocessing.cpu_count()})')
    common.add_argument('--max-steps', type=int, default=_env_int('PLL_MAX_STEPS', DEFAULT_MAX_STEPS),
                        help='Cap on cut-elimination steps (env PLL_MAX_STEPS)')
    common.add_argument('--seed', type=int, default=0, help='Seed for randomized policies and generators')
    return common


def _universe_options(parser):
    parser.add_argument('--level', type=int, default=_env_int('PLL_UNIVERSE_LEVEL', DEFAULT_UNIVERSE_LEVEL),
                        help='Atoms range over D_level (env PLL_UNIVERSE_LEVEL)')
    parser.add_argument('--multiset-cap', type=int, default=_env_int('PLL_MULTISET_CAP', DEFAULT_MULTISET_CAP),
                        help='Largest multiset in the universe (env PLL_MULTISET_CAP)')
    parser.add_argument('--max-index', type=int, default=DEFAULT_MAX_INDEX,
                        help='Largest approximant index tried while stabilizing')


def _batch_options(parser):
    parser.add_argument('--results', help='JSON file recording processed inputs, skipped on later runs')
    parser.add_argument('--force', action='store_true', help='Reprocess inputs already in the results file')


def build_parser():
    common = _common_options()
    parser = argparse.ArgumentParser(
        description='Validate, measure and normalize parsimonious linear logic proofs and their lambda-calculus encodings.')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('check', parents=[common], help='Validate proofs and check the global criteria')
    p.add_argument('inputs', nargs='+', help='Proof files, directories, or catalog:NAME entries')
    p.add_argument('--system', choices=SYSTEMS, help='Require the proofs to belong to this system')
    _batch_options(p)

    p = sub.add_parser('measure', parents=[common], help='Depth, nesting, prebar and cosize of a coderivation')
    p.add_argument('input')

    p = sub.add_parser('truncate', parents=[common], help='Truncate or hypertruncate a coderivation')
    p.add_argument('input')
    p.add_argument('-n', type=int, required=True, help='Truncation index')
    p.add_argument('--hyper', action='store_true', help='Hypertruncate instead of truncate')

    p = sub.add_parser('normalize', parents=[common], help='Cut-eliminate a derivation')
    p.add_argument('input')
    p.add_argument('--strategy', default='exhaustive', choices=('exhaustive', 'shallow', 'lazy'))
    p.add_argument('--policy', default='rightmost', choices=('rightmost', 'random'))
    p.add_argument('--cross-check', action='store_true', help='Replay Phase 2 on hypertruncations')
    p.add_argument('--trace', help='Write one JSON line per step to this file')

    p = sub.add_parser('eval', parents=[common], help='Run a representation proof on encoded inputs')
    p.add_argument('input')
    p.add_argument('--input', dest='values', action='append', default=[], help='Input value (repeatable)')
    p.add_argument('--inputs-file', help='File with one input per line or a JSON list')
    p.add_argument('--kind', choices=('bool', 'nat', 'string'), help='Kind of the expected result')
    p.add_argument('--system', default='pll2', choices=SYSTEMS)

    p = sub.add_parser('rank', parents=[common], help='Exponential graph and rank of a coderivation')
    p.add_argument('input')

    p = sub.add_parser('flows', parents=[common], help='Enumerate the exponential flows of a coderivation')
    p.add_argument('input')
    p.add_argument('--flow-cap', type=int, default=_env_int('PLL_FLOW_CAP', DEFAULT_FLOW_CAP),
                   help='Cap on enumerated flows (env PLL_FLOW_CAP)')

    p = sub.add_parser('typecheck', parents=[common], help='Typecheck a term, or the library with --library')
    p.add_argument('term', nargs='?', help='Term text or a file containing it')
    p.add_argument('--type', dest='expected', help='Expected type')
    p.add_argument('--system', default='nupta2', choices=('pta2', 'nupta2'))
    p.add_argument('--library', action='store_true', help='Check every library term at its declared type')

    p = sub.add_parser('beta', parents=[common], help='Beta-normalize a term')
    p.add_argument('term', help='Term text or a file containing it')
    p.add_argument('--cap', type=int, default=None, help='Cap on contractions')

    p = sub.add_parser('translate', parents=[common], help='Translate fp rules, nu rules, or typed terms')
    p.add_argument('input', help='Proof file, or a term for --mode dagger')
    p.add_argument('--mode', required=True, choices=('fp', 'nu', 'dagger'))
    p.add_argument('--type', dest='expected', help='Type of the term for --mode dagger')

    p = sub.add_parser('sem', parents=[common], help='Relational interpretation of a derivation')
    p.add_argument('input')
    p.add_argument('-n', type=int, help='Approximant index; stabilize when omitted')
    _universe_options(p)

    p = sub.add_parser('invariance', parents=[common], help='Check that cut steps preserve the interpretation')
    p.add_argument('inputs', nargs='+', help='Finite derivation files, directories, or catalog:NAME entries')
    _universe_options(p)
    _batch_options(p)

    p = sub.add_parser('compile-tm', parents=[common], help='Compile a Turing machine into a term')
    p.add_argument('machine', help='Machine description (JSON) or the name of an example machine')
    p.add_argument('--time', default='0,1', help='Time polynomial coefficients, constant first')
    p.add_argument('--space', default='0,1', help='Space polynomial coefficients, constant first')
    p.add_argument('--input', dest='values', action='append', default=[], help='Input string to run (repeatable)')
    p.add_argument('--advice', help='Oracle table file, or comma-separated bits repeated periodically')

    p = sub.add_parser('compile-poly', parents=[common], help='Compile a polynomial into a Horner term')
    p.add_argument('coefficients', help='Comma-separated coefficients, constant first')
    p.add_argument('--at', type=int, action='append', default=[], help='Evaluate at this argument (repeatable)')

    p = sub.add_parser('encode', parents=[common], help='Encode a value as a term')
    p.add_argument('kind', choices=('bool', 'nat', 'string', 'stream'))
    p.add_argument('value', help='Value; for streams comma-separated bits repeated periodically')

    p = sub.add_parser('decode', parents=[common], help='Decode a term as a value')
    p.add_argument('kind', choices=('bool', 'nat', 'string', 'stream'))
    p.add_argument('term', help='Term text or a file containing it')
    p.add_argument('--length', type=int, default=8, help='Stream elements to read')

    p = sub.add_parser('bench', parents=[common], help='Step counts against input length')
    p.add_argument('input')
    p.add_argument('--lengths', default='1..8', help="Input lengths, '1..8' or '1,2,4'")
    p.add_argument('--system', default='pll2', choices=SYSTEMS)
    p.add_argument('--kind', choices=('bool', 'nat', 'string'))
    p.add_argument('--pattern', default='alternating', choices=('alternating', 'zeros', 'ones', 'random'))
    p.add_argument('--expected-degree', type=int, help='Degree the fitted slope must not exceed')

    p = sub.add_parser('gen', parents=[common], help='Generate a random corpus of finite derivations')
    p.add_argument('--count', type=int, default=100)
    p.add_argument('--steps', type=int, default=8, help='Rule templates applied per derivation')
    p.add_argument('--depth', type=int, default=2, help='Depth of random formulas')
    p.add_argument('--closed', action='store_true', help='No hypothesis leaves')
    p.add_argument('--max-size', type=int, default=200)

    return parser


def parse_arguments(argv=None):
    """Parse command-line arguments."""
    parser = build_parser()
    args = parser.parse_args(argv)

    for name in ('max_steps', 'jobs', 'flow_cap', 'multiset_cap', 'max_index', 'cap', 'count', 'max_size'):
        value = getattr(args, name, None)
        if value is not None and value <= 0:
            parser.error(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, 'level', None) is not None and args.level < 0:
        parser.error("--level must be non-negative")
    if getattr(args, 'n', None) is not None and args.n < 0:
        parser.error("-n must be non-negative")

    if args.command == 'gen' and not args.output:
        parser.error("--output is required for gen")
    if args.command == 'typecheck' and not args.library and not args.term:
        parser.error("a term is required unless --library is given")
    if args.command == 'translate' and args.mode != 'dagger' and args.expected:
        parser.error("--type only applies to --mode dagger")
    if args.command == 'eval' and not args.values and not args.inputs_file:
        parser.error("eval needs --input or --inputs-file")
    if args.format == 'dot' and args.command not in ('truncate', 'normalize', 'rank', 'translate'):
        parser.error(f"--format dot is not available for {args.command}")

    return args
