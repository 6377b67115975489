# Command-line surface: `run`, `check` and `dl-check`.
#
# Exit status: 0 when at least one model exists (or the checks pass),
# 1 when every branch closed or a runtime error stopped the search, 2 on
# anything wrong with the program text. Models go to stdout, diagnostics
# (errors, warnings, --explain-strata, --trace) to stderr.
#
# Machine format, one model after the other, reparseable as a program:
#   // model 1
#   Anomaly(51, BrokenCooling).
#   // models: 1

import argparse
import logging
import sys

from dataclasses import dataclass

from fusecalc import config
from fusecalc.bridge import DLCache, induced_abox, monotonicity_lint
from fusecalc.dl import ABox
from fusecalc.engine import compute_possible_models
from fusecalc.errors import (
    EXIT_RUNTIME_ERROR, EXIT_STATIC_ERROR, FusecalcError, StratificationError,
)
from fusecalc.eventcalc import assemble, dump_prelude
from fusecalc.kernel import Interpretation, format_atom
from fusecalc.strat import check_sbtp, compute_strata, explain_strata
from fusecalc.syntax import Program, check_program, parse_file, sorted_atoms

logger = logging.getLogger(__name__)

TEXT = 'text'
MACHINE = 'machine'


@dataclass
class RunConfig:
    paths: list
    first_model: bool = False
    trace: bool = False
    max_steps: int = None
    fmt: str = TEXT
    explain_strata: bool = False
    no_prelude: bool = False
    show: frozenset = None


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'{text!r} is not an integer') from None
    if value <= 0:
        raise argparse.ArgumentTypeError('must be greater than 0')
    return value


def _predicates(text):
    return frozenset(p.strip() for p in text.split(',') if p.strip())


def build_parser():
    parser = argparse.ArgumentParser(
        prog=config.APP_NAME,
        description='Possible models of stratified disjunctive logic programs over '
                    'integer time, with description-logic calls and an event-calculus prelude.')
    parser.add_argument('--version', action='version',
                        version=f'%(prog)s {config.APP_VERSION}')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='log progress (-v) or every layer (-vv) to stderr')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='compute and print possible models')
    run.add_argument('paths', nargs='*', metavar='FILE', help=f'program files ({config.PROGRAM_SUFFIX})')
    models = run.add_mutually_exclusive_group()
    models.add_argument('--all-models', dest='first_model', action='store_false',
                        help='print every possible model (default)')
    models.add_argument('--first-model', dest='first_model', action='store_true',
                        help='stop after the first model found')
    run.set_defaults(first_model=False)
    run.add_argument('--trace', action='store_true', help='log every fired closure to stderr')
    run.add_argument('--max-steps', type=_positive_int, default=None, metavar='N',
                     help=f'closure firing budget (default {config.DEFAULT_MAX_STEPS})')
    run.add_argument('--format', dest='fmt', choices=(TEXT, MACHINE), default=TEXT)
    run.add_argument('--explain-strata', action='store_true',
                     help='print strata and rule pivots to stderr')
    run.add_argument('--no-prelude', action='store_true',
                     help='run without the event-calculus prelude')
    run.add_argument('--dump-prelude', action='store_true',
                     help='print the prelude rules and exit')
    run.add_argument('--show', type=_predicates, default=None, metavar='P1,P2',
                     help='print only atoms of these predicates')

    check = commands.add_parser('check', help='static checks only, no model computation')
    check.add_argument('paths', nargs='+', metavar='FILE')
    check.add_argument('--no-prelude', action='store_true')

    dl_check = commands.add_parser('dl-check', help='satisfiability of TBoxes and fact ABoxes')
    dl_check.add_argument('path', metavar='KBFILE')
    return parser


# ---------- loading ----------

def load(paths, with_prelude=True):
    """Parse and merge the input files, add the prelude, run the static
    checks. Returns (program, warnings, strata)."""
    program = Program()
    for path in paths:
        program = program.merge(parse_file(path))
    program = assemble(program, with_prelude)
    warnings = check_program(program) + monotonicity_lint(program)
    strata = compute_strata(program)
    violations = check_sbtp(program, strata)
    if violations:
        raise StratificationError(violations)
    return program, warnings, strata


def _print_warnings(warnings, err):
    for w in warnings:
        print(f'warning: {w}', file=err)


# ---------- output ----------

def _project(model, show):
    atoms = sorted_atoms(model)
    if show is None:
        return atoms
    return [a for a in atoms if a.pred in show]


def format_models(models, fmt=TEXT, show=None):
    lines = []
    for k, model in enumerate(models, start=1):
        atoms = _project(model, show)
        if fmt == MACHINE:
            lines.append(f'// model {k}')
            lines += [f'{format_atom(a)}.' for a in atoms]
        else:
            lines.append(f'Model {k}:')
            lines += [f'  {format_atom(a)}' for a in atoms]
    if fmt == MACHINE:
        lines.append(f'// models: {len(models)}')
    else:
        lines.append(f'{len(models)} model(s)' if models else 'No models')
    return '\n'.join(lines) + '\n'


# ---------- commands ----------

def run(cfg, out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    program, warnings, strata = load(cfg.paths, not cfg.no_prelude)
    _print_warnings(warnings, err)
    if cfg.explain_strata:
        print(explain_strata(program, strata), file=err)
    models = compute_possible_models(program, strata, max_steps=cfg.max_steps,
                                     trace=cfg.trace, first_model=cfg.first_model)
    out.write(format_models(models, cfg.fmt, cfg.show))
    return 0 if models else EXIT_RUNTIME_ERROR


def check(paths, with_prelude=True, out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    program, warnings, strata = load(paths, with_prelude)
    _print_warnings(warnings, err)
    print(f'ok: {len(program.rules)} rules, {strata.height} strata, '
          f'{len(warnings)} warning(s)', file=out)
    return 0


def dl_check(path, out=None):
    """SAT/UNSAT of every TBox alone and with the fact ABox at each time."""
    out = out or sys.stdout
    program = parse_file(path)
    facts = Interpretation()
    for rule in program.facts():
        if not rule.is_disjunctive:
            for a in rule.head_atoms:
                facts.add(a)
    cache = DLCache()
    all_sat = True
    for name, tbox in sorted(program.tboxes.items()):
        checks = [(f'tbox {name}', ABox())]
        checks += [(f'tbox {name} @ {t}', induced_abox(facts, t)) for t in sorted(facts.times())]
        for label, abox in checks:
            sat = cache.is_satisfiable(abox, tbox)
            all_sat &= sat
            print(f'{label}: {"SAT" if sat else "UNSAT"}', file=out)
    return 0 if all_sat else EXIT_RUNTIME_ERROR


def main(argv=None, out=None, err=None):
    """Parse arguments and dispatch; returns the exit status."""
    return dispatch(build_parser().parse_args(argv), out, err)


def dispatch(args, out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    try:
        if args.command == 'run':
            if args.dump_prelude:
                out.write(dump_prelude())
                return 0
            if not args.paths:
                print('error: no input files', file=err)
                return EXIT_STATIC_ERROR
            cfg = RunConfig(args.paths, args.first_model, args.trace, args.max_steps,
                            args.fmt, args.explain_strata, args.no_prelude, args.show)
            return run(cfg, out, err)
        if args.command == 'check':
            return check(args.paths, not args.no_prelude, out, err)
        return dl_check(args.path, out)
    except StratificationError as e:
        for v in e.violations:
            print(f'error: {v}', file=err)
        return e.exit_code
    except FusecalcError as e:
        print(f'error: {e}', file=err)
        return e.exit_code
    except OSError as e:
        print(f'error: cannot read {e.filename}: {e.strerror}', file=err)
        return EXIT_STATIC_ERROR
