# Exception hierarchy shared by every stage.
#
# Each class carries a short `verdict` (machine-readable kind, shown by the
# CLI and asserted on in tests) and the process exit code the CLI maps it
# to: 2 for anything wrong with the program text, 1 for failures while
# computing models.

EXIT_STATIC_ERROR = 2
EXIT_RUNTIME_ERROR = 1


class FusecalcError(Exception):
    """Base class for all fusecalc failures."""
    verdict = 'error'
    exit_code = EXIT_RUNTIME_ERROR


class ProgramError(FusecalcError):
    """Something is wrong with the program text itself."""
    verdict = 'program'
    exit_code = EXIT_STATIC_ERROR

    def __init__(self, message, line=None, column=None):
        self.message, self.line, self.column = message, line, column
        if line is not None:
            if column is not None:
                message = f'line {line}, column {column}: {message}'
            else:
                message = f'line {line}: {message}'
        super().__init__(message)


class ParseError(ProgramError):
    verdict = 'syntax'


class RangeRestrictionError(ProgramError):
    """A head (or LET/MAPROLE input) variable is not bound by the body."""
    verdict = 'range_restriction'

    def __init__(self, message, variables, line=None):
        super().__init__(message, line)
        self.variables = sorted(variables)


class SortError(ProgramError):
    """A non-time term sits in a time position (or the reverse)."""
    verdict = 'sort'


class ArityError(ProgramError):
    verdict = 'arity'


class UnknownBuiltinError(ProgramError):
    verdict = 'unknown_builtin'


class UnknownTBoxError(ProgramError):
    verdict = 'unknown_tbox'


class StratificationError(ProgramError):
    """The program is not stratified by time and predicates."""
    verdict = 'sbtp'

    def __init__(self, violations):
        self.violations = list(violations)
        lines = '; '.join(str(v) for v in self.violations)
        super().__init__(f'{len(self.violations)} SBTP violation(s): {lines}')


class EvaluationError(FusecalcError):
    """A body could not be evaluated left to right (unbound input)."""
    verdict = 'evaluation'

    def __init__(self, message, rule_id=None):
        self.rule_id = rule_id
        if rule_id is not None:
            message = f'rule {rule_id}: {message}'
        super().__init__(message)


class StepBudgetExceeded(FusecalcError):
    verdict = 'step_budget'

    def __init__(self, budget, predicate, count):
        self.budget, self.predicate, self.count = budget, predicate, count
        super().__init__(
            f'step budget of {budget} exceeded; most produced predicate is '
            f'{predicate} ({count} atoms)')


class DLUnknownError(FusecalcError):
    """The tableau ran out of budget: the answer is neither SAT nor UNSAT."""
    verdict = 'dl_unknown'


class OracleLimitError(FusecalcError):
    verdict = 'oracle_limit'


class LayerOrderError(FusecalcError):
    """An atom was added to a layer the engine had already closed, or (with
    read recording on) a body read a layer that was still open."""
    verdict = 'layer_order'
