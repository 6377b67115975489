# Golden scenarios under corpus/.
#
# Each `<name>.fmp` program has a `<name>.expected` file: two header lines
#   // args: <extra options for `fusecalc run`>
#   // exit: <status>
# followed by the exact stdout of `fusecalc run <options> <name>.fmp`.

import glob
import io
import logging
import os
import shlex

from dataclasses import dataclass

from fusecalc import cli, config

logger = logging.getLogger(__name__)

_ARGS_HEADER = '// args:'
_EXIT_HEADER = '// exit:'


@dataclass(frozen=True)
class Scenario:
    name: str
    program: str            # path of the .fmp file
    args: tuple
    exit_code: int
    expected: str

    def argv(self):
        return ['run', *self.args, self.program]


def read_scenario(program_path):
    base = program_path[:-len(config.PROGRAM_SUFFIX)]
    with open(base + config.EXPECTED_SUFFIX, encoding='utf-8') as f:
        lines = f.read().splitlines(keepends=True)
    if len(lines) < 2 or not lines[0].startswith(_ARGS_HEADER) or not lines[1].startswith(_EXIT_HEADER):
        raise ValueError(f'{base}{config.EXPECTED_SUFFIX}: missing args/exit header')
    return Scenario(
        name=os.path.basename(base),
        program=program_path,
        args=tuple(shlex.split(lines[0][len(_ARGS_HEADER):])),
        exit_code=int(lines[1][len(_EXIT_HEADER):]),
        expected=''.join(lines[2:]),
    )


def scenario_suite(directory=None):
    """Every program in the corpus directory with its golden output, by name."""
    directory = directory or config.CORPUS_DIR
    paths = sorted(glob.glob(os.path.join(directory, f'*{config.PROGRAM_SUFFIX}')))
    suite = [read_scenario(p) for p in paths]
    logger.debug(f'{len(suite)} scenario(s) in {directory}')
    return suite


def run_scenario(scenario):
    """(exit status, stdout, stderr) of the scenario's CLI run."""
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(scenario.argv(), out=out, err=err)
    return code, out.getvalue(), err.getvalue()
