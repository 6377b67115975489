# Process startup: logging, argument parsing, exit status.

import logging
import os
import sys

from logging.handlers import RotatingFileHandler

from fusecalc import cli
from fusecalc.config import (
    LOG_DIR, LOG_FILE_BACKUPS, LOG_FILE_MAX_BYTES, LOG_FILE_NAME, LOG_FORMAT,
)

logger = logging.getLogger(__name__)


def setup_logging(verbose=0, trace=False):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    if LOG_DIR:
        os.makedirs(LOG_DIR, exist_ok=True)
        handler = RotatingFileHandler(
            os.path.join(LOG_DIR, LOG_FILE_NAME),
            maxBytes=LOG_FILE_MAX_BYTES, backupCount=LOG_FILE_BACKUPS)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logging.getLogger().addHandler(handler)
    if trace:
        tracer = logging.getLogger('fusecalc.trace')
        tracer.setLevel(logging.INFO)
        tracer.propagate = False
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter('trace: %(message)s'))
        tracer.addHandler(handler)


def main(argv=None):
    args = cli.build_parser().parse_args(argv)
    setup_logging(args.verbose, getattr(args, 'trace', False))
    inputs = getattr(args, 'paths', None) or [getattr(args, 'path', '')]
    logger.info(f'{args.command} {" ".join(inputs)}')
    sys.exit(cli.dispatch(args))
