"""
Base class for crib-reversal subcommands.

Mirrors the management-command shape: each subcommand module defines a
`Command` with `help`, `add_arguments(parser)` and `handle(**options)`.
"""
import argparse
import logging
import sys
from pathlib import Path

from .. import settings
from ..exceptions import CribError, SolverConvergenceError, UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_SOLVER = 3


class CommandError(CribError):
    """Raised by a command when a numeric check fails."""

    def __init__(self, message: str = 'Numeric check failed'):
        super().__init__(message, code='CHECK_FAILED')


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


class Style:
    """ANSI colouring when writing to a terminal, plain text otherwise."""

    def __init__(self, stream):
        self.enabled = hasattr(stream, 'isatty') and stream.isatty()

    def _wrap(self, code, text):
        return f'\033[{code}m{text}\033[0m' if self.enabled else text

    def SUCCESS(self, text):
        return self._wrap('32;1', text)

    def WARNING(self, text):
        return self._wrap('33;1', text)

    def ERROR(self, text):
        return self._wrap('31;1', text)

    def NOTICE(self, text):
        return self._wrap('36', text)


class OutputWrapper:
    def __init__(self, stream):
        self.stream = stream

    def write(self, text=''):
        self.stream.write(text + '\n')


class BaseCommand:
    help = ''

    def __init__(self, stdout=None, stderr=None):
        self.stdout = OutputWrapper(stdout or sys.stdout)
        self.stderr = OutputWrapper(stderr or sys.stderr)
        self.style = Style(self.stdout.stream)

    def add_arguments(self, parser):
        pass

    def add_base_arguments(self, parser):
        parser.add_argument(
            '--output-dir',
            default=settings.OUTPUT_DIR,
            help=f'Directory for CSV and JSON artifacts (default: {settings.OUTPUT_DIR})',
        )
        parser.add_argument(
            '--seed',
            type=int,
            default=settings.DEFAULT_SEED,
            help=f'Random seed (default: {settings.DEFAULT_SEED})',
        )
        parser.add_argument(
            '--verbosity',
            default=settings.LOG_LEVEL,
            choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
            type=str.upper,
            help='Log level',
        )

    def output_dir(self, options) -> Path:
        path = Path(options['output_dir'])
        path.mkdir(parents=True, exist_ok=True)
        return path

    def handle(self, *args, **options):
        raise NotImplementedError('Subcommands must implement handle()')

    def execute(self, **options) -> int:
        """Run the command and translate errors into exit codes."""
        try:
            self.handle(**options)
        except UsageError as e:
            self.stderr.write(self.style.ERROR(f'Usage error: {e.message}'))
            return EXIT_USAGE
        except SolverConvergenceError as e:
            self.stderr.write(self.style.ERROR(f'Solver did not converge: {e.message}'))
            return EXIT_SOLVER
        except CribError as e:
            self.stderr.write(self.style.ERROR(f'{e.code}: {e.message}'))
            return EXIT_CHECK_FAILED
        return EXIT_OK
