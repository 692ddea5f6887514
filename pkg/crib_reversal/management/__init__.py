"""
Command-line entry point.

    crib-reversal <subcommand> [options]
"""
import importlib
import logging
import sys
from typing import Optional, Sequence

from ..exceptions import UsageError
from .base import EXIT_USAGE, CommandParser

COMMANDS = {
    'timing': 'timing',
    'bound': 'bound',
    'field': 'field',
    'optimize': 'optimize',
    'ensemble': 'ensemble',
    'propagate': 'propagate',
    'reproduce-paper': 'reproduce_paper',
}


def load_command(name: str, stdout=None, stderr=None):
    module = importlib.import_module(f'{__name__}.commands.{COMMANDS[name]}')
    return module.Command(stdout=stdout, stderr=stderr)


def build_parser(stdout=None, stderr=None):
    parser = CommandParser(
        prog='crib-reversal',
        description='Backward-retrieval design and simulation toolkit',
    )
    subparsers = parser.add_subparsers(dest='subcommand', parser_class=CommandParser)
    commands = {}
    for name in COMMANDS:
        command = load_command(name, stdout=stdout, stderr=stderr)
        sub = subparsers.add_parser(name, help=command.help, description=command.help)
        command.add_base_arguments(sub)
        command.add_arguments(sub)
        commands[name] = command
    return parser, commands


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Parse arguments, run one subcommand and return its exit status."""
    stderr_stream = stderr or sys.stderr
    parser, commands = build_parser(stdout=stdout, stderr=stderr)
    try:
        options = vars(parser.parse_args(argv))
    except UsageError as e:
        stderr_stream.write(f'Usage error: {e.message}\n')
        return EXIT_USAGE

    name = options.pop('subcommand')
    if name is None:
        stderr_stream.write(parser.format_usage())
        return EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, options['verbosity']),
        format='%(levelname)s %(name)s: %(message)s',
        stream=stderr_stream,
    )
    return commands[name].execute(**options)


if __name__ == '__main__':
    sys.exit(main())
