import argparse
import sys
from typing import Optional, Sequence

from coordination_milp.commands import *
from coordination_milp.commands import USAGE_ERROR
from coordination_milp import __version__ as version

PROG = "coordinate-robots"

COMMANDS = {k.name: k for k in [x() for x in SubCommand.__subclasses__()]}


class ArgParseException(Exception):
    def __init__(self, status):
        self.status = status


class NoExitArgumentParser(argparse.ArgumentParser):
    """
    Raises ArgParseException instead of exiting so tests and run() see the status
    """

    def exit(self, status=0, message=None):
        if message:
            self._print_message(message, sys.stderr)
        raise ArgParseException(status)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, "{}: error: {}\n".format(self.prog, message))


def build_argparse():
    parser = NoExitArgumentParser(
        prog=PROG,
        description="Time-optimal coordination of robots on fixed paths",
    )
    parser.add_argument(
        "-v",
        "--version",
        help="Display version",
        action="store_const",
        const=True,
        default=False,
    )
    subparsers = parser.add_subparsers(
        help="Sub commands", dest="command", parser_class=NoExitArgumentParser
    )
    for name in sorted(COMMANDS):
        COMMANDS[name].build_argparse(subparsers)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parses the arguments and runs one subcommand
    :param argv: defaults to sys.argv[1:]
    :return: the process exit status
    """
    parser = build_argparse()
    try:
        ns = vars(parser.parse_args(argv))
    except ArgParseException as e:
        return e.status
    if ns.get("version"):
        print("{} v{}".format(PROG, version))
        return 0
    if ns.get("print_args", False):
        print(ns)
        return 0
    cmd = COMMANDS.get(ns.get("command"))
    if cmd is None:
        parser.print_usage()
        return USAGE_ERROR
    return cmd.execute(ns)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
