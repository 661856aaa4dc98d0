import argparse

from coordination_milp.support.formatting import duration_from_str
from coordination_milp.support.lp import ENGINES


class DurationType:
    def __call__(self, value):
        try:
            return duration_from_str(value)
        except ValueError:
            raise argparse.ArgumentTypeError("'{}' is not a valid duration".format(value))


class FloatListType:
    def __call__(self, value):
        try:
            return [float(v) for v in value.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError("'{}' is not a comma separated list of numbers".format(value))


class IntListType:
    def __call__(self, value):
        try:
            return [int(v) for v in value.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError("'{}' is not a comma separated list of integers".format(value))


parent_parser = argparse.ArgumentParser(add_help=False)
parent_parser.add_argument("--print-args", action="store_const", const=True, default=False)
parent_parser.add_argument("-n", "--dry-run", action="store_const", const=True, default=False)
parent_parser.add_argument("--config", default=None, help="INI file with [solver] and [logging] sections")
parent_parser.add_argument(
    "--verbose",
    "-v",
    action="store_const",
    const=True,
    default=False,
    help="Log at DEBUG level",
)

input_parser = argparse.ArgumentParser(add_help=False)
input_parser.add_argument("scenario", help="Scenario file or the name of a bundled fixture")

output_parser = argparse.ArgumentParser(add_help=False)
output_parser.add_argument("-o", "--output", default=".", help="Output directory. Default=.")
output_parser.add_argument(
    "-y",
    "--overwrite",
    help="Overwrite output files if they exist",
    action="store_const",
    default=False,
    const=True,
)

# None leaves the value to --config and then to the scenario file
solver_parser = argparse.ArgumentParser(add_help=False)
solver_parser.add_argument("--tau", type=float, default=None, help="Step duration in seconds")
solver_parser.add_argument("--horizon", type=DurationType(), default=None, help="Horizon after the last entry")
solver_parser.add_argument(
    "--force-priorities",
    dest="forced_priorities",
    default=None,
    help="Pin priorities, e.g. 1>3,3>2",
)
solver_parser.add_argument(
    "--no-tiebreak",
    dest="tie_break",
    action="store_const",
    const=False,
    default=None,
    help="Drop the speed tie-break term from the objective",
)
solver_parser.add_argument(
    "--no-cuts",
    dest="cuts",
    action="store_const",
    const=False,
    default=None,
    help="Do not add monotonicity cuts",
)
solver_parser.add_argument(
    "--no-heuristic",
    dest="heuristic",
    action="store_const",
    const=False,
    default=None,
    help="Do not seed the search with robots planned one at a time in entry order",
)
solver_parser.add_argument("--time-limit", type=DurationType(), default=None, help="e.g. 60, 90s or 2m")
solver_parser.add_argument("--node-limit", type=int, default=None)
solver_parser.add_argument("--threads", type=int, default=None, help="Branch-and-bound worker threads")
solver_parser.add_argument("--engine", choices=ENGINES, default=None, help="LP relaxation engine")
solver_parser.add_argument("--resolution", type=float, default=None, help="Collision sampling resolution in m")

__all__ = [
    "DurationType",
    "FloatListType",
    "IntListType",
    "parent_parser",
    "input_parser",
    "output_parser",
    "solver_parser",
]
