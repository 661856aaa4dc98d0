from . import SubCommand
from .common import *


class GenCommand(SubCommand):
    @property
    def name(self):
        return "gen"

    def build_argparse(self, subparser):
        from coordination_milp.support.arrivals import ArrivalModel
        from coordination_milp.support.geometry import DEFAULT_A_MAX, DEFAULT_A_MIN, DEFAULT_V_MAX

        defaults = ArrivalModel()
        gen_parser = subparser.add_parser(
            self.name,
            help="Generate a random scenario",
            parents=[parent_parser],
        )
        gen_parser.add_argument("target", help="Scenario file to write")
        gen_parser.add_argument(
            "-y",
            "--overwrite",
            help="Overwrite the scenario file if it exists",
            action="store_const",
            default=False,
            const=True,
        )
        gen_parser.add_argument("--seed", type=int, default=None)
        gen_parser.add_argument("--tau", type=float, default=None, help="Step duration stored in the scenario")
        gen_parser.add_argument("--horizon", type=DurationType(), default=None)
        gen_parser.add_argument(
            "--duration",
            type=DurationType(),
            default=60.0,
            help="Arrivals are drawn over this duration. Default=60s",
        )
        gen_parser.add_argument(
            "--vehicles", type=int, default=None, help="Draw exactly this many vehicles instead"
        )
        gen_parser.add_argument(
            "--rate",
            type=float,
            default=defaults.rate,
            help="Vehicles per second on each route. Default={}".format(defaults.rate),
        )
        gen_parser.add_argument(
            "--routes",
            default=None,
            help="Comma separated routes such as S_L,E_S. Default=all twelve",
        )
        gen_parser.add_argument(
            "--abstract",
            type=int,
            default=None,
            metavar="N",
            help="Generate N robots on abstract paths with random crossing boxes instead",
        )
        gen_parser.add_argument(
            "--zones", type=int, default=None, help="Number of crossing boxes with --abstract"
        )
        gen_parser.add_argument("--v-max", type=float, default=DEFAULT_V_MAX)
        gen_parser.add_argument("--a-min", type=float, default=DEFAULT_A_MIN)
        gen_parser.add_argument("--a-max", type=float, default=DEFAULT_A_MAX)

    def subexecute(self, ns):
        target = ns["target"]
        if not self._check_output([target]):
            return 1
        try:
            scenario = generate(ns)
        except ValueError as e:
            print(str(e))
            return 1
        self._write(target, dump_scenario(scenario))
        print("{} robots, {} zones".format(len(scenario.robots), len(scenario.zones)))
        return 0


SubCommand.register(GenCommand)

from coordination_milp.experiments import default_zones
from coordination_milp.support.arrivals import ArrivalModel, gen_abstract_scenario, gen_scenario
from coordination_milp.support.scenario import DEFAULT_TAU, dump_scenario


def generate(ns):
    tau = ns["tau"] or DEFAULT_TAU
    if ns["abstract"] is not None:
        n = ns["abstract"]
        zones = default_zones(n) if ns["zones"] is None else ns["zones"]
        kwargs = {}
        if ns["horizon"] is not None:
            kwargs["horizon"] = ns["horizon"]
        return gen_abstract_scenario(
            n,
            zones,
            ns["seed"],
            tau=tau,
            v_max=ns["v_max"],
            a_min=ns["a_min"],
            a_max=ns["a_max"],
            **kwargs
        )
    arrivals = ArrivalModel(
        rate=ns["rate"],
        v_max=ns["v_max"],
        a_min=ns["a_min"],
        a_max=ns["a_max"],
    )
    if ns["routes"]:
        arrivals = arrivals._replace(routes=tuple(r.strip() for r in ns["routes"].split(",")))
    kwargs = {}
    if ns["horizon"] is not None:
        kwargs["horizon"] = ns["horizon"]
    return gen_scenario(arrivals, ns["duration"], ns["seed"], ns["vehicles"], tau=tau, **kwargs)
