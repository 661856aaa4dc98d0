from . import SubCommand
from .common import *


class ExportCommand(SubCommand):
    @property
    def name(self):
        return "export"

    def build_argparse(self, subparser):
        export_parser = subparser.add_parser(
            self.name,
            help="Write the model of a scenario for an external MILP solver",
            parents=[parent_parser, input_parser, output_parser, solver_parser],
        )
        export_parser.add_argument(
            "--format", choices=["mps", "lp"], default="mps", help="Default=mps"
        )

    def subexecute(self, ns):
        from coordination_milp.coordinate import scenario_conflicts, scenario_discretization
        from coordination_milp.milp import export_model
        from coordination_milp.model import build_model
        from coordination_milp.support.mps import ModelExportError

        fmt = ns["format"]
        target = self._output_path("model.{}".format(fmt))
        if not self._check_output([target]):
            return 1
        scenario = self._load_scenario(ns["scenario"])
        conflicts = scenario_conflicts(scenario, self.config.resolution)
        disc = scenario_discretization(scenario, self.config)
        model = build_model(scenario.robots, conflicts, disc, self.config.model_options())
        try:
            text = export_model(model, fmt)
        except ModelExportError as e:
            print(str(e))
            return 1
        counts = model.counts()
        self._print_table(
            [(len(scenario.robots), len(conflicts), disc.K, model.num_columns, model.num_rows)],
            ["Robots", "Zones", "K", "Columns", "Rows"],
        )
        logger.debug("Model counts: %s", counts)
        self._write(target, text)
        return 0


SubCommand.register(ExportCommand)

import logging

logger = logging.getLogger(__name__)
