import os
import tempfile
import unittest

from coordination_milp.main import COMMANDS, ArgParseException, build_argparse
from coordination_milp.support.scenario import ScenarioMode, read_scenario

parser = build_argparse()


class GenCommandTestCase(unittest.TestCase):
    def test_basic(self):
        ns = parser.parse_args(["gen", "out.scn"])
        self.assertEqual("out.scn", ns.target)
        self.assertEqual(60, ns.duration)
        self.assertEqual(0.05, ns.rate)
        self.assertIsNone(ns.abstract)
        self.assertEqual(15, ns.v_max)

    def test_abstract(self):
        ns = parser.parse_args(["gen", "out.scn", "--abstract", "4", "--zones", "3", "--seed", "2"])
        self.assertEqual(4, ns.abstract)
        self.assertEqual(3, ns.zones)
        self.assertEqual(2, ns.seed)

    def test_invalid(self):
        with self.assertRaises(ArgParseException):
            parser.parse_args(["gen", "out.scn", "--duration", "forever"])
        with self.assertRaises(ArgParseException):
            parser.parse_args(["gen"])

    def test_execute(self):
        with tempfile.TemporaryDirectory() as directory:
            target = os.path.join(directory, "random.scn")
            ns = vars(parser.parse_args(["gen", target, "--abstract", "3", "--zones", "2", "--seed", "4"]))
            self.assertEqual(0, COMMANDS["gen"].execute(ns))
            scenario = read_scenario(target)
            self.assertEqual(ScenarioMode.ABSTRACT, scenario.mode)
            self.assertEqual(3, len(scenario.robots))
            self.assertEqual(2, len(scenario.zones))

    def test_execute_geometric(self):
        with tempfile.TemporaryDirectory() as directory:
            target = os.path.join(directory, "stream.scn")
            ns = vars(parser.parse_args(["gen", target, "--vehicles", "3", "--routes", "S_S,E_L", "--seed", "1"]))
            self.assertEqual(0, COMMANDS["gen"].execute(ns))
            scenario = read_scenario(target)
            self.assertEqual(ScenarioMode.GEOMETRIC, scenario.mode)
            self.assertEqual(3, len(scenario.robots))
