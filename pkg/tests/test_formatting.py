import unittest

from coordination_milp.support import formatting


class FormattingTestCase(unittest.TestCase):
    def test_duration_from_str(self):
        self.assertAlmostEqual(1, formatting.duration_from_str("1s"))
        self.assertAlmostEqual(1.5, formatting.duration_from_str("1.5s"))
        self.assertAlmostEqual(61, formatting.duration_from_str("1m1s"))
        self.assertAlmostEqual(1, formatting.duration_from_str("00m1s"))
        self.assertAlmostEqual(3601, formatting.duration_from_str("1h00m1s"))
        self.assertAlmostEqual(3790, formatting.duration_from_str("1h3m10s"))
        self.assertAlmostEqual(3790.01, formatting.duration_from_str("1h3m10.01s"))
        self.assertAlmostEqual(120, formatting.duration_from_str("2m"))
        self.assertAlmostEqual(7.5, formatting.duration_from_str("7.5"))

    def test_duration_invalid(self):
        for text in ("", "abc", "1x", "s", "-3s"):
            with self.subTest(text=text):
                with self.assertRaises(ValueError):
                    formatting.duration_from_str(text)

    def test_duration_to_str(self):
        self.assertEqual("n/a", formatting.duration_to_str(None))
        self.assertEqual("2.500s", formatting.duration_to_str(2.5))
        self.assertEqual("1m01.500s", formatting.duration_to_str(61.5))
        self.assertEqual("1h00m01.000s", formatting.duration_to_str(3601))

    def test_number_to_str(self):
        self.assertEqual("n/a", formatting.number_to_str(None))
        self.assertEqual("9", formatting.number_to_str(9.0))
        self.assertEqual("3.142", formatting.number_to_str(3.14159))
        self.assertEqual("3.14", formatting.number_to_str(3.14159, 3))
