from typing import Tuple

from pyparsing import *

ParserElement.enablePackrat()

robot_id = Word(alphanums + "_-")
precedence = Group(robot_id + Suppress(oneOf("> ≻")) + robot_id)
precedence_list = delimitedList(precedence, delim=",")


class PriorityParseError(Exception):
    pass


def parse_priorities(text: str) -> Tuple[Tuple[str, str], ...]:
    """
    Parses "1>3,3>2" into (holder, other) pairs
    """
    if not text or not text.strip():
        return ()
    try:
        parsed = precedence_list.parseString(text, parseAll=True)
    except ParseException as e:
        raise PriorityParseError("Invalid priority list '{}': {}".format(text, e))
    pairs = tuple((str(p[0]), str(p[1])) for p in parsed)
    for holder, other in pairs:
        if holder == other:
            raise PriorityParseError("Robot {} cannot have priority over itself".format(holder))
    return pairs


def format_priorities(pairs) -> str:
    return ",".join("{}>{}".format(holder, other) for holder, other in pairs)
