import re
from typing import List, NamedTuple

import numpy as np
from pyparsing import *
from scipy import sparse

ParserElement.enablePackrat()

NAME_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ModelExportError(Exception):
    pass


class ParsedModel(NamedTuple):
    name: str
    column_names: List[str]
    row_names: List[str]
    c: np.ndarray
    A: sparse.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    binary: np.ndarray


def _num(value: float) -> str:
    return "{:.17g}".format(float(value))


def _names(model):
    if not model.columns:
        raise ModelExportError("Model has no columns")
    if not model.constraints:
        raise ModelExportError("Model has no rows")
    columns = [col.index.name for col in model.columns]
    rows = ["{}_{}".format(con.tag, n) for n, con in enumerate(model.constraints)]
    return columns, rows


def write_mps(model, name: str = "COORDINATION") -> str:
    """
    Free-field MPS with an OBJSENSE section. Binary runs are wrapped in INTORG/INTEND
    markers and bounded by BV.
    """
    columns, rows = _names(model)
    entries = [[] for _ in columns]
    for r, con in enumerate(model.constraints):
        for c, v in sorted(con.coefficients.items()):
            entries[c].append((rows[r], v))

    lines = ["NAME {}".format(name), "OBJSENSE", "    MAX", "ROWS", " N  OBJ"]
    for r, con in enumerate(model.constraints):
        lines.append(" {}  {}".format(con.sense.mps_code, rows[r]))
    lines.append("COLUMNS")
    in_marker = False
    markers = 0
    for c, col in enumerate(model.columns):
        if col.is_binary != in_marker:
            lines.append(
                "    MARKER{0} 'MARKER' '{1}'".format(markers, "INTORG" if col.is_binary else "INTEND")
            )
            markers += 1
            in_marker = col.is_binary
        cells = []
        if c in model.objective:
            cells.append(("OBJ", model.objective[c]))
        cells.extend(entries[c])
        if not cells:
            cells.append(("OBJ", 0.0))
        for row, value in cells:
            lines.append("    {} {} {}".format(columns[c], row, _num(value)))
    if in_marker:
        lines.append("    MARKER{0} 'MARKER' 'INTEND'".format(markers))
    lines.append("RHS")
    for r, con in enumerate(model.constraints):
        if con.rhs != 0:
            lines.append("    RHS {} {}".format(rows[r], _num(con.rhs)))
    lines.append("BOUNDS")
    for c, col in enumerate(model.columns):
        if col.lower == col.upper:
            lines.append(" FX BND {} {}".format(columns[c], _num(col.lower)))
        elif col.is_binary and col.lower == 0 and col.upper == 1:
            lines.append(" BV BND {}".format(columns[c]))
        else:
            lines.append(" LO BND {} {}".format(columns[c], _num(col.lower)))
            lines.append(" UP BND {} {}".format(columns[c], _num(col.upper)))
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def _expression(coefficients, columns) -> str:
    terms = []
    for c, v in sorted(coefficients.items()):
        terms.append("{} {} {}".format("-" if v < 0 else "+", _num(abs(v)), columns[c]))
    return " ".join(terms)


def write_lp(model, name: str = "COORDINATION") -> str:
    """
    CPLEX-style LP text. Every column appears in Bounds, in column order.
    """
    columns, rows = _names(model)
    for n in columns:
        if not NAME_PATTERN.match(n):
            raise ModelExportError("Column name {} is not valid LP text".format(n))
    objective = {c: v for c, v in model.objective.items() if v != 0}
    lines = ["\\ {}".format(name), "Maximize"]
    lines.append(" obj: {}".format(_expression(objective or {0: 0.0}, columns)))
    lines.append("Subject To")
    for r, con in enumerate(model.constraints):
        lines.append(
            " {}: {} {} {}".format(
                rows[r], _expression(con.coefficients, columns), con.sense.symbol, _num(con.rhs)
            )
        )
    lines.append("Bounds")
    for c, col in enumerate(model.columns):
        if col.lower == col.upper:
            lines.append(" {} = {}".format(columns[c], _num(col.lower)))
        else:
            lines.append(" {} <= {} <= {}".format(_num(col.lower), columns[c], _num(col.upper)))
    binaries = [columns[c] for c, col in enumerate(model.columns) if col.is_binary]
    if binaries:
        lines.append("Binaries")
        for n in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[n : n + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def _assemble(name, column_names, row_names, objective, entries, senses, rhs, lower, upper, binary):
    index = {n: i for i, n in enumerate(column_names)}
    row_index = {n: i for i, n in enumerate(row_names)}
    c = np.zeros(len(column_names))
    for col, value in objective.items():
        c[index[col]] = value
    data, rr, cc = [], [], []
    for row, col, value in entries:
        rr.append(row_index[row])
        cc.append(index[col])
        data.append(value)
    A = sparse.csr_matrix((data, (rr, cc)), shape=(len(row_names), len(column_names)))
    return ParsedModel(
        name,
        list(column_names),
        list(row_names),
        c,
        A,
        np.array([senses[r] for r in row_names], dtype="<U1"),
        np.array([rhs.get(r, 0.0) for r in row_names], dtype=float),
        np.array([lower[n] for n in column_names], dtype=float),
        np.array([upper[n] for n in column_names], dtype=float),
        np.array([binary.get(n, False) for n in column_names], dtype=bool),
    )


def read_mps(text: str) -> ParsedModel:
    name = ""
    section = None
    objective_row = None
    row_names, senses = [], {}
    column_names = []
    objective, entries, rhs = {}, [], {}
    lower, upper, binary = {}, {}, {}
    integer = False
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        fields = raw.split()
        if not raw[0].isspace():
            section = fields[0]
            if section == "NAME":
                name = fields[1] if len(fields) > 1 else ""
            elif section == "ENDATA":
                break
            continue
        if section == "OBJSENSE":
            if fields[0] != "MAX":
                raise ValueError("Only maximization models are read, got {}".format(fields[0]))
        elif section == "ROWS":
            if fields[0] == "N":
                objective_row = fields[1]
            else:
                row_names.append(fields[1])
                senses[fields[1]] = fields[0]
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1] == "'MARKER'":
                integer = fields[2] == "'INTORG'"
                continue
            col = fields[0]
            if col not in lower:
                column_names.append(col)
                lower[col], upper[col] = 0.0, np.inf
                binary[col] = integer
            for row, value in zip(fields[1::2], fields[2::2]):
                if row == objective_row:
                    objective[col] = objective.get(col, 0.0) + float(value)
                elif float(value) != 0:
                    entries.append((row, col, float(value)))
        elif section == "RHS":
            for row, value in zip(fields[1::2], fields[2::2]):
                rhs[row] = float(value)
        elif section == "BOUNDS":
            kind, col = fields[0], fields[2]
            if kind == "BV":
                lower[col], upper[col] = 0.0, 1.0
                binary[col] = True
            elif kind == "FX":
                lower[col] = upper[col] = float(fields[3])
            elif kind == "LO":
                lower[col] = float(fields[3])
            elif kind == "UP":
                upper[col] = float(fields[3])
            else:
                raise ValueError("Unsupported bound type {}".format(kind))
    return _assemble(name, column_names, row_names, objective, entries, senses, rhs, lower, upper, binary)


number = Regex(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?|[+-]?inf").setParseAction(
    lambda t: float(t[0])
)
identifier = Regex(r"[A-Za-z_][A-Za-z0-9_]*")
sign = oneOf("+ -")
term = Group(sign + Optional(number, default=1.0) + identifier)
expression = Group(OneOrMore(term))
relation = oneOf("<= >= =")

lp_objective = (
    Suppress(CaselessKeyword("Maximize"))
    + Suppress(identifier + Literal(":"))
    + expression("objective")
)
lp_row = Group(identifier + Suppress(":") + expression + relation + number)
lp_bound = Group(
    number + Suppress("<=") + identifier + Suppress("<=") + number
    | identifier + Suppress("=") + number
)
lp_file = (
    lp_objective
    + Suppress(CaselessKeyword("Subject") + CaselessKeyword("To"))
    + Group(ZeroOrMore(lp_row))("rows")
    + Suppress(CaselessKeyword("Bounds"))
    + Group(ZeroOrMore(lp_bound))("bounds")
    + Optional(
        Suppress(CaselessKeyword("Binaries"))
        + Group(ZeroOrMore(~CaselessKeyword("End") + identifier))("binaries")
    )
    + Suppress(CaselessKeyword("End"))
)
lp_comment = Regex(r"\\[^\n]*")
lp_file.ignore(lp_comment)

_LP_SENSES = {"<=": "L", ">=": "G", "=": "E"}


def _terms(expr):
    for s, value, col in expr:
        yield col, -value if s == "-" else value


def read_lp(text: str) -> ParsedModel:
    match = re.match(r"\\\s*(\S*)", text)
    name = match.group(1) if match else ""
    parsed = lp_file.parseString(text, parseAll=True)
    objective = {}
    for col, value in _terms(parsed["objective"]):
        objective[col] = objective.get(col, 0.0) + value
    row_names, senses, rhs, entries = [], {}, {}, []
    for row in parsed["rows"]:
        row_name, expr, rel, value = row
        row_names.append(row_name)
        senses[row_name] = _LP_SENSES[rel]
        rhs[row_name] = value
        for col, coef in _terms(expr):
            entries.append((row_name, col, coef))
    column_names, lower, upper = [], {}, {}
    for bound in parsed["bounds"]:
        if len(bound) == 3:
            lo, col, hi = bound
        else:
            col, lo = bound
            hi = lo
        column_names.append(col)
        lower[col], upper[col] = lo, hi
    binary = {col: True for col in parsed.get("binaries", [])}
    return _assemble(name, column_names, row_names, objective, entries, senses, rhs, lower, upper, binary)
