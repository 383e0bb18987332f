"""Text interchange formats.

GF(2) matrices:
    GF2 <rows> <cols>
    0101...            (one '0'/'1' line per row)

Generator files add construction metadata around the same matrix body:
    RM m=<m> r=<r> cols=<l>
    blocks=<l_1,...,l_t>
    GF2 <rows> <cols>
    <rows>
    col <j>: S={s_1,s_2} mask=<bits>     (one sidecar line per column)

The sidecar records each column's variable subset and literal mask (most
significant mask bit on the smallest variable, 1 = bare literal); the
loader re-evaluates every sidecar line and refuses matrices that do not
match their own metadata.

CSV floats are written with 12 significant digits so identical runs are
byte-identical; None becomes an empty field.
"""
from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from . import gf2, rm
from .errors import ConfigError

__all__ = [
    "save_gf2",
    "load_gf2",
    "save_rm",
    "load_rm",
    "format_cell",
    "write_csv",
    "render_csv",
    "write_jsonl",
]


def _gf2_lines(mat: gf2.BitMatrix) -> list[str]:
    bits = mat.bits()
    lines = [f"GF2 {mat.rows} {mat.cols}"]
    lines.extend("".join("1" if b else "0" for b in row) for row in bits)
    return lines


def _parse_gf2_lines(lines: list[str], start: int) -> tuple[gf2.BitMatrix, int]:
    header = lines[start].split()
    if len(header) != 3 or header[0] != "GF2":
        raise ConfigError(f"expected 'GF2 <rows> <cols>' header, got {lines[start]!r}")
    rows, cols = int(header[1]), int(header[2])
    body = lines[start + 1 : start + 1 + rows]
    if len(body) != rows:
        raise ConfigError(f"matrix body truncated: need {rows} rows")
    arr = np.zeros((rows, cols), dtype=np.uint8)
    for i, line in enumerate(body):
        text = line.strip()
        if len(text) != cols or set(text) - {"0", "1"}:
            raise ConfigError(f"row {i} is not {cols} binary digits: {line!r}")
        arr[i] = [1 if ch == "1" else 0 for ch in text]
    return gf2.BitMatrix.from_bits(arr), start + 1 + rows


def save_gf2(path, mat: gf2.BitMatrix) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(_gf2_lines(mat)) + "\n")


def load_gf2(path) -> gf2.BitMatrix:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    mat, _ = _parse_gf2_lines(lines, 0)
    return mat


def _spec_line(j: int, spec: rm.DnfSpec) -> str:
    subset = ",".join(str(s) for s in spec.subset)
    mask = format(spec.mask, f"0{len(spec.subset)}b") if spec.subset else ""
    return f"col {j}: S={{{subset}}} mask={mask}"


def save_rm(path, mat: rm.RmMatrix) -> None:
    lines = [
        f"RM m={mat.params.m} r={mat.params.r} cols={mat.l}",
        "blocks=" + ",".join(str(b) for b in mat.block_sizes),
    ]
    lines.extend(_gf2_lines(mat.matrix))
    lines.extend(_spec_line(j, spec) for j, spec in enumerate(mat.column_specs))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_spec_line(line: str, expect_j: int) -> rm.DnfSpec:
    try:
        head, rest = line.split(":", 1)
        if head.strip() != f"col {expect_j}":
            raise ValueError(f"expected column {expect_j}")
        s_part, m_part = rest.strip().split(" mask=")
        if not s_part.startswith("S={") or not s_part.endswith("}"):
            raise ValueError("bad subset field")
        inner = s_part[3:-1]
        subset = tuple(int(x) for x in inner.split(",")) if inner else ()
        mask = int(m_part, 2) if m_part else 0
    except ValueError as exc:
        raise ConfigError(f"bad column spec line {line!r}: {exc}") from exc
    return rm.DnfSpec(subset, mask)


def load_rm(path) -> rm.RmMatrix:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    head = lines[0].split()
    if len(head) != 4 or head[0] != "RM":
        raise ConfigError(f"expected 'RM m=.. r=.. cols=..' header, got {lines[0]!r}")
    fields = dict(item.split("=") for item in head[1:])
    m, r, l = int(fields["m"]), int(fields["r"]), int(fields["cols"])
    if not lines[1].startswith("blocks="):
        raise ConfigError("missing blocks= line")
    block_sizes = tuple(int(x) for x in lines[1][len("blocks=") :].split(","))
    mat, nxt = _parse_gf2_lines(lines, 2)
    if mat.cols != l or mat.rows != (1 << m):
        raise ConfigError(
            f"matrix shape {mat.rows}x{mat.cols} does not match header m={m} cols={l}"
        )
    if sum(block_sizes) != l:
        raise ConfigError("block sizes do not sum to the column count")
    spec_lines = lines[nxt : nxt + l]
    if len(spec_lines) != l:
        raise ConfigError(f"need {l} column spec lines, found {len(spec_lines)}")
    specs = tuple(_parse_spec_line(line, j) for j, line in enumerate(spec_lines))
    bits = mat.bits()
    for j, spec in enumerate(specs):
        if not np.array_equal(rm.eval_dnf(spec, m).bits(), bits[:, j]):
            raise ConfigError(f"column {j} does not evaluate to its recorded spec")
    return rm.RmMatrix(
        params=rm.RmParams(m, r),
        matrix=mat,
        block_sizes=block_sizes,
        column_specs=specs,
    )


def format_cell(value) -> str:
    """Stable text for one CSV cell: 12 significant digits for floats,
    exact for ints/Fractions, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, Fraction):
        return format(float(value), ".12g")
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def render_csv(header: list[str], rows: list[dict]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(row.get(col)) for col in header))
    return "\n".join(lines) + "\n"


def write_csv(path, header: list[str], rows: list[dict]) -> None:
    with open(path, "w") as fh:
        fh.write(render_csv(header, rows))


def write_jsonl(path, records: list[dict]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
