"""Pattern files, trace records and rendering."""

from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass
from typing import Optional

from .core import SparseConfig, TurmiteDef, _RunState
from .machines import LEFT, RIGHT


def serialize_pattern(cfg: SparseConfig) -> str:
    """Bit-exact text form: header lines then rows, top row first.

    The body shows raw symbols ('.' for background); the head is carried
    in the header so the round trip is unambiguous.
    """
    lines = ["#pattern 1"]
    lines.append(f"#background {cfg.background}")
    if cfg.head is not None:
        q, (x, y) = cfg.head
        lines.append(f"#head {q} {x} {y}")
    if cfg.ones:
        x0, x1, y0, y1 = cfg.bounding_box()
    elif cfg.head is not None:
        x0, x1, y0, y1 = cfg.head[1] * 2
    else:
        x0 = x1 = y0 = y1 = 0
    lines.append(f"#offset {x0} {y0}")
    sym = str(1 - cfg.background)
    for y in range(y1, y0 - 1, -1):
        row = "".join(sym if (x, y) in cfg.ones else "."
                      for x in range(x0, x1 + 1))
        lines.append(row)
    return "\n".join(lines) + "\n"


def parse_pattern(text: str) -> SparseConfig:
    background = 0
    head = None
    ox = oy = 0
    rows: list[str] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#background"):
            background = int(line.split()[1])
        elif line.startswith("#head"):
            _, q, x, y = line.split()
            head = (q, (int(x), int(y)))
        elif line.startswith("#offset"):
            _, x, y = line.split()
            ox, oy = int(x), int(y)
        elif line.startswith("#"):
            continue
        else:
            rows.append(line)
    ones = set()
    h = len(rows)
    for r, row in enumerate(rows):
        y = oy + (h - 1 - r)
        for c, ch in enumerate(row):
            if ch != ".":
                ones.add((ox + c, y))
    return SparseConfig(frozenset(ones), background, head)


@dataclass
class TraceRecord:
    t: int
    state: str
    x: int
    y: int
    turn: str
    support: int

    def line(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


def trace_run(machine: TurmiteDef, cfg: SparseConfig, steps: int,
              sink) -> SparseConfig:
    """Run while writing one structured record per step."""
    if cfg.head is None:
        return cfg
    st = _RunState(machine, cfg)
    sink.write(TraceRecord(0, st.state, *st.pos, "start",
                           len(st.ones)).line() + "\n")
    for t in range(1, steps + 1):
        before = st.state
        st.step()
        after = st.state
        if after == before or "N*" in (before, after):
            turn = "straight"
        elif after == LEFT.get(before):
            turn = "left"
        elif after == RIGHT.get(before):
            turn = "right"
        else:
            turn = "straight"
        sink.write(TraceRecord(t, st.state, *st.pos, turn,
                               len(st.ones)).line() + "\n")
    return st.freeze()


HEAD_GLYPHS = {"N": "^", "E": ">", "S": "v", "W": "<", "N*": "*"}


def render_text(cfg: SparseConfig,
                box: Optional[tuple[int, int, int, int]] = None) -> str:
    """Deterministic character raster, one cell per character."""
    if box is None:
        if cfg.ones or cfg.head:
            x0, x1, y0, y1 = cfg.bounding_box()
        else:
            x0 = x1 = y0 = y1 = 0
        x0 -= 1
        y0 -= 1
        x1 += 1
        y1 += 1
    else:
        x0, x1, y0, y1 = box
    out = []
    for y in range(y1, y0 - 1, -1):
        row = []
        for x in range(x0, x1 + 1):
            if cfg.head is not None and cfg.head[1] == (x, y):
                row.append(HEAD_GLYPHS.get(cfg.head[0], "?"))
            else:
                row.append("#" if cfg.symbol((x, y)) == 1 else ".")
        out.append("".join(row))
    return "\n".join(out) + "\n"


def render_image(cfg: SparseConfig, cell: int = 4,
                 box: Optional[tuple[int, int, int, int]] = None) -> bytes:
    """PNG raster; the head cell is drawn in red."""
    from PIL import Image
    if box is None:
        if cfg.ones or cfg.head:
            x0, x1, y0, y1 = cfg.bounding_box()
        else:
            x0 = x1 = y0 = y1 = 0
        x0 -= 2
        y0 -= 2
        x1 += 2
        y1 += 2
    else:
        x0, x1, y0, y1 = box
    w, h = (x1 - x0 + 1), (y1 - y0 + 1)
    img = Image.new("RGB", (w * cell, h * cell), (255, 255, 255))
    px = img.load()
    for (x, y) in cfg.ones:
        if x0 <= x <= x1 and y0 <= y <= y1:
            _fill(px, x - x0, y1 - y, cell, (0, 0, 0))
    if cfg.head is not None:
        q, (x, y) = cfg.head
        if x0 <= x <= x1 and y0 <= y <= y1:
            _fill(px, x - x0, y1 - y, cell, (220, 30, 30))
    buf = io.BytesIO()
    img.save(buf, "PNG")
    return buf.getvalue()


def _fill(px, cx: int, cy: int, cell: int, color) -> None:
    for dx in range(cell):
        for dy in range(cell):
            px[cx * cell + dx, cy * cell + dy] = color


def render(cfg: SparseConfig, format: str = "text", **kw) -> bytes:
    """Deterministic rendering; 'text' or 'image' (PNG)."""
    if format == "text":
        return render_text(cfg, **kw).encode()
    if format == "image":
        return render_image(cfg, **kw)
    raise ValueError(f"unknown format {format!r}")
