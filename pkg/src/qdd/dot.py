"""Graphviz DOT rendering of decision diagrams.

Edge thickness follows the weight magnitude and edge colour encodes the phase
as a hue on the HLS colour wheel.
"""
from __future__ import annotations

import cmath
import colorsys
import math

from .core import TERMINAL, Edge

DOT_LIMIT = 12


def phase_color(w: complex) -> str:
    hue = (cmath.phase(w) % (2 * math.pi)) / (2 * math.pi)
    r, g, b = colorsys.hls_to_rgb(hue, 0.5, 1.0)
    return "#{:02x}{:02x}{:02x}".format(*(round(255 * x) for x in (r, g, b)))


def weight_label(w: complex) -> str:
    mag = abs(w)
    ph = cmath.phase(w) % (2 * math.pi)
    if ph < 1e-12 or 2 * math.pi - ph < 1e-12:
        return f"{mag:.4g}"
    return f"{mag:.4g}∠{ph / math.pi:.4g}π"


def _attrs(w: complex, max_width: float, extra: str = "") -> str:
    width = max(0.5, max_width * min(abs(w), 1.0))
    return (
        f'label="{weight_label(w)}", penwidth={width:.3f}, '
        f'color="{phase_color(w)}"{extra}'
    )


def to_dot(root: Edge, num_qubits: int | None = None, name: str = "dd", max_width: float = 4.0) -> str:
    """DOT text with one node per DD node labelled ``q<level>``.

    Zero successors are drawn as small point-shaped sinks.
    """
    if num_qubits is not None and num_qubits > DOT_LIMIT:
        raise ValueError(f"DOT export limited to {DOT_LIMIT} qubits, got {num_qubits}")
    ids: dict = {}
    order = []

    def visit(node):
        stack = [node]
        while stack:
            x = stack.pop()
            if id(x) in ids:
                continue
            ids[id(x)] = f"n{len(ids)}"
            order.append(x)
            for c in x.e:
                if c.w != 0 and id(c.node) not in ids:
                    stack.append(c.node)

    lines = [f"digraph {name} {{", '  node [fontname="Helvetica"];', '  root [shape=none, label=""];']
    if root.w == 0:
        lines.append('  z_root [shape=point];')
        lines.append(f"  root -> z_root [{_attrs(root.w, max_width)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"
    visit(root.node)
    for x in order:
        if x is TERMINAL:
            lines.append(f'  {ids[id(x)]} [shape=box, label="1"];')
        else:
            lines.append(f'  {ids[id(x)]} [shape=circle, label="q{x.v}"];')
    lines.append(f"  root -> {ids[id(root.node)]} [{_attrs(root.w, max_width)}];")
    stubs = 0
    for x in order:
        if x is TERMINAL:
            continue
        src = ids[id(x)]
        for k, c in enumerate(x.e):
            if c.w == 0:
                stub = f"z{stubs}"
                stubs += 1
                lines.append(f'  {stub} [shape=point, label=""];')
                lines.append(f'  {src} -> {stub} [label="0", style=dashed, taillabel="{k}"];')
            else:
                tail = f', taillabel="{k}"'
                lines.append(f"  {src} -> {ids[id(c.node)]} [{_attrs(c.w, max_width, tail)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
