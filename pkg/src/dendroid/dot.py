"""Minimal DOT (graphviz) text rendering.

Only what the exports need: deterministic node and arrow ordering, quoted
identifiers, optional attributes.  Writing the strings by hand keeps the
output diffable and avoids a drawing dependency for what is, here, a plain
text format.
"""

__all__ = ["quote", "digraph"]


def quote(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def digraph(name, nodes, arrows, rankdir=None) -> str:
    """Render a directed graph.

    ``nodes`` is an iterable of ``(node, attrs)`` with ``attrs`` a mapping
    (or None); ``arrows`` an iterable of ``(tail, head)`` pairs.
    """
    lines = [f"digraph {quote(name)} {{"]
    if rankdir:
        lines.append(f"  rankdir={rankdir};")
    for node, attrs in nodes:
        suffix = ""
        if attrs:
            inner = ", ".join(f"{k}={quote(v)}" for k, v in attrs.items())
            suffix = f" [{inner}]"
        lines.append(f"  {quote(node)}{suffix};")
    for tail, head in arrows:
        lines.append(f"  {quote(tail)} -> {quote(head)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
