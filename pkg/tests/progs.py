"""Hypothesis strategies for small structured programs that always terminate."""

from __future__ import annotations

from hypothesis import strategies as st

VARS = ["x", "y"]
HEADER = "// input x in [-20, 20]\n// input y in [-20, 20]\n"

atoms = st.one_of(st.sampled_from(VARS), st.integers(-9, 9).map(lambda k: f"({k})" if k < 0 else str(k)))


@st.composite
def expressions(draw) -> str:
    a, b = draw(atoms), draw(atoms)
    op = draw(st.sampled_from(["+", "-", "*"]))
    return f"{a} {op} {b}"


@st.composite
def conditions(draw) -> str:
    a, b = draw(atoms), draw(atoms)
    return f"{a} {draw(st.sampled_from(['<', '<=', '>', '>=', '==', '!=']))} {b}"


@st.composite
def blocks(draw, depth: int = 0, in_loop: bool = False, counter=None, loops: bool = True) -> list[str]:
    counter = counter if counter is not None else [0]
    out = []
    for _ in range(draw(st.integers(1, 3))):
        kinds = ["assign", "assign"]
        if depth < 2:
            kinds += ["if", "while"] if loops else ["if"]
        if in_loop:
            kinds.append("break")
        kind = draw(st.sampled_from(kinds))
        if kind == "assign":
            out.append(f"{draw(st.sampled_from(VARS))} = {draw(expressions())};")
        elif kind == "break":
            out.append(f"if ({draw(conditions())}) {{ break; }}")
        elif kind == "if":
            then = draw(blocks(depth + 1, in_loop, counter, loops))
            other = draw(blocks(depth + 1, in_loop, counter, loops))
            out.append(f"if ({draw(conditions())}) {{ {' '.join(then)} }} else {{ {' '.join(other)} }}")
        else:
            k = counter[0]
            counter[0] += 1
            body = draw(blocks(depth + 1, True, counter))
            bound = draw(st.integers(0, 4))
            out.append(f"int c{k} = 0; while (c{k} < {bound} && {draw(conditions())}) "
                       f"{{ c{k} = c{k} + 1; {' '.join(body)} }}")
    return out


@st.composite
def loop_bodies(draw) -> str:
    """Loop-free statement sequences (assignments and nested ifs)."""
    return " ".join(draw(blocks(loops=False)))


@st.composite
def programs(draw) -> str:
    return HEADER + "\n".join(draw(blocks())) + "\n"
