"""One summary line per acceptance criterion, printed at the end of the run."""

LINES: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES[n] = line
    print(line)
