"""Collects one result line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def record(number, passed, detail):
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] criterion {number}: {detail}"
    LINES.append(line)
    print(line)
    return passed


def skip(number, detail):
    line = f"[SKIP] criterion {number}: {detail}"
    LINES.append(line)
    print(line)
