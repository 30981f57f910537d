"""Collects one line per acceptance criterion for the end-of-run summary."""

LINES = []


def report(number: int, ok: bool, title: str, detail: str) -> bool:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title} ({detail})"
    LINES.append(line)
    print(line)
    return ok
