"""Collects one PASS/FAIL line per acceptance criterion."""

LINES: list[str] = []


def report(number: int, name: str, passed: bool, detail: str) -> bool:
    line = f"[{'PASS' if passed else 'FAIL'}] #{number} {name}: {detail}"
    LINES.append(line)
    print(line)
    return passed
