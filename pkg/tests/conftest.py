import pytest

_GATES: list[str] = []


class Gate:
    """Records one acceptance verdict line per criterion."""

    def __call__(self, name: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        _GATES.append(line)
        print(line)
        return ok

    def skip(self, name: str, reason: str) -> None:
        line = f"SKIP  {name}  ({reason})"
        _GATES.append(line)
        print(line)
        pytest.skip(reason)


@pytest.fixture
def gate():
    return Gate()


def pytest_terminal_summary(terminalreporter):
    if _GATES:
        terminalreporter.section("acceptance criteria")
        for line in _GATES:
            terminalreporter.write_line(line)
