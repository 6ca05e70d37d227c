_verdict_lines = []


def record_verdict(line):
    """Collect a one-line acceptance verdict for the terminal summary."""
    _verdict_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _verdict_lines:
        terminalreporter.section("acceptance criteria")
        for line in _verdict_lines:
            terminalreporter.write_line(line)
