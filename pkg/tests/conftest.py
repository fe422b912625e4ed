from __future__ import annotations

import pytest

from siegel_renorm.newton import build_L0, solve_fixed_point

# desk truncation and a refined truncation for checks limited by truncation error
DESK = (40, 50)
REFINED = (120, 160)


@pytest.fixture(scope="session")
def desk_result():
    return solve_fixed_point(*DESK)


@pytest.fixture(scope="session")
def p_star(desk_result):
    return desk_result.pair


@pytest.fixture(scope="session")
def L0(p_star):
    return build_L0(p_star)


@pytest.fixture(scope="session")
def refined_result():
    return solve_fixed_point(*REFINED)


@pytest.fixture(scope="session")
def p_refined(refined_result):
    return refined_result.pair


@pytest.fixture(scope="session")
def refined_rg_2d(p_refined):
    from siegel_renorm.twod import embed, rg_2d

    return rg_2d(embed(p_refined))


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(number: int, name: str, checks: dict[str, bool], detail: str) -> bool:
        ok = all(checks.values())
        failed = ", ".join(k for k, v in checks.items() if not v)
        line = f"criterion {number} {name}: {'PASS' if ok else 'FAIL'} [{detail}]" + (f" failed: {failed}" if failed else "")
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
