from fractions import Fraction

import pytest

from padicgap import Config, MultiPoly, ProblemInstance
from padicgap.dynamics import RationalMap

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict = {}


def record(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


def poly_map(*coeffs) -> RationalMap:
    return RationalMap.from_coeffs(list(coeffs))


def two_shifts(s: int, t: int) -> MultiPoly:
    """(z2 - z1 - s)(z2 - z1 - t) on P1 x P1."""
    return MultiPoly((2, 2), ((1, (0, 2)), (-2, (1, 1)), (1, (2, 0)),
                              (-(s + t), (0, 1)), (s + t, (1, 0)), (s * t, (0, 0))))


def general_corpus() -> list:
    """(name, instance) pairs on which analyze emits certificates."""
    f = poly_map(1, 0, 1)  # z^2 + 1
    cfg = Config(K=20, D=16, n_max=200, prime_range=(3, 50))
    small = Config(K=20, D=16, n_max=120, prime_range=(3, 50))
    return [
        ("shifted diagonal", ProblemInstance((f, f), (2, 5), (MultiPoly.diagonal(),), cfg)),
        ("graph shift", ProblemInstance((f, f), (1, 2), (MultiPoly.graph_shift(1),), cfg)),
        ("attracting x quasi", ProblemInstance((poly_map(0, 3, 1), f), (3, 2),
                                               (MultiPoly.graph_shift(1),), small)),
        ("two shifts", ProblemInstance((f, f), (1, 2), (two_shifts(1, 21),), cfg)),
        ("point", ProblemInstance((f,), (2,), tuple(MultiPoly.point([26])), cfg)),
    ]


@pytest.fixture(scope="session")
def certificates():
    from padicgap import GapCertificate, analyze

    out = []
    for name, inst in general_corpus():
        res = analyze(inst)
        assert isinstance(res, GapCertificate), name
        out.append((name, res))
    return out


def frac(x) -> Fraction:
    return Fraction(x)
