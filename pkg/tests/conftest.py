from fractions import Fraction

from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


def nonint_rationals(lo=-6, hi=6, dens=(2, 3, 5, 7)):
    """Rationals that are never integers, so Pochhammer denominators cannot vanish."""
    return st.builds(lambda n, d: Fraction(n, d), st.integers(lo * 7, hi * 7), st.sampled_from(dens)).filter(
        lambda q: q.denominator != 1)


def unit_rationals():
    """Rationals strictly inside (0, 1)."""
    return st.builds(lambda n, d: Fraction(n, d), st.integers(1, 30), st.integers(2, 31)).filter(lambda q: 0 < q < 1)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
