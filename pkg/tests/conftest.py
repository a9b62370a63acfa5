"""Suite-wide pytest configuration.

Besides keeping the tests directory importable, this file gives the
acceptance suite a readable verdict: one PASS/FAIL line per acceptance
criterion at the end of the run, independent of output capturing.
"""

from __future__ import annotations

import pytest

# ordered map: acceptance test base name -> (criterion number, short label)
_ACCEPTANCE_TESTS = {
    "test_c1_physics_oracle_suite": (1, "physics primitives vs Monte Carlo oracles"),
    "test_c2_poisson_count_statistics": (2, "simulated counts vs composite Poisson means"),
    "test_c3_engine_cross_validation": (3, "analytics vs particle sim across threshold sweep"),
    "test_c4_relay_gain_and_interval_benefit": (4, "two-hop gain and bit-interval benefit"),
    "test_c5_duplex_mode_ordering": (5, "protocol error ordering in both engines"),
    "test_c6_half_duplex_catches_full_duplex": (6, "HD/FD1 error ratio trend over bit interval"),
    "test_c7_single_toss_vs_enumeration": (7, "single-toss relay sampling vs exact enumeration"),
    "test_c8_degenerate_exactness": (8, "degenerate inputs give exact error rates"),
    "test_c9_deterministic_outputs": (9, "bit-identical outputs at any parallelism"),
}


def _base_name(nodeid: str) -> str:
    name = nodeid.rsplit("::", 1)[-1]
    return name.split("[", 1)[0]


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, str] = {}
    for status, label in (("passed", "PASS"), ("failed", "FAIL"),
                          ("error", "FAIL"), ("skipped", "SKIP")):
        for report in terminalreporter.stats.get(status, []):
            name = _base_name(getattr(report, "nodeid", ""))
            if name in _ACCEPTANCE_TESTS:
                # a single FAIL outweighs earlier PASSes of the same criterion
                if outcomes.get(name) != "FAIL":
                    outcomes[name] = label
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, (number, label) in sorted(_ACCEPTANCE_TESTS.items(),
                                        key=lambda kv: kv[1][0]):
        verdict = outcomes.get(name, "NOT RUN")
        terminalreporter.write_line(
            f"ACCEPTANCE CRITERION {number} ({label}): {verdict}")
