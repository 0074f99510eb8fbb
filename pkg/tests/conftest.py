import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from srfermion.model import ModelSpec, decoupled_spec, xx_spec  # noqa: E402

DEFAULT_SPECS = {
    "xx-half": xx_spec(),
    "xx-third": xx_spec(math.pi / 3),
    "n2-minus": ModelSpec((2 * math.pi / 5, 3 * math.pi / 5), -1),
    "n2-plus": ModelSpec((2 * math.pi / 5, 3 * math.pi / 5), 1),
    "n2-asym": ModelSpec((0.7, 2.1)),
    "n3-generic": ModelSpec((0.4, 1.3, 2.5)),
    "decoupled-3": decoupled_spec(3, 0.3),
}


@pytest.fixture(params=sorted(DEFAULT_SPECS))
def any_spec(request):
    return DEFAULT_SPECS[request.param]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
