import contextlib
import time

import numpy as np
import pytest

from skinfusion.data import PixelPool

_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Context manager that records one PASS/FAIL line per acceptance criterion.

    It yields a list; strings appended to it are printed after the timing.
    """

    @contextlib.contextmanager
    def run(number: int, title: str):
        start = time.perf_counter()
        notes: list[str] = []

        def line(status):
            extra = "".join(f"; {n}" for n in notes)
            return f"{status}  criterion {number}: {title} ({time.perf_counter() - start:.2f}s{extra})"

        try:
            yield notes
        except BaseException:
            _ACCEPTANCE.append(line("FAIL"))
            raise
        _ACCEPTANCE.append(line("PASS"))

    return run


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


def synthetic_pool(n_images: int, h: int, w: int, seed: int = 0) -> PixelPool:
    """Pool covering every pixel of ``n_images`` virtual h x w images."""
    rng = np.random.default_rng(seed)
    n = n_images * h * w
    idx = np.arange(n, dtype=np.int64)
    image_id, rest = np.divmod(idx, h * w)
    row, col = np.divmod(rest, w)
    rgb = rng.integers(0, 256, size=(n, 3), dtype=np.uint8)
    label = (rng.random(n) < 0.3).astype(np.uint8)
    return PixelPool(image_id, row, col, rgb, label)
