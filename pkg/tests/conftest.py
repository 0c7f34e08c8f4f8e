import numpy as np
import pytest


def rect_contour(height, width, top, left, bottom, right):
    """Binary image with a one-pixel rectangle outline."""
    c = np.zeros((height, width), dtype=np.uint8)
    c[top, left:right + 1] = 1
    c[bottom, left:right + 1] = 1
    c[top:bottom + 1, left] = 1
    c[top:bottom + 1, right] = 1
    return c


@pytest.fixture
def step_vessel():
    """100x100 interior (rows/cols 1..100), intensity 40 from interior row 60 down, 200 above."""
    from vesselcut.vessel import mask_from_contour

    contour = rect_contour(102, 102, 0, 0, 101, 101)
    mask = mask_from_contour(contour)
    img = np.full((102, 102), 200.0)
    img[1 + 60:, :] = 40.0
    return img, mask


def tie_instance(width=40, height=100, left_row=40, right_row=59):
    """Vessel where a flat cut and a steep cut cost almost the same.

    Left half: 200 above ``left_row``, 120 below. Right half: 120 above
    ``right_row``, 40 below. The steep cut follows both intensity steps and
    climbs the uniform 120 strip between them at the half-way column
    (right_row - left_row horizontal edges); a flat cut follows one step and
    crosses width/2 uniform vertical edges; flat cuts at either step cost the
    same. Returns (image, mask, steep, flats): the material mask of the steep
    cut and the boundary rows of the two flat cuts.
    """
    from vesselcut.vessel import VesselMask

    inside = np.zeros((height + 2, width + 2), dtype=bool)
    inside[1:-1, 1:-1] = True
    rows = np.arange(height + 2)[:, None]
    cols = np.arange(width + 2)[None, :]
    left = cols <= width // 2
    a, b = 1 + left_row, 1 + right_row
    img = np.where(left, np.where(rows < a, 200.0, 120.0), np.where(rows < b, 120.0, 40.0))
    img = np.where(inside, img, 0.0)
    steep = inside & np.where(left, rows >= a, rows >= b)
    return img, VesselMask(inside), steep, (a, b)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
