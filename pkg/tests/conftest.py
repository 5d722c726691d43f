import numpy as np
import pytest

from surftreat.geometry import CloudMeta, PointCloud

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def make_cloud(points, **kwargs) -> PointCloud:
    return PointCloud(np.asarray(points, dtype=np.float64), **kwargs)


def grid_cloud(nx: int, ny: int, spacing: float = 1e-3, z: float = 0.0) -> PointCloud:
    xs = (np.arange(nx) - (nx - 1) / 2) * spacing
    ys = (np.arange(ny) - (ny - 1) / 2) * spacing
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel(), np.full(xx.size, z)], axis=1)
    line = np.repeat(np.arange(nx), ny)
    return PointCloud(pts, line_index=line, meta=CloudMeta(source="grid", unit="m"))


def random_rotation(rng) -> np.ndarray:
    # QR of a Gaussian matrix, sign-fixed to a proper rotation.
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q
