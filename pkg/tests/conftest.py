import pytest

from subspace_doa.array_model import AngleGrid, build_manifold, uniform_circular_array
from subspace_doa.signal_sim import ScenarioConfig, SourceSpec

SOURCE_AZIMUTHS = (40.0, 130.0)


@pytest.fixture(scope="session")
def uca8():
    return uniform_circular_array(8, 10.0, 15e6)


@pytest.fixture(scope="session")
def ring_grid():
    return AngleGrid.from_counts(360, 1)


@pytest.fixture(scope="session")
def ring_manifold(uca8, ring_grid):
    return build_manifold(uca8, ring_grid, "double")


@pytest.fixture
def two_source(uca8):
    """Two equal-power in-plane sources, 15 dB SNR, 128 snapshots."""
    return ScenarioConfig(uca8, [SourceSpec(a) for a in SOURCE_AZIMUTHS], snr_db=15.0,
                          num_snapshots=128, seed=42)


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line: criterion(number, title, status, detail)."""
    results = request.config.stash.setdefault(_CRITERIA, {})

    def record(number, title, status, detail=""):
        prev = results.get(number)
        if prev is not None:
            # parametrized parts of one criterion: any FAIL wins, details concatenate
            status = "FAIL" if "FAIL" in (prev[1], status) else status
            detail = f"{prev[2]}; {detail}" if detail else prev[2]
        results[number] = (title, status, detail)

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_CRITERIA, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, status, detail = results[number]
        terminalreporter.write_line(f"criterion {number} [{status}] {title}: {detail}")
