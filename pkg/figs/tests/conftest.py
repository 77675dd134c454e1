import pytest

from epgrav import harness


@pytest.fixture(scope="session")
def fig_dir(tmp_path_factory):
    """Real CSV output from the physics package, on a coarse grid."""
    out = tmp_path_factory.mktemp("figdata")
    harness.write_all_figures(str(out), n_points=201)
    return out
