import pytest

from grazecont import (ModelParams, PD, SN, branch_from_impact, continue_branch,
                       detect_codim1, seed_by_simulation)

ZETA, EPS = 0.02, 0.9


@pytest.fixture(scope="session")
def pd_case_params():
    return ModelParams(ZETA, EPS, 0.81, 0.355)


@pytest.fixture(scope="session")
def sn_case_params():
    return ModelParams(ZETA, EPS, 0.799, 0.368)


@pytest.fixture(scope="session")
def pd_case_seed(pd_case_params):
    return branch_from_impact(seed_by_simulation(pd_case_params), pd_case_params)


@pytest.fixture(scope="session")
def pd_case_branch(pd_case_seed, pd_case_params):
    """Coarse period-doubling branch from the stable seed down through grazing."""
    n = int(pd_case_seed.y_imp / 2e-3) + 10
    return continue_branch(pd_case_seed, -2e-3, n, pd_case_params)


@pytest.fixture(scope="session")
def pd_case_pd(pd_case_branch, pd_case_params):
    return detect_codim1(pd_case_branch, PD, pd_case_params)


@pytest.fixture(scope="session")
def sn_case_branch(sn_case_params):
    seed = branch_from_impact(seed_by_simulation(sn_case_params), sn_case_params)
    n = int(seed.y_imp / 2e-3) + 10
    return continue_branch(seed, -2e-3, n, sn_case_params)


@pytest.fixture(scope="session")
def sn_case_sn(sn_case_branch, sn_case_params):
    return detect_codim1(sn_case_branch, SN, sn_case_params)
