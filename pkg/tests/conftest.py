import numpy as np
import pytest
from hypothesis import settings

import hiersvm as hv
from hiersvm.data import builtin_subset_spec, load_builtin_iris, make_subset

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def iris():
    return load_builtin_iris()


@pytest.fixture(scope="session")
def iris_sep(iris):
    # validation is exercised once in test_data; skip here to keep the suite fast
    return make_subset(iris, builtin_subset_spec("sep"), validate=False)


@pytest.fixture(scope="session")
def iris_nsep(iris):
    return make_subset(iris, builtin_subset_spec("nsep"), validate=False)


@pytest.fixture(scope="session")
def rhc_sep(iris_sep):
    return hv.solve_rhc(iris_sep)


@pytest.fixture(scope="session")
def rhc_nsep(iris_nsep):
    return hv.solve_rhc(iris_nsep)


@pytest.fixture(scope="session")
def ncr_sep_by_c(iris_sep):
    return {c: hv.solve_ncr(iris_sep, hv.NcrConfig(c_value=float(2**c))) for c in (8, 9, 10)}


@pytest.fixture(scope="session")
def ncr_nsep(iris_nsep):
    return hv.solve_ncr(iris_nsep, hv.NcrConfig(c_value=float(2**10)))


@pytest.fixture()
def rng():
    return np.random.default_rng(20260811)
