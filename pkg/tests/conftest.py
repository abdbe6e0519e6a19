import numpy as np
import pytest

from pufkit import pipeline, rodata, transforms


@pytest.fixture(scope="session")
def catalog():
    return transforms.build_catalog()


@pytest.fixture(scope="session")
def base_matrices():
    return transforms.enumerate_base_matrices()


@pytest.fixture(scope="session")
def h16():
    return transforms.sylvester_hadamard(16)


@pytest.fixture(scope="session")
def q1():
    return pipeline.quantizer_boundaries(1)


@pytest.fixture(scope="session")
def small_dataset():
    """50 devices x 3 measurements with the default synthetic model."""
    return rodata.generate_synthetic(rodata.SyntheticModel(), 50, 3, seed=1234)


@pytest.fixture(scope="session")
def large_dataset():
    """120 devices, enough for population-level statistics."""
    return rodata.generate_synthetic(rodata.SyntheticModel(), 120, 3, seed=99)


def random_sign_matrix(rng: np.random.Generator, catalog) -> transforms.SignMatrix:
    return catalog.members[rng.integers(0, len(catalog))]
