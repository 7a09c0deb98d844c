import pytest

from bnbench.compile import compile_structures
from bnbench.network import chest_clinic, chest_clinic_evidence


@pytest.fixture(scope="session")
def chest():
    return chest_clinic()


@pytest.fixture(scope="session")
def chest_evidence():
    return chest_clinic_evidence()


@pytest.fixture(scope="session")
def chest_comp(chest, chest_evidence):
    return compile_structures(chest, chest_evidence)
