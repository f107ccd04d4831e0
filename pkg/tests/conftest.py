import numpy as np
import pytest

from extdep import (
    CopulaComponent,
    MarginSpec,
    MixtureModelSpec,
    make_asymmetric_logistic,
    make_comonotone,
    make_independence,
    make_logistic,
    make_min_product_mixture,
    make_mixture,
)

ACCEPTANCE_LINES = []


def catalog_models(d=4, eta=0.6, sigma=(1.0, 2.0, 0.5, 1.5)):
    """One representative of every catalog family, all on the same margins."""
    sigma = tuple(sigma[:d])
    mix = MixtureModelSpec(
        beta=np.array([[0.2, 0.5, 0.1, 0.3], [0.5, 0.25, 0.6, 0.3], [0.3, 0.25, 0.3, 0.4]])[:, :d],
        alpha=(0.5, 0.3, 0.6),
        components=(CopulaComponent("minimum"), CopulaComponent("product"), CopulaComponent("logistic", 0.4)),
        margins=MarginSpec(sigma, eta),
    )
    return {
        "independence": make_independence(d, eta, sigma),
        "comonotone": make_comonotone(d, eta, sigma),
        "logistic": make_logistic(d, 0.3, eta, sigma),
        "asym_logistic": make_asymmetric_logistic([0.9, 0.6, 0.8, 0.7][:d], 0.3, eta, sigma),
        "min_product": make_min_product_mixture(0.3, 0.24, eta, sigma, d),
        "mixture": make_mixture(mix),
    }


@pytest.fixture(params=sorted(catalog_models()))
def catalog_model(request):
    return catalog_models()[request.param]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
