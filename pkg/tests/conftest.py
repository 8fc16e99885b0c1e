import numpy as np
import pytest
from hypothesis import settings

from dpfl_pareto import datasets
from dpfl_pareto.models import ModelArch, ModelKind

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def small_bundle():
    """2-class, 12-dim blobs on 5 clients; shared across read-only tests."""
    bundle = datasets.synth_dataset(2, 12, 300, 120, seed=42)
    return datasets.repartition(bundle, K=5, seed=42)


@pytest.fixture(scope="session")
def lr_arch():
    return ModelArch(kind=ModelKind.LOGISTIC_REGRESSION, feature_dim=12, num_classes=2)


@pytest.fixture(scope="session")
def mlp_arch():
    return ModelArch(kind=ModelKind.MLP, feature_dim=12, num_classes=2, hidden_units=8)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
