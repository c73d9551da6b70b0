import numpy as np
import pytest

from qnoise import create_app
from qnoise.services.monte_carlo_service import monte_carlo_service


@pytest.fixture
def app(tmp_path):
    app = create_app('testing')
    app.config['QNOISE_OUTPUT_DIR'] = str(tmp_path / 'results')
    yield app
    monte_carlo_service.shutdown()


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
