import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import compositional_kg, memorization_kg, write_dataset_dir  # noqa: E402,F401


@pytest.fixture
def toy_dataset():
    from textkge.data import build_dataset
    train, dev, test = compositional_kg()
    return build_dataset(train, dev, test)


@pytest.fixture
def toy_data_dir(tmp_path):
    train, dev, test = compositional_kg()
    return write_dataset_dir(tmp_path / "toykg", train, dev, test)
