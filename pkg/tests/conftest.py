import os
from pathlib import Path

import pytest

from mlfs import data

DATA_DIR = Path(__file__).parent / "data"

# Hand-counted over the 8 fixture rows: label row sums are 2,2,1,3,1,0,1,2.
TINY_PMC = 4 / 8
TINY_ANL = 12 / 8
TINY_DENS = TINY_ANL / 3


@pytest.fixture
def tiny_csv():
    return DATA_DIR / "tiny.csv"


@pytest.fixture
def tiny_dataset():
    return data.load_csv(DATA_DIR / "tiny.csv", label_count=3)


def emotions_paths():
    """Locations of the emotions ARFF + label spec, if the user provided them."""
    candidates = []
    env = os.environ.get("MLFS_DATA_DIR")
    if env:
        candidates.append(Path(env))
    candidates += [Path.cwd() / "data", DATA_DIR]
    for root in candidates:
        arff = root / "emotions.arff"
        xml = root / "emotions.xml"
        if arff.exists() and xml.exists():
            return arff, xml
    return None


@pytest.fixture
def emotions_dataset():
    paths = emotions_paths()
    if paths is None:
        pytest.skip("emotions.arff/emotions.xml not available (set MLFS_DATA_DIR)")
    return data.load_arff(*paths)
