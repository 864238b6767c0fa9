from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import animal_taxonomy, make_deplm, make_embeddings  # noqa: E402

from themeweave.resources import ResourceSet  # noqa: E402


@pytest.fixture
def toy_taxonomy(tmp_path):
    return animal_taxonomy(tmp_path)


@pytest.fixture
def toy_resources(tmp_path):
    """Small but fully populated resource set shared by scoring tests."""
    embeddings = make_embeddings(
        {
            "dog": (1.0, 0.0),
            "puppy": (0.9, 0.1),
            "ship": (0.0, 1.0),
            "droid": (0.1, 0.9),
            "had": (0.5, 0.5),
            "sam": (0.8, 0.3),
        }
    )
    deplm = make_deplm(
        tmp_path,
        [
            ("had", "dobj", "dog", 4),
            ("had", "dobj", "ship", 4),
            ("dog", "amod", "big", 2),
        ],
    )
    taxonomy = animal_taxonomy(tmp_path)
    return ResourceSet(embeddings=embeddings, deplm=deplm, taxonomy=taxonomy)
