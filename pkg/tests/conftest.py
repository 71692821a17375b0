import pytest

from imdet.linkmodel import DatasetSpec, synth_dataset


@pytest.fixture(scope="session")
def default_matrix():
    return synth_dataset(DatasetSpec(), 20250601)


@pytest.fixture(scope="session")
def default_labels(default_matrix):
    return [r.label_im_present for r in default_matrix.records]
