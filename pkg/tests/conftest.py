from __future__ import annotations

import pytest

import fixtures
from entscore.encoder import TableEncoder
from entscore.pipeline import EntityMetric, GazetteerTagger


@pytest.fixture(scope="session")
def corpus_gazetteer():
    return fixtures.corpus_gazetteer()


@pytest.fixture(scope="session")
def corpus_table():
    return fixtures.corpus_table()


@pytest.fixture()
def corpus_metric(corpus_gazetteer, corpus_table):
    return EntityMetric(GazetteerTagger(corpus_gazetteer), TableEncoder(corpus_table))
