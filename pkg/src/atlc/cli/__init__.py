"""Command-line driver and the shipped fixture corpus."""
from .corpus import Fixture, corpus_dir, load_corpus, load_fixture, parse_sizes
