"""Protocol-planning evaluation harness: pseudocode DSL, metrics, and offline evaluation."""

import json as _json

from ._core import (
    Library,
    Program,
    aggregate,
    function_accuracy,
    levenshtein,
    levenshtein_normalized,
    multiset_function_pr,
    nearest_protocols,
    parse_program,
    parse_signatures,
    retrieval_pr,
    sentence_bleu,
    validate,
)
from ._core import dataset_stats_json as _dataset_stats_json
from ._core import run_suite_json as _run_suite_json

__all__ = [
    "Library",
    "Program",
    "aggregate",
    "dataset_stats",
    "function_accuracy",
    "levenshtein",
    "levenshtein_normalized",
    "multiset_function_pr",
    "nearest_protocols",
    "parse_program",
    "parse_signatures",
    "retrieval_pr",
    "run_suite",
    "sentence_bleu",
    "validate",
]


def dataset_stats(path):
    """Corpus statistics for a dataset file or directory, as a dict."""
    return _json.loads(_dataset_stats_json(str(path)))


def run_suite(dataset_path, task, student="oracle", **config):
    """Run an offline evaluation (oracle or random student) and return the report dict.

    task: "next-step", "generate", or "retrieve".
    config keys: shuffle, feedback, runs, seed, k, description, distractors.
    """
    report = _run_suite_json(str(dataset_path), task, student, _json.dumps(config))
    return _json.loads(report)
