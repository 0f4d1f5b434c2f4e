"""Smoke tests for the python bindings; the heavy lifting lives in the C++ suites."""

import math
import os

import pytest

import protoeval

SAMPLE = os.environ.get("PROTOEVAL_SAMPLE", "data/sample")


def test_parse_render_round_trip():
    text = 'x = Mix(volume="10 mL", speed="500 rpm")'
    program = protoeval.parse_program(text)
    assert len(program) == 1
    assert program.callees() == ["Mix"]
    assert program.render() == text


def test_parse_errors_raise_value_error():
    with pytest.raises(ValueError):
        protoeval.parse_program("Mix(")


def test_validate_reports_undefined_functions():
    program = protoeval.parse_program('Foo(volume="1 uL")')
    library = protoeval.parse_signatures("def Mix(volume):")
    diagnostics = protoeval.validate(program, library)
    assert len(diagnostics) == 1
    code, line, message = diagnostics[0]
    assert code == "E_UNDEFINED_FUNCTION"
    assert line == 1
    assert "Foo" in message


def test_metrics():
    assert protoeval.sentence_bleu("500 uL", "500 uL") == 1.0
    assert protoeval.function_accuracy(["Mix", "Spin"], ["Mix", "Dry"]) == 0.5

    precision, recall = protoeval.multiset_function_pr(["Mix", "Mix", "Spin"], ["Mix", "Spin"])
    assert math.isclose(precision, 2 / 3)
    assert recall == 1.0

    distance, alignment = protoeval.levenshtein(["Mix", "Spin", "Dry"], ["Mix", "Dry"])
    assert distance == 1
    assert sum(1 for op, _, _ in alignment if op != "match") == 1

    assert protoeval.levenshtein_normalized(["Mix", "Spin", "Dry"], ["Mix", "Dry"]) == 0.5

    mean, std = protoeval.aggregate([2.0, 4.0])
    assert mean == 3.0
    assert math.isclose(std, math.sqrt(2.0))


def test_dataset_stats():
    stats = protoeval.dataset_stats(SAMPLE)
    assert stats["protocol_count"] == 5
    assert stats["avg_steps"] > 3


def test_oracle_run_suite():
    report = protoeval.run_suite(SAMPLE, "generate", student="oracle", runs=1, seed=7)
    aggregate = report["aggregate"]
    assert aggregate["function_precision"]["mean"] == 1.0
    assert aggregate["function_recall"]["mean"] == 1.0
    assert aggregate["levenshtein_normalized"]["mean"] == 0.0
    assert aggregate["arg_value_bleu"]["mean"] == 1.0
    assert report["flagged"] == []


def test_next_step_oracle_and_random():
    oracle = protoeval.run_suite(SAMPLE, "next-step", student="oracle", runs=1, seed=3)
    assert oracle["aggregate"]["function_accuracy"]["mean"] == 1.0

    random_report = protoeval.run_suite(SAMPLE, "next-step", student="random", runs=1, seed=3)
    assert random_report["aggregate"]["function_accuracy"]["mean"] < 1.0


def test_nearest_protocols():
    hits = protoeval.nearest_protocols(SAMPLE, "glycerol stock of E. coli", k=2)
    assert len(hits) == 2
    ids = [hit_id for hit_id, _ in hits]
    assert "glycerol-stock-ecoli" in ids
    assert hits[0][1] >= hits[1][1]
