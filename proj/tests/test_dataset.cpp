#include <doctest.h>

#include <algorithm>

#include "protoeval/dataset.hpp"
#include "temp.hpp"

using namespace protoeval;
using doctest::Approx;

TEST_CASE("bundled sample loads cleanly") {
    auto loaded = data::load_dataset(testutil::sample_dataset());
    CHECK(loaded.warnings.empty());
    REQUIRE(loaded.records.size() == 5);
    for (const auto& record : loaded.records) {
        CHECK(record.steps.size() >= 3);
        CHECK_FALSE(record.library.empty());
        CHECK_FALSE(record.gold_program.empty());
        auto diags = dsl::validate(record.gold_program, record.library,
                                   dsl::ValidationPolicy::defaults());
        CHECK(diags.empty());
    }
}

TEST_CASE("stats fixture matches hand-counted values") {
    auto loaded = data::load_dataset(testutil::source_dir() + "/tests/fixtures/stats_pair.json");
    REQUIRE(loaded.records.size() == 2);
    auto stats = data::compute_stats(loaded.records);
    CHECK(stats.protocol_count == 2);
    CHECK(stats.avg_steps == 4.0);
    CHECK(stats.avg_protocol_tokens == Approx(18.5));
    CHECK(stats.avg_tokens_per_step == Approx(37.0 / 8.0));
    CHECK(stats.avg_tokens_original_description == Approx(5.5));
    CHECK(stats.avg_tokens_generated_description == Approx(5.0));
    CHECK(stats.avg_pseudofunctions_per_protocol == Approx(2.0));
    CHECK(stats.avg_pseudofunctions_per_step == Approx(0.5));
    CHECK(stats.avg_pseudocode_lines == Approx(2.5));
}

TEST_CASE("compute_stats is permutation invariant and rejects empty input") {
    auto loaded = data::load_dataset(testutil::sample_dataset());
    auto forward = data::compute_stats(loaded.records);
    auto reversed_records = loaded.records;
    std::reverse(reversed_records.begin(), reversed_records.end());
    auto reversed = data::compute_stats(reversed_records);
    CHECK(forward.avg_steps == reversed.avg_steps);
    CHECK(forward.avg_protocol_tokens == reversed.avg_protocol_tokens);
    CHECK(forward.avg_pseudocode_lines == reversed.avg_pseudocode_lines);

    CHECK_THROWS_AS(data::compute_stats({}), std::invalid_argument);
}

TEST_CASE("default tokenizer splits words, numbers, and punctuation") {
    CHECK(data::default_token_count("Two plus two.") == 4);
    CHECK(data::default_token_count("") == 0);
    CHECK(data::default_token_count("10 mL (cold)") == 5);
}

TEST_CASE("schema errors name the record and field") {
    testutil::TempDir dir;
    dir.file("bad.json", R"json({"id": "p1", "description": "d", "steps": ["a","b","c"],
        "pseudofunctions": "def F(x):", "pseudocode": "F(x=\"1 uL\")",
        "review_status": "verified", "edit_count": 0})json");
    try {
        data::load_dataset(dir.path().string());
        FAIL("expected SchemaError");
    } catch (const data::SchemaError& e) {
        std::string what = e.what();
        CHECK(what.find("p1") != std::string::npos);
        CHECK(what.find("title") != std::string::npos);
    }
}

TEST_CASE("records with invalid gold programs are excluded with a warning") {
    testutil::TempDir dir;
    dir.file("invalid.json", R"json({"id": "p-bad", "title": "t", "description": "d",
        "steps": ["a","b","c"],
        "pseudofunctions": "def Mix(volume):",
        "pseudocode": "Foo(volume=\"1 uL\")",
        "review_status": "unreviewed", "edit_count": 0})json");
    auto loaded = data::load_dataset(dir.path().string());
    CHECK(loaded.records.empty());
    REQUIRE(loaded.warnings.size() == 1);
    CHECK(loaded.warnings[0].find("p-bad") != std::string::npos);
    CHECK(loaded.warnings[0].find("E_UNDEFINED_FUNCTION") != std::string::npos);
}

TEST_CASE("empty directory loads an empty list") {
    testutil::TempDir dir;
    auto loaded = data::load_dataset(dir.path().string());
    CHECK(loaded.records.empty());
}

TEST_CASE("duplicate ids are a schema error") {
    testutil::TempDir dir;
    std::string record = R"json({"id": "dup", "title": "t", "description": "d",
        "steps": ["a","b","c"],
        "pseudofunctions": "def Mix(volume):",
        "pseudocode": "Mix(volume=\"1 uL\")",
        "review_status": "verified", "edit_count": 0})json";
    dir.file("all.json", "[" + record + "," + record + "]");
    CHECK_THROWS_AS(data::load_dataset(dir.path().string()), data::SchemaError);
}

TEST_CASE("filter applies each rule with its label") {
    auto raw =
        data::load_raw_protocols(testutil::source_dir() + "/tests/fixtures/raw_protocols.json");
    REQUIRE(raw.size() == 4);
    auto result = data::filter_protocols(raw);
    REQUIRE(result.kept.size() == 1);
    CHECK(result.kept[0].id == "raw-ok");
    REQUIRE(result.rejected.size() == 3);
    for (const auto& rejection : result.rejected) {
        if (rejection.record.id == "raw-short")
            CHECK(rejection.reason == "fewer than three steps");
        else if (rejection.record.id == "raw-tables")
            CHECK(rejection.reason == "contains tables");
        else if (rejection.record.id == "raw-nodesc")
            CHECK(rejection.reason == "no description");
        else
            FAIL("unexpected rejection: " << rejection.record.id);
    }

    // filtering already-filtered records changes nothing
    auto again = data::filter_protocols(result.kept);
    CHECK(again.kept.size() == result.kept.size());
    CHECK(again.rejected.empty());
}

TEST_CASE("record round-trips through its JSON form") {
    auto loaded = data::load_dataset(testutil::sample_dataset());
    REQUIRE_FALSE(loaded.records.empty());
    const auto& original = loaded.records.front();
    auto round = data::record_from_json(data::record_to_json(original));
    CHECK(round.id == original.id);
    CHECK(round.title == original.title);
    CHECK(round.steps == original.steps);
    CHECK(round.library == original.library);
    CHECK(dsl::same_ast(round.gold_program, original.gold_program));
    CHECK(round.review_status == original.review_status);
}
