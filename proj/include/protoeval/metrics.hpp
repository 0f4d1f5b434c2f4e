#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "protoeval/dsl.hpp"

// Deterministic scoring of predicted pseudocode against gold: positional
// function accuracy, argument-name precision/recall, BLEU and embedding
// similarity over argument values, multiset function precision/recall, and
// an edit distance with backtrace over function-call symbols.

namespace protoeval::metrics {

using Embedder = std::function<std::vector<double>(const std::string&)>;

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

struct NextStepScore {
    double function_accuracy = 0.0;
    std::optional<double> arg_name_precision;
    std::optional<double> arg_name_recall;
    std::optional<double> arg_value_bleu;
    std::optional<double> arg_value_embedscore;
};

struct GenerationScore {
    double function_precision = 0.0;
    double function_recall = 0.0;
    double levenshtein_normalized = 0.0;
    std::optional<double> arg_name_precision;
    std::optional<double> arg_name_recall;
    std::optional<double> arg_value_bleu;
    std::optional<double> arg_value_embedscore;
    bool flagged = false;  // unparseable output scored under the failure rule
};

struct RetrievalScore {
    double precision = 0.0;
    double recall = 0.0;
};

enum class EditOp { Match, Substitute, Insert, Delete };

struct AlignmentStep {
    EditOp op = EditOp::Match;
    // indices into the predicted / gold sequences; absent for ops that do not
    // consume a symbol on that side
    std::optional<std::size_t> pred_index;
    std::optional<std::size_t> gold_index;
};

using Alignment = std::vector<AlignmentStep>;

struct EditDistance {
    std::size_t distance = 0;
    Alignment alignment;
};

// Fraction of positions where the predicted callee equals gold, case
// sensitive. Sequences must have equal, nonzero length.
double function_accuracy(const std::vector<std::string>& pred_names,
                         const std::vector<std::string>& gold_names);
double function_accuracy(const dsl::PseudoProgram& pred, const dsl::PseudoProgram& gold);

// Precision/recall over argument-name sets (case-insensitive). Callees must
// match; scoring arguments of mispredicted functions would penalize twice.
// Conventions: both empty -> (1,1); pred empty -> (1,0); gold empty -> (0,1).
PrecisionRecall argument_name_pr(const dsl::PseudoCall& pred, const dsl::PseudoCall& gold);

// BLEU, pinned variant: lowercase, split at whitespace and punctuation;
// n-gram orders 1..min(4, candidate length); geometric mean with a 1e-9
// floor on zero match counts; brevity penalty exp(1 - r/c) for c < r.
double sentence_bleu(const std::string& candidate, const std::string& reference);

// Mean sentence BLEU over name-matched value pairs; absent for no pairs.
std::optional<double> argument_value_bleu(
    const std::vector<std::pair<std::string, std::string>>& pairs);

// Mean cosine similarity between embedded value pairs; absent for no pairs.
// Throws on zero-norm vectors.
std::optional<double> argument_value_embedscore(
    const std::vector<std::pair<std::string, std::string>>& pairs, const Embedder& embed);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Multiset precision/recall over callee names; repeated calls count.
PrecisionRecall multiset_function_pr(const dsl::PseudoProgram& pred,
                                     const dsl::PseudoProgram& gold);
PrecisionRecall multiset_function_pr(const std::vector<std::string>& pred_names,
                                     const std::vector<std::string>& gold_names);

// Unit-cost edit distance over call symbols with one optimal backtrace.
// Replaying the ops transforms pred into gold; ties break match >
// substitute > delete > insert, so the path is deterministic.
EditDistance levenshtein(const std::vector<std::string>& pred_names,
                         const std::vector<std::string>& gold_names);

// Edit distance divided by gold length; gold must be non-empty.
double levenshtein_normalized(const std::vector<std::string>& pred_names,
                              const std::vector<std::string>& gold_names);

// Argument value pairs for the generation task: walk the optimal alignment,
// and at matched calls pair arguments by case-insensitive name.
std::vector<std::pair<std::string, std::string>> generation_argument_pairs(
    const dsl::PseudoProgram& pred, const dsl::PseudoProgram& gold);

// Set precision/recall with the usual empty-side conventions.
RetrievalScore retrieval_pr(const std::vector<std::string>& selected,
                            const std::vector<std::string>& gold);

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0;  // sample std (n-1); 0 for a single value
};

MeanStd aggregate(const std::vector<double>& values);

// Applies an alignment to the predicted sequence; used to check that the
// backtrace really reconstructs gold.
std::vector<std::string> replay_alignment(const std::vector<std::string>& pred_names,
                                          const std::vector<std::string>& gold_names,
                                          const Alignment& alignment);

}  // namespace protoeval::metrics
