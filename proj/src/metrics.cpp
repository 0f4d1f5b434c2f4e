#include "protoeval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace protoeval::metrics {

namespace {

std::string to_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::set<std::string> arg_name_set_ci(const dsl::PseudoCall& call) {
    std::set<std::string> names;
    for (const auto& arg : call.args) names.insert(to_lower(arg.name));
    return names;
}

PrecisionRecall set_pr(std::size_t common, std::size_t pred_size, std::size_t gold_size) {
    PrecisionRecall pr;
    if (pred_size == 0 && gold_size == 0) return {1.0, 1.0};
    if (pred_size == 0) return {1.0, 0.0};
    if (gold_size == 0) return {0.0, 1.0};
    pr.precision = static_cast<double>(common) / static_cast<double>(pred_size);
    pr.recall = static_cast<double>(common) / static_cast<double>(gold_size);
    return pr;
}

}  // namespace

double function_accuracy(const std::vector<std::string>& pred_names,
                         const std::vector<std::string>& gold_names) {
    if (pred_names.size() != gold_names.size())
        throw std::invalid_argument("function_accuracy: sequences differ in length");
    if (gold_names.empty())
        throw std::invalid_argument("function_accuracy: empty sequences");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold_names.size(); ++i)
        if (pred_names[i] == gold_names[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(gold_names.size());
}

double function_accuracy(const dsl::PseudoProgram& pred, const dsl::PseudoProgram& gold) {
    return function_accuracy(pred.callee_names(), gold.callee_names());
}

PrecisionRecall argument_name_pr(const dsl::PseudoCall& pred, const dsl::PseudoCall& gold) {
    if (pred.callee != gold.callee)
        throw std::invalid_argument("argument_name_pr: callee mismatch ('" + pred.callee +
                                    "' vs '" + gold.callee + "')");
    auto pred_names = arg_name_set_ci(pred);
    auto gold_names = arg_name_set_ci(gold);
    std::size_t common = 0;
    for (const auto& name : pred_names) common += gold_names.count(name);
    return set_pr(common, pred_names.size(), gold_names.size());
}

namespace {

// lowercase; alphanumeric runs are tokens, punctuation chars are their own
// tokens
std::vector<std::string> bleu_tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (std::isalnum(c)) {
            std::size_t j = i;
            while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
            std::string tok = text.substr(i, j - i);
            tokens.push_back(to_lower(tok));
            i = j;
        } else {
            tokens.emplace_back(1, static_cast<char>(c));
            ++i;
        }
    }
    return tokens;
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                        tokens.begin() + static_cast<std::ptrdiff_t>(i + n))] +=
            1;
    return counts;
}

constexpr double kBleuEpsilon = 1e-9;

}  // namespace

double sentence_bleu(const std::string& candidate, const std::string& reference) {
    auto cand = bleu_tokenize(candidate);
    auto ref = bleu_tokenize(reference);
    if (cand.empty() && ref.empty()) return 1.0;
    if (cand.empty()) return 0.0;

    std::size_t max_order = std::min<std::size_t>(4, cand.size());
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_order; ++n) {
        auto cand_counts = ngram_counts(cand, n);
        auto ref_counts = ngram_counts(ref, n);
        double clipped = 0.0;
        double total = 0.0;
        for (const auto& [gram, count] : cand_counts) {
            total += static_cast<double>(count);
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end())
                clipped += static_cast<double>(std::min(count, it->second));
        }
        if (clipped <= 0.0) clipped = kBleuEpsilon;
        log_sum += std::log(clipped / total);
    }
    double geo_mean = std::exp(log_sum / static_cast<double>(max_order));

    double bp = 1.0;
    if (cand.size() < ref.size())
        bp = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()));
    return bp * geo_mean;
}

std::optional<double> argument_value_bleu(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& [pred, gold] : pairs) sum += sentence_bleu(pred, gold);
    return sum / static_cast<double>(pairs.size());
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("cosine_similarity: zero-norm vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::optional<double> argument_value_embedscore(
    const std::vector<std::pair<std::string, std::string>>& pairs, const Embedder& embed) {
    if (pairs.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& [pred, gold] : pairs)
        sum += cosine_similarity(embed(pred), embed(gold));
    return sum / static_cast<double>(pairs.size());
}

PrecisionRecall multiset_function_pr(const std::vector<std::string>& pred_names,
                                     const std::vector<std::string>& gold_names) {
    std::map<std::string, std::size_t> pred_counts, gold_counts;
    for (const auto& name : pred_names) pred_counts[name] += 1;
    for (const auto& name : gold_names) gold_counts[name] += 1;
    std::size_t common = 0;
    for (const auto& [name, count] : pred_counts) {
        auto it = gold_counts.find(name);
        if (it != gold_counts.end()) common += std::min(count, it->second);
    }
    return set_pr(common, pred_names.size(), gold_names.size());
}

PrecisionRecall multiset_function_pr(const dsl::PseudoProgram& pred,
                                     const dsl::PseudoProgram& gold) {
    return multiset_function_pr(pred.callee_names(), gold.callee_names());
}

EditDistance levenshtein(const std::vector<std::string>& pred_names,
                         const std::vector<std::string>& gold_names) {
    const std::size_t np = pred_names.size();
    const std::size_t ng = gold_names.size();
    std::vector<std::vector<std::size_t>> cost(np + 1, std::vector<std::size_t>(ng + 1, 0));
    for (std::size_t i = 0; i <= np; ++i) cost[i][0] = i;
    for (std::size_t j = 0; j <= ng; ++j) cost[0][j] = j;
    for (std::size_t i = 1; i <= np; ++i) {
        for (std::size_t j = 1; j <= ng; ++j) {
            std::size_t diag = cost[i - 1][j - 1] + (pred_names[i - 1] == gold_names[j - 1] ? 0 : 1);
            std::size_t del = cost[i - 1][j] + 1;
            std::size_t ins = cost[i][j - 1] + 1;
            cost[i][j] = std::min({diag, del, ins});
        }
    }

    EditDistance result;
    result.distance = cost[np][ng];

    // backtrace from the corner; tie order match > substitute > delete > insert
    Alignment reversed;
    std::size_t i = np, j = ng;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            bool equal = pred_names[i - 1] == gold_names[j - 1];
            std::size_t diag = cost[i - 1][j - 1] + (equal ? 0 : 1);
            if (diag == cost[i][j]) {
                reversed.push_back({equal ? EditOp::Match : EditOp::Substitute, i - 1, j - 1});
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && cost[i - 1][j] + 1 == cost[i][j]) {
            reversed.push_back({EditOp::Delete, i - 1, std::nullopt});
            --i;
            continue;
        }
        reversed.push_back({EditOp::Insert, std::nullopt, j - 1});
        --j;
    }
    result.alignment.assign(reversed.rbegin(), reversed.rend());
    return result;
}

double levenshtein_normalized(const std::vector<std::string>& pred_names,
                              const std::vector<std::string>& gold_names) {
    if (gold_names.empty())
        throw std::invalid_argument("levenshtein_normalized: empty gold sequence");
    auto result = levenshtein(pred_names, gold_names);
    return static_cast<double>(result.distance) / static_cast<double>(gold_names.size());
}

std::vector<std::pair<std::string, std::string>> generation_argument_pairs(
    const dsl::PseudoProgram& pred, const dsl::PseudoProgram& gold) {
    std::vector<std::pair<std::string, std::string>> pairs;
    auto result = levenshtein(pred.callee_names(), gold.callee_names());
    for (const auto& step : result.alignment) {
        if (step.op != EditOp::Match) continue;
        const auto& pred_call = pred.calls[*step.pred_index];
        const auto& gold_call = gold.calls[*step.gold_index];
        for (const auto& gold_arg : gold_call.args) {
            const auto* pred_arg = pred_call.find_arg_ci(gold_arg.name);
            if (pred_arg)
                pairs.emplace_back(pred_arg->value.value_text(), gold_arg.value.value_text());
        }
    }
    return pairs;
}

RetrievalScore retrieval_pr(const std::vector<std::string>& selected,
                            const std::vector<std::string>& gold) {
    std::set<std::string> sel(selected.begin(), selected.end());
    std::set<std::string> gld(gold.begin(), gold.end());
    std::size_t common = 0;
    for (const auto& name : sel) common += gld.count(name);
    auto pr = set_pr(common, sel.size(), gld.size());
    return {pr.precision, pr.recall};
}

MeanStd aggregate(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("aggregate: empty value list");
    double sum = 0.0;
    for (double v : values) sum += v;
    double mean = sum / static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

std::vector<std::string> replay_alignment(const std::vector<std::string>& pred_names,
                                          const std::vector<std::string>& gold_names,
                                          const Alignment& alignment) {
    std::vector<std::string> out;
    for (const auto& step : alignment) {
        switch (step.op) {
            case EditOp::Match:
                out.push_back(pred_names.at(*step.pred_index));
                break;
            case EditOp::Substitute:
            case EditOp::Insert:
                out.push_back(gold_names.at(*step.gold_index));
                break;
            case EditOp::Delete:
                break;
        }
    }
    return out;
}

}  // namespace protoeval::metrics
