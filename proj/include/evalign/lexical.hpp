#pragma once

#include "evalign/corpus.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evalign {

using TokenList = std::vector<std::string>;
using ScoreMap = std::map<SentenceId, double>;
using VoteSet = std::set<SentenceId>;

/// Vote-space scores for one case; std::nullopt means the method abstains
/// (casts no votes) for that case.
using NormalizedScores = std::optional<ScoreMap>;

enum class Method { bm25, tfidf, external };

std::string_view to_string(Method m);

struct BM25Params {
    double k1 = 1.2;
    double b = 0.75;

    friend bool operator==(const BM25Params&, const BM25Params&) = default;
};

/// Throws ValidationError unless k1 > 0 and b in [0,1].
void validate(const BM25Params& params);

/// Drops de-identification delimiters "[**" / "**]", lowercases ASCII and
/// splits on every byte that is not an ASCII letter or digit.
TokenList tokenize(std::string_view text);

/// Okapi BM25 of each sentence against the query, with the collection being
/// exactly `sentences`. Repeated query terms count once. The result is indexed
/// like `sentences`.
std::vector<double> bm25_scores(const TokenList& query, std::span<const TokenList> sentences,
                                const BM25Params& params = {});

/// BM25 keyed by sentence id for a whole case.
ScoreMap bm25_scores(std::string_view query_text, const CaseRecord& c,
                     const BM25Params& params = {});

/// Cosine similarity between the query and each sentence in a TF-IDF space
/// fitted on `sentences` only: smooth idf ln((1+N)/(1+df)) + 1, raw term
/// counts, L2-normalised vectors. Query terms outside the vocabulary are
/// ignored. Values are in [0,1].
std::vector<double> tfidf_cosine(const TokenList& query, std::span<const TokenList> sentences);

ScoreMap tfidf_cosine(std::string_view query_text, const CaseRecord& c);

/// Divides every score by the case maximum. Returns std::nullopt (abstain)
/// when the maximum is not positive.
NormalizedScores normalize_relative(const ScoreMap& raw);

/// Ids whose vote-space score reaches tau (inclusive). Empty when abstaining.
///
/// Scores within vote_tolerance below tau still count: per-case division
/// of decimal inputs is not exact in binary (0.09 / 0.9 < 0.1), and the
/// threshold is meant to be inclusive on the decimal value.
VoteSet votes_from_scores(const NormalizedScores& scores, double tau);

inline constexpr double vote_tolerance = 1e-12;

/// Raw and vote-space scores of one method for one case.
///
/// BM25 and external scores are divided by the case maximum before
/// thresholding. TF-IDF cosine is thresholded as-is (it is already bounded),
/// but still abstains when every sentence scores zero.
struct ScoreVector {
    std::string case_id;
    Method method = Method::bm25;
    ScoreMap raw;
    NormalizedScores normalized;
};

ScoreVector make_score_vector(std::string case_id, Method method, ScoreMap raw);

} // namespace evalign
