#pragma once

#include "evalign/corpus.hpp"
#include "evalign/lexical.hpp"
#include "evalign/score_table.hpp"
#include "evalign/scorer_adapter.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evalign {

/// Weights and thresholds of the three-method vote. Defaults are the
/// submitted configuration.
struct EnsembleConfig {
    double w_bm25 = 0.527;
    double w_tfidf = 0.493;
    double w_ce = 0.855;
    double tau_bm25 = 0.50;
    double tau_tfidf = 0.20;
    double tau_ce = 0.10;
    double tau_ens = 0.85;
    BM25Params bm25;
    bool allow_missing_external = false;

    double total_weight() const noexcept { return w_bm25 + w_tfidf + w_ce; }

    friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

/// Throws ValidationError when a weight is negative, all weights are zero, a
/// method threshold leaves [0,1], tau_ens is negative, or tau_ens exceeds the
/// weight total (nothing could ever be cited).
void validate(const EnsembleConfig& cfg);

/// Reads the JSON config. Missing keys keep their defaults; unknown keys are
/// rejected. The result is validated.
EnsembleConfig parse_config(std::string_view json);
EnsembleConfig load_config(std::istream& source);
std::string config_to_json(const EnsembleConfig& cfg);

/// Drops the external method: w_ce = 0 and a missing table is allowed.
EnsembleConfig lexical_only(EnsembleConfig cfg);

struct MethodVotes {
    VoteSet bm25;
    VoteSet tfidf;
    VoteSet ce;
};

struct SentenceVote {
    SentenceId id = 0;
    bool bm25 = false;
    bool tfidf = false;
    bool ce = false;
    double total = 0.0; // w_bm25*bm25 + w_tfidf*tfidf + w_ce*ce
};

struct VoteRecord {
    std::string case_id;
    std::vector<SentenceVote> sentences; // one per note sentence, ascending id
};

/// Throws ValidationError if a vote names a sentence the case does not have.
VoteRecord combine_votes(const MethodVotes& votes, const EnsembleConfig& cfg, const CaseRecord& c);

/// Sentences whose total vote reaches tau_ens (inclusive, no slack).
CitationSet decide(const VoteRecord& record, double tau_ens);
CitationSet decide(const VoteRecord& record, const EnsembleConfig& cfg);

/// The three score vectors of one case. `external` is empty when no reranker
/// scores are available, in which case the method abstains.
struct CaseScores {
    ScoreVector bm25;
    ScoreVector tfidf;
    std::optional<ScoreVector> external;
};

MethodVotes method_votes(const CaseScores& scores, const EnsembleConfig& cfg);

struct CaseResult {
    VoteRecord votes;
    CitationSet citations;
};

/// Full pipeline for one case: builds the query from the answer, scores the
/// sentences lexically, adds the external votes when `external` is given,
/// then combines and decides.
CaseResult run_case(const CaseRecord& c, const GoldAnswer& answer, const EnsembleConfig& cfg,
                    const ExternalScoreTable* external);

/// Raw scores of every method for a whole corpus.
struct ScoreBundle {
    ScoreTable bm25;
    ScoreTable tfidf;
    std::optional<ExternalScoreTable> external;
};

/// Computes the BM25 and TF-IDF tables; every case needs an answer.
ScoreBundle lexical_scores(std::span<const CaseRecord> cases, std::span<const GoldAnswer> answers,
                           const BM25Params& params);

ScoreTable score_method(Method method, std::span<const CaseRecord> cases,
                        std::span<const GoldAnswer> answers, const BM25Params& params);

/// Throws ValidationError when the external table is absent although the
/// configuration gives it weight and does not allow it to be missing.
void check_external_available(const ScoreBundle& bundle, const EnsembleConfig& cfg);

/// Per-case method votes, in case order. Coverage of every table is checked
/// first.
std::vector<MethodVotes> bundle_votes(std::span<const CaseRecord> cases, const ScoreBundle& bundle,
                                      const EnsembleConfig& cfg);

std::vector<CaseResult> run_ensemble(std::span<const CaseRecord> cases, const ScoreBundle& bundle,
                                     const EnsembleConfig& cfg);

/// Throws ValidationError listing the cases that have no answer.
void require_answers(std::span<const CaseRecord> cases, std::span<const GoldAnswer> answers);

} // namespace evalign
