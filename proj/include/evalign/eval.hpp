#pragma once

#include "evalign/corpus.hpp"
#include "evalign/ensemble.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evalign {

/// Which annotation defines the reference evidence of a case.
enum class GoldMode { citations, essential, essential_plus_supplementary };

std::string_view to_string(GoldMode mode);
std::optional<GoldMode> parse_gold_mode(std::string_view text);

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept
    {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct PRF {
    double p = 0.0;
    double r = 0.0;
    double f1 = 0.0;
};

struct CaseEval {
    std::string case_id;
    ConfusionCounts counts;
    PRF scores;
};

struct EvalReport {
    PRF micro;
    PRF macro;
    std::vector<CaseEval> per_case;
};

/// Reference ids of a case under `mode`. `gold` may be null for the label
/// modes; the citation mode needs it, and the label modes need case labels.
CitationSet gold_set(const CaseRecord& c, const GoldAnswer* gold, GoldMode mode);

/// tp = |pred ∩ gold|, fp = |pred \ gold|, fn = |gold \ pred|.
ConfusionCounts confusion(const CitationSet& pred, const CitationSet& gold, std::size_t n_sentences);

/// Precision, recall and F1 of a single count triple. An empty denominator
/// yields 1 for precision/recall; F1 is 0 when p + r = 0.
PRF scores_from_counts(const ConfusionCounts& counts);

/// Pools the counts, then applies scores_from_counts.
PRF micro_scores(std::span<const ConfusionCounts> counts);

/// Unweighted means of per-case p, r and f1. Macro-F1 is the mean of the
/// per-case F1 values, not the harmonic mean of macro-P and macro-R. Throws
/// ValidationError on an empty list.
PRF macro_scores(std::span<const PRF> per_case);

/// Case ids of `preds` must match `cases` exactly; `golds` may not name
/// unknown cases and must cover every case in citation mode. Prediction ids
/// outside a case raise ValidationError.
EvalReport evaluate(std::span<const CaseRecord> cases, std::span<const GoldAnswer> golds,
                    std::span<const CitationSet> preds, GoldMode mode = GoldMode::citations);

struct CalibrationPoint {
    double tau_ens = 0.0;
    EvalReport report;
};

struct CalibrationResult {
    std::vector<CalibrationPoint> points;
    std::size_t best = 0; // index of the micro-F1 argmax, ties to the larger tau

    const CalibrationPoint& best_point() const { return points.at(best); }
};

/// Sweeps tau_ens over `grid` (non-empty, strictly ascending, nonnegative).
/// Method votes are computed once and re-thresholded per grid point.
CalibrationResult calibrate(std::span<const CaseRecord> cases, std::span<const GoldAnswer> golds,
                            const ScoreBundle& bundle, const EnsembleConfig& cfg_template,
                            std::span<const double> grid, GoldMode mode = GoldMode::citations);

/// Same sweep from already extracted per-case method votes (one per case).
CalibrationResult calibrate_votes(std::span<const CaseRecord> cases,
                                  std::span<const GoldAnswer> golds,
                                  std::span<const MethodVotes> votes,
                                  const EnsembleConfig& cfg_template, std::span<const double> grid,
                                  GoldMode mode = GoldMode::citations);

/// lower, lower+step, ... up to `upper` inclusive. Points are rounded to nine
/// decimals so that e.g. 0.855 compares equal to the literal 0.855.
std::vector<double> make_grid(double lower, double upper, double step);

std::string report_to_json(const EvalReport& report);
std::string calibration_to_tsv(const CalibrationResult& result);

/// "67.16" style rendering of a [0,1] score.
std::string percent(double value);

} // namespace evalign
