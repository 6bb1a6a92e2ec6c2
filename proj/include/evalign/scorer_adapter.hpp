#pragma once

#include "evalign/corpus.hpp"
#include "evalign/lexical.hpp"
#include "evalign/score_table.hpp"

#include <iosfwd>
#include <string_view>

namespace evalign {

/// Scores from an out-of-process reranker. Same TSV layout as the lexical
/// score files, but every score must already be in [0,1] (sigmoid space).
using ExternalScoreTable = ScoreTable;

/// Reads an external score file. A score outside [0,1] raises ValidationError
/// naming the row.
ExternalScoreTable load_scores(std::istream& source);
ExternalScoreTable load_scores(std::string_view tsv);

/// Per-case relative normalisation followed by inclusive thresholding.
VoteSet external_votes(const ExternalScoreTable& table, const CaseRecord& c, double tau_ce);

} // namespace evalign
