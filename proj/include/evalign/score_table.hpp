#pragma once

#include "evalign/corpus.hpp"
#include "evalign/lexical.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evalign {

/// Raw per-(case, sentence) scores of one method, in insertion order.
///
/// This is the in-memory form of the score TSV:
///
///     case_id<TAB>sentence_id<TAB>score
///
/// with one header line and one row per pair.
class ScoreTable {
public:
    struct Row {
        std::string case_id;
        SentenceId sentence_id = 0;
        double score = 0.0;
        std::size_t line = 0; // source row, 0 when not read from a file
    };

    /// Throws ValidationError on a duplicate key.
    void add(std::string case_id, SentenceId sentence_id, double score, std::size_t line = 0);

    const std::vector<Row>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }

    const double* find(std::string_view case_id, SentenceId sentence_id) const;
    bool contains_case(std::string_view case_id) const;

    /// All scores of one case keyed by sentence id. Throws ValidationError if
    /// any sentence of the case is missing.
    ScoreMap slice(const CaseRecord& c) const;

private:
    std::vector<Row> rows_;
    std::map<std::pair<std::string, SentenceId>, std::size_t, std::less<>> index_;
};

/// Parses the TSV. Row numbers in errors count the header as row 1.
/// Non-numeric or non-finite scores raise ParseError; duplicate keys raise
/// ValidationError.
ScoreTable read_score_table(std::istream& source);
ScoreTable read_score_table(std::string_view tsv);

/// Scores are printed with 17 significant digits so that a write/read cycle
/// reproduces every double exactly.
void write_score_table(const ScoreTable& table, std::ostream& sink);
std::string score_table_to_tsv(const ScoreTable& table);

/// Appends one case's scores in ascending sentence order.
void append_case(ScoreTable& table, const std::string& case_id, const ScoreMap& scores);

/// Checks that the table covers exactly every (case, sentence) pair. On
/// failure the ValidationError lists up to 20 missing and 20 unknown pairs,
/// followed by a count of the rest.
void validate_coverage(const ScoreTable& table, std::span<const CaseRecord> cases);

std::string format_score(double value);

} // namespace evalign
