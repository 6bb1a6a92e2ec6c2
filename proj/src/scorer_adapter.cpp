#include "evalign/scorer_adapter.hpp"

#include "evalign/error.hpp"

#include <istream>
#include <iterator>
#include <string>

namespace evalign {

ExternalScoreTable load_scores(std::string_view tsv)
{
    auto table = read_score_table(tsv);
    for (const auto& r : table.rows()) {
        if (!(r.score >= 0.0 && r.score <= 1.0)) {
            throw ValidationError("row " + std::to_string(r.line) + ": external score " +
                                  format_score(r.score) + " outside [0,1] (case " + r.case_id +
                                  ", sentence " + std::to_string(r.sentence_id) + ")");
        }
    }
    return table;
}

ExternalScoreTable load_scores(std::istream& source)
{
    std::string data{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
    if (source.bad()) {
        throw IoError("failed to read score file");
    }
    return load_scores(data);
}

VoteSet external_votes(const ExternalScoreTable& table, const CaseRecord& c, double tau_ce)
{
    return votes_from_scores(normalize_relative(table.slice(c)), tau_ce);
}

} // namespace evalign
