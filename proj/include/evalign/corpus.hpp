#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evalign {

/// 1-based sentence number as printed in the note excerpt.
using SentenceId = std::int32_t;

enum class RelevanceLabel { essential, supplementary, not_relevant };

std::string_view to_string(RelevanceLabel label);
std::optional<RelevanceLabel> parse_relevance_label(std::string_view text);

struct NoteSentence {
    SentenceId id = 0;
    std::string text;
};

struct CaseRecord {
    std::string case_id;
    std::string patient_question;
    std::string clinician_question;
    std::vector<NoteSentence> sentences;
    std::optional<std::map<SentenceId, RelevanceLabel>> labels;

    std::size_t size() const noexcept { return sentences.size(); }
    bool has_sentence(SentenceId id) const noexcept
    {
        return id >= 1 && static_cast<std::size_t>(id) <= sentences.size();
    }
};

struct AnswerSentence {
    std::string text;
    std::vector<SentenceId> citations; // ascending, unique
};

struct GoldAnswer {
    std::string case_id;
    std::vector<AnswerSentence> answer_sentences;
};

struct CitationSet {
    std::string case_id;
    std::vector<SentenceId> cited; // ascending, unique

    friend bool operator==(const CitationSet&, const CitationSet&) = default;
};

/// Checks the CaseRecord invariants (non-empty, contiguous ids 1..N, non-empty
/// text, label keys equal to sentence ids). Throws ValidationError.
void validate_case(const CaseRecord& c);

/// Reads the `<cases>` XML format. Malformed XML raises ParseError carrying the
/// line number; invariant violations raise ValidationError naming the case.
std::vector<CaseRecord> parse_cases(std::istream& source);
std::vector<CaseRecord> parse_cases(std::string_view xml);

/// Reads the gold-answer JSON format. Citation ranges are only checked once the
/// answers are paired with cases (see pair_gold).
std::vector<GoldAnswer> parse_gold(std::istream& source);
std::vector<GoldAnswer> parse_gold(std::string_view json);

/// Checks that every gold answer refers to a known case and cites only ids of
/// that case. Throws ValidationError.
void validate_gold(std::span<const CaseRecord> cases, std::span<const GoldAnswer> golds);

/// Removes inline citation markers such as "[13,20]" together with the
/// whitespace in front of them, collapses doubled spaces and trims.
std::string strip_citation_markers(std::string_view text);

/// The retrieval query for a case: every answer sentence, marker-free, joined
/// with single spaces.
std::string answer_query_text(const GoldAnswer& gold);

void write_citations(std::span<const CitationSet> preds, std::ostream& sink);
std::string citations_to_json(std::span<const CitationSet> preds);
std::vector<CitationSet> read_citations(std::istream& source);
std::vector<CitationSet> read_citations(std::string_view json);

/// Sorts and de-duplicates; used when assembling sets from unordered votes.
CitationSet make_citation_set(std::string case_id, std::vector<SentenceId> ids);

const CaseRecord* find_case(std::span<const CaseRecord> cases, std::string_view case_id);
const GoldAnswer* find_gold(std::span<const GoldAnswer> golds, std::string_view case_id);

} // namespace evalign
