#include "evalign/corpus.hpp"

#include "evalign/error.hpp"
#include "json_util.hpp"
#include "xml_reader.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <iterator>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

namespace evalign {

std::string_view to_string(RelevanceLabel label)
{
    switch (label) {
    case RelevanceLabel::essential:
        return "essential";
    case RelevanceLabel::supplementary:
        return "supplementary";
    case RelevanceLabel::not_relevant:
        return "not-relevant";
    }
    return "?";
}

std::optional<RelevanceLabel> parse_relevance_label(std::string_view text)
{
    if (text == "essential") {
        return RelevanceLabel::essential;
    }
    if (text == "supplementary") {
        return RelevanceLabel::supplementary;
    }
    if (text == "not-relevant") {
        return RelevanceLabel::not_relevant;
    }
    return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s)
{
    constexpr std::string_view ws = " \t\r\n";
    auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) {
        return {};
    }
    auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::optional<SentenceId> parse_id(std::string_view s)
{
    s = trim(s);
    SentenceId v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return v;
}

std::string read_all(std::istream& in)
{
    std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (in.bad()) {
        throw IoError("failed to read input stream");
    }
    return data;
}

std::string where(const xml::Element& el)
{
    return "line " + std::to_string(el.line);
}

const xml::Element& required_child(const xml::Element& parent, std::string_view name,
                                   const std::string& case_id)
{
    const auto* c = parent.child(name);
    if (!c) {
        throw ValidationError("case " + case_id + ": missing <" + std::string(name) + "> (" +
                              where(parent) + ")");
    }
    return *c;
}

CaseRecord case_from_element(const xml::Element& el)
{
    CaseRecord rec;
    auto id = el.attribute("id");
    if (!id || trim(*id).empty()) {
        throw ValidationError("<case> without id attribute (" + where(el) + ")");
    }
    rec.case_id = std::string(trim(*id));

    for (const auto& child : el.children) {
        if (child.name != "patient_question" && child.name != "clinician_question" &&
            child.name != "note_excerpt_sentences" && child.name != "labels") {
            throw ValidationError("case " + rec.case_id + ": unexpected element <" + child.name +
                                  "> (" + where(child) + ")");
        }
    }

    rec.patient_question = std::string(trim(required_child(el, "patient_question", rec.case_id).text));
    rec.clinician_question =
        std::string(trim(required_child(el, "clinician_question", rec.case_id).text));

    const auto& excerpt = required_child(el, "note_excerpt_sentences", rec.case_id);
    for (const auto& s : excerpt.children) {
        if (s.name != "sentence") {
            throw ValidationError("case " + rec.case_id + ": unexpected element <" + s.name +
                                  "> in note_excerpt_sentences (" + where(s) + ")");
        }
        auto sid_attr = s.attribute("id");
        auto sid = sid_attr ? parse_id(*sid_attr) : std::nullopt;
        if (!sid) {
            throw ValidationError("case " + rec.case_id + ": sentence without integer id (" +
                                  where(s) + ")");
        }
        rec.sentences.push_back({*sid, std::string(trim(s.text))});
    }

    if (const auto* labels = el.child("labels")) {
        std::map<SentenceId, RelevanceLabel> map;
        for (const auto& l : labels->children) {
            if (l.name != "label") {
                throw ValidationError("case " + rec.case_id + ": unexpected element <" + l.name +
                                      "> in labels (" + where(l) + ")");
            }
            auto sid_attr = l.attribute("sentence");
            auto sid = sid_attr ? parse_id(*sid_attr) : std::nullopt;
            if (!sid) {
                throw ValidationError("case " + rec.case_id + ": label without integer sentence (" +
                                      where(l) + ")");
            }
            auto value = parse_relevance_label(trim(l.text));
            if (!value) {
                throw ValidationError("case " + rec.case_id + ": unknown relevance label '" +
                                      std::string(trim(l.text)) + "' (" + where(l) + ")");
            }
            if (!map.emplace(*sid, *value).second) {
                throw ValidationError("case " + rec.case_id + ": duplicate label for sentence " +
                                      std::to_string(*sid));
            }
        }
        rec.labels = std::move(map);
    }

    validate_case(rec);
    return rec;
}

std::vector<SentenceId> sorted_unique(std::vector<SentenceId> ids)
{
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

} // namespace

void validate_case(const CaseRecord& c)
{
    if (c.case_id.empty()) {
        throw ValidationError("case with empty id");
    }
    if (c.sentences.empty()) {
        throw ValidationError("case " + c.case_id + ": no note sentences");
    }
    std::set<SentenceId> seen;
    for (const auto& s : c.sentences) {
        if (!seen.insert(s.id).second) {
            throw ValidationError("duplicate sentence id " + std::to_string(s.id) + " in case " +
                                  c.case_id);
        }
    }
    for (std::size_t i = 0; i < c.sentences.size(); ++i) {
        if (c.sentences[i].id != static_cast<SentenceId>(i + 1)) {
            throw ValidationError("non-contiguous ids in case " + c.case_id);
        }
        if (c.sentences[i].text.empty()) {
            throw ValidationError("empty sentence text for sentence " +
                                  std::to_string(c.sentences[i].id) + " in case " + c.case_id);
        }
    }
    if (c.labels) {
        bool same_keys = c.labels->size() == c.sentences.size() &&
                         std::all_of(c.labels->begin(), c.labels->end(),
                                     [&](const auto& kv) { return c.has_sentence(kv.first); });
        if (!same_keys) {
            throw ValidationError("case " + c.case_id +
                                  ": label ids do not match the sentence ids");
        }
    }
}

std::vector<CaseRecord> parse_cases(std::string_view xml_text)
{
    auto root = xml::parse_document(xml_text);
    if (root.name != "cases") {
        throw ValidationError("root element must be <cases>, found <" + root.name + ">");
    }
    std::vector<CaseRecord> out;
    std::set<std::string> ids;
    for (const auto& el : root.children) {
        if (el.name != "case") {
            throw ValidationError("unexpected element <" + el.name + "> (" + where(el) + ")");
        }
        auto rec = case_from_element(el);
        if (!ids.insert(rec.case_id).second) {
            throw ValidationError("duplicate case id " + rec.case_id);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<CaseRecord> parse_cases(std::istream& source)
{
    return parse_cases(read_all(source));
}

std::vector<GoldAnswer> parse_gold(std::string_view json_text)
{
    auto doc = detail::parse_json(json_text);
    if (!doc.is_object() || !doc.contains("cases") || !doc["cases"].is_array()) {
        throw ValidationError("gold file must be an object with a \"cases\" array");
    }
    std::vector<GoldAnswer> out;
    std::set<std::string> ids;
    for (const auto& entry : doc["cases"]) {
        GoldAnswer g;
        g.case_id = detail::require_string(entry, "case_id", "gold entry");
        const std::string ctx = "gold case " + g.case_id;
        if (!entry.contains("answer_sentences") || !entry["answer_sentences"].is_array()) {
            throw ValidationError(ctx + ": missing \"answer_sentences\" array");
        }
        for (const auto& s : entry["answer_sentences"]) {
            AnswerSentence a;
            a.text = detail::require_string(s, "text", ctx);
            a.citations = sorted_unique(detail::require_id_array(s, "citations", ctx));
            g.answer_sentences.push_back(std::move(a));
        }
        if (g.answer_sentences.empty()) {
            throw ValidationError(ctx + ": no answer sentences");
        }
        if (!ids.insert(g.case_id).second) {
            throw ValidationError("duplicate gold case id " + g.case_id);
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<GoldAnswer> parse_gold(std::istream& source)
{
    return parse_gold(read_all(source));
}

void validate_gold(std::span<const CaseRecord> cases, std::span<const GoldAnswer> golds)
{
    for (const auto& g : golds) {
        const auto* c = find_case(cases, g.case_id);
        if (!c) {
            throw ValidationError("gold answer for unknown case " + g.case_id);
        }
        for (const auto& a : g.answer_sentences) {
            for (auto id : a.citations) {
                if (!c->has_sentence(id)) {
                    throw ValidationError("gold case " + g.case_id + " cites sentence " +
                                          std::to_string(id) + " but the case has " +
                                          std::to_string(c->size()) + " sentences");
                }
            }
        }
    }
}

std::string strip_citation_markers(std::string_view text)
{
    static const std::regex marker(R"(\s*\[\s*[0-9]+(\s*,\s*[0-9]+)*\s*\])");
    std::string out(text);
    // Removing one marker can expose another, e.g. "[[1]2]".
    for (;;) {
        std::string next = std::regex_replace(out, marker, "");
        if (next == out) {
            break;
        }
        out = std::move(next);
    }
    std::string collapsed;
    collapsed.reserve(out.size());
    for (char c : out) {
        if (c == ' ' && !collapsed.empty() && collapsed.back() == ' ') {
            continue;
        }
        collapsed += c;
    }
    return std::string(trim(collapsed));
}

std::string answer_query_text(const GoldAnswer& gold)
{
    std::string out;
    for (const auto& a : gold.answer_sentences) {
        auto text = strip_citation_markers(a.text);
        if (text.empty()) {
            continue;
        }
        if (!out.empty()) {
            out += ' ';
        }
        out += text;
    }
    return out;
}

std::string citations_to_json(std::span<const CitationSet> preds)
{
    std::string out = "{\"predictions\":[";
    for (std::size_t i = 0; i < preds.size(); ++i) {
        nlohmann::ordered_json entry;
        entry["case_id"] = preds[i].case_id;
        entry["citations"] = preds[i].cited;
        out += i == 0 ? "\n" : ",\n";
        out += entry.dump();
    }
    out += preds.empty() ? "]}\n" : "\n]}\n";
    return out;
}

void write_citations(std::span<const CitationSet> preds, std::ostream& sink)
{
    sink << citations_to_json(preds);
    if (!sink) {
        throw IoError("failed to write predictions");
    }
}

std::vector<CitationSet> read_citations(std::string_view json_text)
{
    auto doc = detail::parse_json(json_text);
    if (!doc.is_object() || !doc.contains("predictions") || !doc["predictions"].is_array()) {
        throw ValidationError("prediction file must be an object with a \"predictions\" array");
    }
    std::vector<CitationSet> out;
    std::set<std::string> ids;
    for (const auto& entry : doc["predictions"]) {
        CitationSet p;
        p.case_id = detail::require_string(entry, "case_id", "prediction entry");
        p.cited = detail::require_id_array(entry, "citations", "prediction " + p.case_id);
        for (std::size_t i = 1; i < p.cited.size(); ++i) {
            if (p.cited[i] <= p.cited[i - 1]) {
                throw ValidationError("prediction " + p.case_id +
                                      ": citations must be ascending without duplicates");
            }
        }
        if (!ids.insert(p.case_id).second) {
            throw ValidationError("duplicate prediction for case " + p.case_id);
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<CitationSet> read_citations(std::istream& source)
{
    return read_citations(read_all(source));
}

CitationSet make_citation_set(std::string case_id, std::vector<SentenceId> ids)
{
    return {std::move(case_id), sorted_unique(std::move(ids))};
}

const CaseRecord* find_case(std::span<const CaseRecord> cases, std::string_view case_id)
{
    auto it = std::find_if(cases.begin(), cases.end(),
                           [&](const CaseRecord& c) { return c.case_id == case_id; });
    return it == cases.end() ? nullptr : &*it;
}

const GoldAnswer* find_gold(std::span<const GoldAnswer> golds, std::string_view case_id)
{
    auto it = std::find_if(golds.begin(), golds.end(),
                           [&](const GoldAnswer& g) { return g.case_id == case_id; });
    return it == golds.end() ? nullptr : &*it;
}

} // namespace evalign
