#include "evalign/score_table.hpp"

#include "evalign/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>

namespace evalign {

void ScoreTable::add(std::string case_id, SentenceId sentence_id, double score, std::size_t line)
{
    auto key = std::make_pair(case_id, sentence_id);
    if (index_.contains(key)) {
        throw ValidationError("duplicate score for case " + case_id + ", sentence " +
                              std::to_string(sentence_id));
    }
    index_.emplace(std::move(key), rows_.size());
    rows_.push_back({std::move(case_id), sentence_id, score, line});
}

const double* ScoreTable::find(std::string_view case_id, SentenceId sentence_id) const
{
    auto it = index_.find(std::make_pair(std::string(case_id), sentence_id));
    return it == index_.end() ? nullptr : &rows_[it->second].score;
}

bool ScoreTable::contains_case(std::string_view case_id) const
{
    auto it = index_.lower_bound(std::make_pair(std::string(case_id), SentenceId{0}));
    return it != index_.end() && it->first.first == case_id;
}

ScoreMap ScoreTable::slice(const CaseRecord& c) const
{
    ScoreMap out;
    for (const auto& s : c.sentences) {
        const double* v = find(c.case_id, s.id);
        if (!v) {
            throw ValidationError("no score for case " + c.case_id + ", sentence " +
                                  std::to_string(s.id));
        }
        out.emplace_hint(out.end(), s.id, *v);
    }
    return out;
}

namespace {

constexpr std::string_view header = "case_id\tsentence_id\tscore";

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
        if (tab == std::string_view::npos) {
            return out;
        }
        start = tab + 1;
    }
}

} // namespace

ScoreTable read_score_table(std::string_view tsv)
{
    ScoreTable table;
    std::size_t row = 0;
    std::size_t start = 0;
    bool saw_header = false;
    while (start < tsv.size()) {
        auto nl = tsv.find('\n', start);
        auto line = tsv.substr(start, nl == std::string_view::npos ? nl : nl - start);
        start = nl == std::string_view::npos ? tsv.size() : nl + 1;
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!saw_header) {
            if (line != header) {
                throw ParseError("score file must start with header \"case_id\\tsentence_id\\tscore\"",
                                 row);
            }
            saw_header = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split_tabs(line);
        if (fields.size() != 3) {
            throw ParseError("expected 3 tab-separated fields, found " +
                                 std::to_string(fields.size()),
                             row);
        }
        if (fields[0].empty()) {
            throw ParseError("empty case_id", row);
        }
        SentenceId sid = 0;
        auto [p1, e1] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), sid);
        if (e1 != std::errc() || p1 != fields[1].data() + fields[1].size() || sid < 1) {
            throw ParseError("sentence_id must be a positive integer", row);
        }
        double score = 0.0;
        auto [p2, e2] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), score);
        if (e2 != std::errc() || p2 != fields[2].data() + fields[2].size() || fields[2].empty() ||
            !std::isfinite(score)) {
            throw ParseError("score is not a finite number: '" + std::string(fields[2]) + "'", row);
        }
        try {
            table.add(std::string(fields[0]), sid, score, row);
        } catch (const ValidationError& e) {
            throw ValidationError("row " + std::to_string(row) + ": " + e.what());
        }
    }
    if (!saw_header) {
        throw ParseError("empty score file", 1);
    }
    return table;
}

ScoreTable read_score_table(std::istream& source)
{
    std::string data{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
    if (source.bad()) {
        throw IoError("failed to read score file");
    }
    return read_score_table(data);
}

std::string format_score(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string score_table_to_tsv(const ScoreTable& table)
{
    std::string out(header);
    out += '\n';
    for (const auto& r : table.rows()) {
        out += r.case_id;
        out += '\t';
        out += std::to_string(r.sentence_id);
        out += '\t';
        out += format_score(r.score);
        out += '\n';
    }
    return out;
}

void write_score_table(const ScoreTable& table, std::ostream& sink)
{
    sink << score_table_to_tsv(table);
    if (!sink) {
        throw IoError("failed to write score file");
    }
}

void append_case(ScoreTable& table, const std::string& case_id, const ScoreMap& scores)
{
    for (const auto& [id, s] : scores) {
        table.add(case_id, id, s);
    }
}

void validate_coverage(const ScoreTable& table, std::span<const CaseRecord> cases)
{
    constexpr std::size_t max_listed = 20;
    std::vector<std::string> missing;
    std::vector<std::string> unknown;
    auto pair_name = [](const std::string& cid, SentenceId sid) {
        return "(" + cid + ", " + std::to_string(sid) + ")";
    };

    for (const auto& c : cases) {
        for (const auto& s : c.sentences) {
            if (!table.find(c.case_id, s.id)) {
                missing.push_back(pair_name(c.case_id, s.id));
            }
        }
    }
    for (const auto& r : table.rows()) {
        const auto* c = find_case(cases, r.case_id);
        if (!c) {
            unknown.push_back(pair_name(r.case_id, r.sentence_id) + " unknown case " + r.case_id);
        } else if (!c->has_sentence(r.sentence_id)) {
            unknown.push_back(pair_name(r.case_id, r.sentence_id));
        }
    }
    if (missing.empty() && unknown.empty()) {
        return;
    }

    auto list = [&](const char* title, const std::vector<std::string>& items) {
        std::string out = std::string(title) + " (" + std::to_string(items.size()) + "):";
        for (std::size_t i = 0; i < items.size() && i < max_listed; ++i) {
            out += " " + items[i];
        }
        if (items.size() > max_listed) {
            out += " ... and " + std::to_string(items.size() - max_listed) + " more";
        }
        return out;
    };
    std::string msg = "score coverage mismatch";
    if (!missing.empty()) {
        msg += "; " + list("missing pairs", missing);
    }
    if (!unknown.empty()) {
        msg += "; " + list("unknown pairs", unknown);
    }
    throw ValidationError(msg);
}

} // namespace evalign
