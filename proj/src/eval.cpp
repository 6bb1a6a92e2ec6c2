#include "evalign/eval.hpp"

#include "evalign/error.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <set>

namespace evalign {

std::string_view to_string(GoldMode mode)
{
    switch (mode) {
    case GoldMode::citations:
        return "citations";
    case GoldMode::essential:
        return "essential";
    case GoldMode::essential_plus_supplementary:
        return "essential_plus_supplementary";
    }
    return "?";
}

std::optional<GoldMode> parse_gold_mode(std::string_view text)
{
    for (auto m : {GoldMode::citations, GoldMode::essential, GoldMode::essential_plus_supplementary}) {
        if (text == to_string(m)) {
            return m;
        }
    }
    return std::nullopt;
}

CitationSet gold_set(const CaseRecord& c, const GoldAnswer* gold, GoldMode mode)
{
    std::vector<SentenceId> ids;
    if (mode == GoldMode::citations) {
        if (!gold) {
            throw ValidationError("gold mode citations needs a gold answer for case " + c.case_id);
        }
        for (const auto& a : gold->answer_sentences) {
            ids.insert(ids.end(), a.citations.begin(), a.citations.end());
        }
    } else {
        if (!c.labels) {
            throw ValidationError("gold mode " + std::string(to_string(mode)) +
                                  " needs relevance labels for case " + c.case_id);
        }
        for (const auto& [id, label] : *c.labels) {
            if (label == RelevanceLabel::essential ||
                (mode == GoldMode::essential_plus_supplementary &&
                 label == RelevanceLabel::supplementary)) {
                ids.push_back(id);
            }
        }
    }
    return make_citation_set(c.case_id, std::move(ids));
}

ConfusionCounts confusion(const CitationSet& pred, const CitationSet& gold, std::size_t)
{
    std::vector<SentenceId> common;
    std::set_intersection(pred.cited.begin(), pred.cited.end(), gold.cited.begin(),
                          gold.cited.end(), std::back_inserter(common));
    return {common.size(), pred.cited.size() - common.size(), gold.cited.size() - common.size()};
}

PRF scores_from_counts(const ConfusionCounts& c)
{
    PRF s;
    s.p = c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    s.r = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    s.f1 = s.p + s.r == 0.0 ? 0.0 : 2.0 * s.p * s.r / (s.p + s.r);
    return s;
}

PRF micro_scores(std::span<const ConfusionCounts> counts)
{
    ConfusionCounts total;
    for (const auto& c : counts) {
        total += c;
    }
    return scores_from_counts(total);
}

PRF macro_scores(std::span<const PRF> per_case)
{
    if (per_case.empty()) {
        throw ValidationError("macro scores need at least one case");
    }
    PRF sum;
    for (const auto& s : per_case) {
        sum.p += s.p;
        sum.r += s.r;
        sum.f1 += s.f1;
    }
    const auto n = static_cast<double>(per_case.size());
    return {sum.p / n, sum.r / n, sum.f1 / n};
}

namespace {

std::string join_ids(const std::vector<std::string>& ids)
{
    std::string out;
    for (const auto& id : ids) {
        out += out.empty() ? id : ", " + id;
    }
    return out;
}

void check_alignment(std::span<const CaseRecord> cases, std::span<const GoldAnswer> golds,
                     std::span<const CitationSet> preds, GoldMode mode)
{
    std::set<std::string> case_ids;
    for (const auto& c : cases) {
        case_ids.insert(c.case_id);
    }
    std::vector<std::string> problems;
    std::set<std::string> pred_ids;
    for (const auto& p : preds) {
        pred_ids.insert(p.case_id);
        if (!case_ids.contains(p.case_id)) {
            problems.push_back(p.case_id + " (prediction for unknown case)");
        }
    }
    for (const auto& c : cases) {
        if (!pred_ids.contains(c.case_id)) {
            problems.push_back(c.case_id + " (no prediction)");
        }
        if (mode == GoldMode::citations && !find_gold(golds, c.case_id)) {
            problems.push_back(c.case_id + " (no gold answer)");
        }
    }
    for (const auto& g : golds) {
        if (!case_ids.contains(g.case_id)) {
            problems.push_back(g.case_id + " (gold for unknown case)");
        }
    }
    if (!problems.empty()) {
        throw ValidationError("case id mismatch: " + join_ids(problems));
    }
}

EvalReport assemble(std::vector<CaseEval> per_case)
{
    std::vector<ConfusionCounts> counts;
    std::vector<PRF> scores;
    for (const auto& e : per_case) {
        counts.push_back(e.counts);
        scores.push_back(e.scores);
    }
    EvalReport report;
    report.micro = micro_scores(counts);
    report.macro = macro_scores(scores);
    report.per_case = std::move(per_case);
    return report;
}

CaseEval evaluate_case(const CaseRecord& c, const CitationSet& gold, const CitationSet& pred)
{
    for (auto id : pred.cited) {
        if (!c.has_sentence(id)) {
            throw ValidationError("prediction for case " + c.case_id + " cites sentence " +
                                  std::to_string(id) + " outside 1.." +
                                  std::to_string(c.size()));
        }
    }
    auto counts = confusion(pred, gold, c.size());
    return {c.case_id, counts, scores_from_counts(counts)};
}

} // namespace

EvalReport evaluate(std::span<const CaseRecord> cases, std::span<const GoldAnswer> golds,
                    std::span<const CitationSet> preds, GoldMode mode)
{
    if (cases.empty()) {
        throw ValidationError("nothing to evaluate: no cases");
    }
    check_alignment(cases, golds, preds, mode);
    std::vector<CaseEval> per_case;
    for (const auto& c : cases) {
        auto pred = std::find_if(preds.begin(), preds.end(),
                                 [&](const CitationSet& p) { return p.case_id == c.case_id; });
        per_case.push_back(evaluate_case(c, gold_set(c, find_gold(golds, c.case_id), mode), *pred));
    }
    return assemble(std::move(per_case));
}

CalibrationResult calibrate_votes(std::span<const CaseRecord> cases,
                                  std::span<const GoldAnswer> golds,
                                  std::span<const MethodVotes> votes,
                                  const EnsembleConfig& cfg_template, std::span<const double> grid,
                                  GoldMode mode)
{
    if (grid.empty()) {
        throw ValidationError("calibration grid is empty");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
            throw ValidationError("calibration grid values must be nonnegative");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw ValidationError("calibration grid must be strictly ascending");
        }
    }
    if (votes.size() != cases.size()) {
        throw ValidationError("one vote set per case required");
    }
    if (cases.empty()) {
        throw ValidationError("nothing to calibrate: no cases");
    }

    std::vector<VoteRecord> records;
    std::vector<CitationSet> golds_per_case;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        records.push_back(combine_votes(votes[i], cfg_template, cases[i]));
        golds_per_case.push_back(gold_set(cases[i], find_gold(golds, cases[i].case_id), mode));
    }

    CalibrationResult result;
    for (double tau : grid) {
        std::vector<CaseEval> per_case;
        for (std::size_t i = 0; i < cases.size(); ++i) {
            per_case.push_back(evaluate_case(cases[i], golds_per_case[i], decide(records[i], tau)));
        }
        result.points.push_back({tau, assemble(std::move(per_case))});
        const auto& candidate = result.points.back().report.micro.f1;
        if (candidate >= result.points[result.best].report.micro.f1) {
            result.best = result.points.size() - 1;
        }
    }
    return result;
}

CalibrationResult calibrate(std::span<const CaseRecord> cases, std::span<const GoldAnswer> golds,
                            const ScoreBundle& bundle, const EnsembleConfig& cfg_template,
                            std::span<const double> grid, GoldMode mode)
{
    auto votes = bundle_votes(cases, bundle, cfg_template);
    return calibrate_votes(cases, golds, votes, cfg_template, grid, mode);
}

std::vector<double> make_grid(double lower, double upper, double step)
{
    if (!(step > 0.0) || !(upper >= lower) || !std::isfinite(upper) || !std::isfinite(lower)) {
        throw ValidationError("grid needs step > 0 and upper >= lower");
    }
    const auto n = static_cast<std::size_t>(std::floor((upper - lower) / step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid.push_back(std::round((lower + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
    return grid;
}

namespace {

nlohmann::ordered_json prf_json(const PRF& s)
{
    nlohmann::ordered_json j;
    j["p"] = s.p;
    j["r"] = s.r;
    j["f1"] = s.f1;
    return j;
}

std::string shortest(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

} // namespace

std::string report_to_json(const EvalReport& report)
{
    nlohmann::ordered_json j;
    j["micro"] = prf_json(report.micro);
    j["macro"] = prf_json(report.macro);
    j["per_case"] = nlohmann::ordered_json::array();
    for (const auto& e : report.per_case) {
        nlohmann::ordered_json c;
        c["case_id"] = e.case_id;
        c["tp"] = e.counts.tp;
        c["fp"] = e.counts.fp;
        c["fn"] = e.counts.fn;
        c["p"] = e.scores.p;
        c["r"] = e.scores.r;
        c["f1"] = e.scores.f1;
        j["per_case"].push_back(std::move(c));
    }
    return j.dump(2) + "\n";
}

std::string calibration_to_tsv(const CalibrationResult& result)
{
    auto row = [](const CalibrationPoint& pt) {
        const auto& m = pt.report.micro;
        return shortest(pt.tau_ens) + "\t" + shortest(m.p) + "\t" + shortest(m.r) + "\t" +
               shortest(m.f1) + "\n";
    };
    std::string out = "tau_ens\tmicro_p\tmicro_r\tmicro_f1\n";
    for (const auto& pt : result.points) {
        out += row(pt);
    }
    out += "# best\t" + row(result.best_point());
    return out;
}

std::string percent(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
    return buf;
}

} // namespace evalign
