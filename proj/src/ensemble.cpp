#include "evalign/ensemble.hpp"

#include "evalign/error.hpp"
#include "json_util.hpp"

#include <cmath>
#include <istream>
#include <iterator>

namespace evalign {

void validate(const EnsembleConfig& cfg)
{
    for (auto [name, w] : {std::pair{"w_bm25", cfg.w_bm25}, std::pair{"w_tfidf", cfg.w_tfidf},
                           std::pair{"w_ce", cfg.w_ce}}) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ValidationError(std::string(name) + " must be a nonnegative number");
        }
    }
    if (!(cfg.total_weight() > 0.0)) {
        throw ValidationError("at least one method weight must be positive");
    }
    for (auto [name, t] : {std::pair{"tau_bm25", cfg.tau_bm25}, std::pair{"tau_tfidf", cfg.tau_tfidf},
                           std::pair{"tau_ce", cfg.tau_ce}}) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw ValidationError(std::string(name) + " must lie in [0,1]");
        }
    }
    if (!(cfg.tau_ens >= 0.0) || !std::isfinite(cfg.tau_ens)) {
        throw ValidationError("tau_ens must be a nonnegative number");
    }
    if (cfg.tau_ens > cfg.total_weight()) {
        throw ValidationError("tau_ens " + format_score(cfg.tau_ens) +
                              " exceeds the weight total " + format_score(cfg.total_weight()) +
                              "; nothing could be cited");
    }
    validate(cfg.bm25);
}

EnsembleConfig parse_config(std::string_view json)
{
    auto doc = detail::parse_json(json);
    if (!doc.is_object()) {
        throw ValidationError("config must be a JSON object");
    }
    EnsembleConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "allow_missing_external") {
            if (!value.is_boolean()) {
                throw ValidationError("config: allow_missing_external must be a boolean");
            }
            cfg.allow_missing_external = value.get<bool>();
            continue;
        }
        double* slot = nullptr;
        if (key == "w_bm25") slot = &cfg.w_bm25;
        else if (key == "w_tfidf") slot = &cfg.w_tfidf;
        else if (key == "w_ce") slot = &cfg.w_ce;
        else if (key == "tau_bm25") slot = &cfg.tau_bm25;
        else if (key == "tau_tfidf") slot = &cfg.tau_tfidf;
        else if (key == "tau_ce") slot = &cfg.tau_ce;
        else if (key == "tau_ens") slot = &cfg.tau_ens;
        else if (key == "bm25_k1") slot = &cfg.bm25.k1;
        else if (key == "bm25_b") slot = &cfg.bm25.b;
        else {
            throw ValidationError("config: unknown key \"" + key + "\"");
        }
        if (!value.is_number()) {
            throw ValidationError("config: " + key + " must be a number");
        }
        *slot = value.get<double>();
    }
    validate(cfg);
    return cfg;
}

EnsembleConfig load_config(std::istream& source)
{
    std::string data{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
    if (source.bad()) {
        throw IoError("failed to read config");
    }
    return parse_config(data);
}

std::string config_to_json(const EnsembleConfig& cfg)
{
    nlohmann::ordered_json j;
    j["w_bm25"] = cfg.w_bm25;
    j["w_tfidf"] = cfg.w_tfidf;
    j["w_ce"] = cfg.w_ce;
    j["tau_bm25"] = cfg.tau_bm25;
    j["tau_tfidf"] = cfg.tau_tfidf;
    j["tau_ce"] = cfg.tau_ce;
    j["tau_ens"] = cfg.tau_ens;
    j["bm25_k1"] = cfg.bm25.k1;
    j["bm25_b"] = cfg.bm25.b;
    j["allow_missing_external"] = cfg.allow_missing_external;
    return j.dump();
}

EnsembleConfig lexical_only(EnsembleConfig cfg)
{
    cfg.w_ce = 0.0;
    cfg.allow_missing_external = true;
    return cfg;
}

VoteRecord combine_votes(const MethodVotes& votes, const EnsembleConfig& cfg, const CaseRecord& c)
{
    for (const auto* set : {&votes.bm25, &votes.tfidf, &votes.ce}) {
        for (auto id : *set) {
            if (!c.has_sentence(id)) {
                throw ValidationError("vote for unknown sentence " + std::to_string(id) +
                                      " in case " + c.case_id);
            }
        }
    }
    VoteRecord record{c.case_id, {}};
    record.sentences.reserve(c.sentences.size());
    for (const auto& s : c.sentences) {
        SentenceVote v;
        v.id = s.id;
        v.bm25 = votes.bm25.contains(s.id);
        v.tfidf = votes.tfidf.contains(s.id);
        v.ce = votes.ce.contains(s.id);
        v.total = (v.bm25 ? cfg.w_bm25 : 0.0) + (v.tfidf ? cfg.w_tfidf : 0.0) +
                  (v.ce ? cfg.w_ce : 0.0);
        record.sentences.push_back(v);
    }
    return record;
}

CitationSet decide(const VoteRecord& record, double tau_ens)
{
    CitationSet out{record.case_id, {}};
    for (const auto& v : record.sentences) {
        if (v.total >= tau_ens) {
            out.cited.push_back(v.id);
        }
    }
    return out;
}

CitationSet decide(const VoteRecord& record, const EnsembleConfig& cfg)
{
    return decide(record, cfg.tau_ens);
}

MethodVotes method_votes(const CaseScores& scores, const EnsembleConfig& cfg)
{
    MethodVotes v;
    v.bm25 = votes_from_scores(scores.bm25.normalized, cfg.tau_bm25);
    v.tfidf = votes_from_scores(scores.tfidf.normalized, cfg.tau_tfidf);
    if (scores.external) {
        v.ce = votes_from_scores(scores.external->normalized, cfg.tau_ce);
    }
    return v;
}

namespace {

void require_external(bool present, const EnsembleConfig& cfg)
{
    if (!present && cfg.w_ce > 0.0 && !cfg.allow_missing_external) {
        throw ValidationError("no external reranker scores supplied; provide them, set "
                              "allow_missing_external, or use a lexical-only configuration");
    }
}

} // namespace

CaseResult run_case(const CaseRecord& c, const GoldAnswer& answer, const EnsembleConfig& cfg,
                    const ExternalScoreTable* external)
{
    require_external(external != nullptr, cfg);
    const auto query = answer_query_text(answer);
    CaseScores scores{
        make_score_vector(c.case_id, Method::bm25, bm25_scores(query, c, cfg.bm25)),
        make_score_vector(c.case_id, Method::tfidf, tfidf_cosine(query, c)),
        std::nullopt,
    };
    if (external) {
        scores.external = make_score_vector(c.case_id, Method::external, external->slice(c));
    }
    auto record = combine_votes(method_votes(scores, cfg), cfg, c);
    auto cited = decide(record, cfg);
    return {std::move(record), std::move(cited)};
}

void require_answers(std::span<const CaseRecord> cases, std::span<const GoldAnswer> answers)
{
    std::string missing;
    for (const auto& c : cases) {
        if (!find_gold(answers, c.case_id)) {
            missing += missing.empty() ? c.case_id : ", " + c.case_id;
        }
    }
    if (!missing.empty()) {
        throw ValidationError("no answer for case(s): " + missing);
    }
}

ScoreTable score_method(Method method, std::span<const CaseRecord> cases,
                        std::span<const GoldAnswer> answers, const BM25Params& params)
{
    if (method == Method::external) {
        throw ValidationError("external scores are produced outside this tool");
    }
    require_answers(cases, answers);
    ScoreTable table;
    for (const auto& c : cases) {
        const auto query = answer_query_text(*find_gold(answers, c.case_id));
        append_case(table, c.case_id,
                    method == Method::bm25 ? bm25_scores(query, c, params) : tfidf_cosine(query, c));
    }
    return table;
}

ScoreBundle lexical_scores(std::span<const CaseRecord> cases, std::span<const GoldAnswer> answers,
                           const BM25Params& params)
{
    return {score_method(Method::bm25, cases, answers, params),
            score_method(Method::tfidf, cases, answers, params), std::nullopt};
}

void check_external_available(const ScoreBundle& bundle, const EnsembleConfig& cfg)
{
    require_external(bundle.external.has_value(), cfg);
}

std::vector<MethodVotes> bundle_votes(std::span<const CaseRecord> cases, const ScoreBundle& bundle,
                                      const EnsembleConfig& cfg)
{
    check_external_available(bundle, cfg);
    validate_coverage(bundle.bm25, cases);
    validate_coverage(bundle.tfidf, cases);
    if (bundle.external) {
        validate_coverage(*bundle.external, cases);
    }
    std::vector<MethodVotes> out;
    out.reserve(cases.size());
    for (const auto& c : cases) {
        CaseScores scores{
            make_score_vector(c.case_id, Method::bm25, bundle.bm25.slice(c)),
            make_score_vector(c.case_id, Method::tfidf, bundle.tfidf.slice(c)),
            std::nullopt,
        };
        if (bundle.external) {
            scores.external =
                make_score_vector(c.case_id, Method::external, bundle.external->slice(c));
        }
        out.push_back(method_votes(scores, cfg));
    }
    return out;
}

std::vector<CaseResult> run_ensemble(std::span<const CaseRecord> cases, const ScoreBundle& bundle,
                                     const EnsembleConfig& cfg)
{
    auto votes = bundle_votes(cases, bundle, cfg);
    std::vector<CaseResult> out;
    out.reserve(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) {
        auto record = combine_votes(votes[i], cfg, cases[i]);
        auto cited = decide(record, cfg);
        out.push_back({std::move(record), std::move(cited)});
    }
    return out;
}

} // namespace evalign
