#include "evalign/lexical.hpp"

#include "evalign/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace evalign {

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::bm25:
        return "bm25";
    case Method::tfidf:
        return "tfidf";
    case Method::external:
        return "external";
    }
    return "?";
}

void validate(const BM25Params& params)
{
    if (!(params.k1 > 0.0) || !std::isfinite(params.k1)) {
        throw ValidationError("bm25 k1 must be positive");
    }
    if (!(params.b >= 0.0 && params.b <= 1.0)) {
        throw ValidationError("bm25 b must lie in [0,1]");
    }
}

TokenList tokenize(std::string_view text)
{
    std::string cleaned;
    cleaned.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text.substr(i, 3) == "[**" || text.substr(i, 3) == "**]") {
            cleaned += ' ';
            i += 3;
            continue;
        }
        cleaned += text[i++];
    }

    TokenList tokens;
    std::string current;
    for (char c : cleaned) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current += c;
        } else if (c >= 'A' && c <= 'Z') {
            current += static_cast<char>(c - 'A' + 'a');
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

namespace {

using TermCounts = std::unordered_map<std::string_view, int>;

TermCounts count_terms(const TokenList& tokens)
{
    TermCounts counts;
    for (const auto& t : tokens) {
        ++counts[t];
    }
    return counts;
}

TermCounts document_frequencies(std::span<const TermCounts> docs)
{
    TermCounts df;
    for (const auto& d : docs) {
        for (const auto& [term, _] : d) {
            ++df[term];
        }
    }
    return df;
}

std::vector<TokenList> tokenize_case(const CaseRecord& c)
{
    std::vector<TokenList> out;
    out.reserve(c.sentences.size());
    for (const auto& s : c.sentences) {
        out.push_back(tokenize(s.text));
    }
    return out;
}

ScoreMap keyed(const CaseRecord& c, const std::vector<double>& scores)
{
    ScoreMap out;
    for (std::size_t i = 0; i < c.sentences.size(); ++i) {
        out.emplace(c.sentences[i].id, scores[i]);
    }
    return out;
}

} // namespace

std::vector<double> bm25_scores(const TokenList& query, std::span<const TokenList> sentences,
                                const BM25Params& params)
{
    std::vector<double> scores(sentences.size(), 0.0);
    if (sentences.empty()) {
        return scores;
    }

    std::vector<TermCounts> docs;
    docs.reserve(sentences.size());
    std::size_t total_len = 0;
    for (const auto& s : sentences) {
        docs.push_back(count_terms(s));
        total_len += s.size();
    }
    if (total_len == 0) {
        return scores;
    }
    const auto df = document_frequencies(docs);
    const double n = static_cast<double>(sentences.size());
    const double avg_len = static_cast<double>(total_len) / n;

    std::vector<std::string_view> unique_terms(query.begin(), query.end());
    std::sort(unique_terms.begin(), unique_terms.end());
    unique_terms.erase(std::unique(unique_terms.begin(), unique_terms.end()), unique_terms.end());

    for (auto term : unique_terms) {
        auto df_it = df.find(term);
        if (df_it == df.end()) {
            continue;
        }
        const double dft = df_it->second;
        const double idf = std::log(1.0 + (n - dft + 0.5) / (dft + 0.5));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            auto tf_it = docs[i].find(term);
            if (tf_it == docs[i].end()) {
                continue;
            }
            const double tf = tf_it->second;
            const double len = static_cast<double>(sentences[i].size());
            const double norm = params.k1 * (1.0 - params.b + params.b * len / avg_len);
            scores[i] += idf * (tf * (params.k1 + 1.0)) / (tf + norm);
        }
    }
    return scores;
}

ScoreMap bm25_scores(std::string_view query_text, const CaseRecord& c, const BM25Params& params)
{
    auto sentences = tokenize_case(c);
    return keyed(c, bm25_scores(tokenize(query_text), sentences, params));
}

std::vector<double> tfidf_cosine(const TokenList& query, std::span<const TokenList> sentences)
{
    std::vector<double> scores(sentences.size(), 0.0);
    std::vector<TermCounts> docs;
    docs.reserve(sentences.size());
    for (const auto& s : sentences) {
        docs.push_back(count_terms(s));
    }
    const auto df = document_frequencies(docs);
    const double n = static_cast<double>(sentences.size());

    std::unordered_map<std::string_view, double> idf;
    for (const auto& [term, d] : df) {
        idf.emplace(term, std::log((1.0 + n) / (1.0 + d)) + 1.0);
    }

    std::unordered_map<std::string_view, double> qvec;
    for (const auto& [term, tf] : count_terms(query)) {
        if (auto it = idf.find(term); it != idf.end()) {
            qvec.emplace(term, tf * it->second);
        }
    }
    double qnorm = 0.0;
    for (const auto& [_, w] : qvec) {
        qnorm += w * w;
    }
    qnorm = std::sqrt(qnorm);
    if (qnorm == 0.0) {
        return scores;
    }

    for (std::size_t i = 0; i < docs.size(); ++i) {
        double dnorm = 0.0;
        double dot = 0.0;
        for (const auto& [term, tf] : docs[i]) {
            const double w = tf * idf.at(term);
            dnorm += w * w;
            if (auto it = qvec.find(term); it != qvec.end()) {
                dot += w * it->second;
            }
        }
        if (dnorm > 0.0) {
            scores[i] = std::clamp(dot / (std::sqrt(dnorm) * qnorm), 0.0, 1.0);
        }
    }
    return scores;
}

ScoreMap tfidf_cosine(std::string_view query_text, const CaseRecord& c)
{
    auto sentences = tokenize_case(c);
    return keyed(c, tfidf_cosine(tokenize(query_text), sentences));
}

NormalizedScores normalize_relative(const ScoreMap& raw)
{
    double s_max = 0.0;
    for (const auto& [_, s] : raw) {
        s_max = std::max(s_max, s);
    }
    if (!(s_max > 0.0)) {
        return std::nullopt;
    }
    ScoreMap out;
    for (const auto& [id, s] : raw) {
        out.emplace_hint(out.end(), id, s / s_max);
    }
    return out;
}

VoteSet votes_from_scores(const NormalizedScores& scores, double tau)
{
    VoteSet votes;
    if (!scores) {
        return votes;
    }
    for (const auto& [id, s] : *scores) {
        if (s >= tau - vote_tolerance) {
            votes.insert(votes.end(), id);
        }
    }
    return votes;
}

ScoreVector make_score_vector(std::string case_id, Method method, ScoreMap raw)
{
    ScoreVector v{std::move(case_id), method, std::move(raw), std::nullopt};
    if (method == Method::tfidf) {
        bool any_positive = std::any_of(v.raw.begin(), v.raw.end(),
                                        [](const auto& kv) { return kv.second > 0.0; });
        if (any_positive) {
            v.normalized = v.raw;
        }
    } else {
        v.normalized = normalize_relative(v.raw);
    }
    return v;
}

} // namespace evalign
