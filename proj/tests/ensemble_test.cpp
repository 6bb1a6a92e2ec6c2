#include "evalign/ensemble.hpp"

#include "evalign/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <random>

using namespace evalign;

namespace {

MethodVotes votes_for(SentenceId id, bool bm25, bool tfidf, bool ce)
{
    MethodVotes v;
    if (bm25) v.bm25.insert(id);
    if (tfidf) v.tfidf.insert(id);
    if (ce) v.ce.insert(id);
    return v;
}

ExternalScoreTable ce_table(const CaseRecord& c, const std::map<SentenceId, double>& high, double rest)
{
    ExternalScoreTable t;
    for (const auto& s : c.sentences) {
        auto it = high.find(s.id);
        t.add(c.case_id, s.id, it == high.end() ? rest : it->second);
    }
    return t;
}

} // namespace

TEST_CASE("default config is the submitted configuration")
{
    EnsembleConfig cfg;
    CHECK(cfg.w_bm25 == 0.527);
    CHECK(cfg.w_tfidf == 0.493);
    CHECK(cfg.w_ce == 0.855);
    CHECK(cfg.tau_bm25 == 0.50);
    CHECK(cfg.tau_tfidf == 0.20);
    CHECK(cfg.tau_ce == 0.10);
    CHECK(cfg.tau_ens == 0.85);
    CHECK(cfg.bm25.k1 == 1.2);
    CHECK(cfg.bm25.b == 0.75);
    CHECK_FALSE(cfg.allow_missing_external);
    CHECK(parse_config("{}") == cfg);
    CHECK(parse_config(config_to_json(cfg)) == cfg);
}

TEST_CASE("config validation")
{
    CHECK(parse_config(R"({"w_ce":0,"allow_missing_external":true})").w_ce == 0.0);
    CHECK_THROWS_AS(parse_config(R"({"w_bm":1})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"w_bm25":-0.1})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"w_bm25":0,"w_tfidf":0,"w_ce":0,"tau_ens":0})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"tau_ens":1.9})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"tau_ce":1.5})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"bm25_k1":0})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"bm25_b":2})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"tau_ens":"high"})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"allow_missing_external":1})"), ValidationError);
    CHECK_THROWS_AS(parse_config("[1]"), ValidationError);
    CHECK_THROWS_AS(parse_config("{"), ParseError);
    CHECK_NOTHROW(parse_config(R"({"tau_ens":1.875})"));
}

TEST_CASE("combine_votes")
{
    EnsembleConfig cfg;
    auto c = testutil::make_case("1", 3);
    auto rec = combine_votes(votes_for(1, true, true, false), cfg, c);
    REQUIRE(rec.sentences.size() == 3);
    CHECK(rec.sentences[0].total == doctest::Approx(1.020).epsilon(1e-15));
    CHECK(rec.sentences[1].total == 0.0);
    CHECK(rec.sentences[2].total == 0.0);
    CHECK(combine_votes(votes_for(2, true, true, true), cfg, c).sentences[1].total ==
          doctest::Approx(1.875).epsilon(1e-15));
    CHECK_THROWS_AS(combine_votes(votes_for(4, true, false, false), cfg, c), ValidationError);
}

TEST_CASE("decide with the submitted threshold")
{
    EnsembleConfig cfg;
    auto c = testutil::make_case("1", 1);
    auto cited = [&](bool b, bool t, bool e) {
        return !decide(combine_votes(votes_for(1, b, t, e), cfg, c), cfg).cited.empty();
    };
    CHECK(cited(true, true, false));   // 1.020
    CHECK(cited(false, false, true));  // 0.855
    CHECK_FALSE(cited(true, false, false)); // 0.527
    CHECK_FALSE(cited(false, true, false)); // 0.493
}

TEST_CASE("decision rule over all eight vote combinations")
{
    EnsembleConfig cfg;
    auto c = testutil::make_case("1", 1);
    for (int mask = 0; mask < 8; ++mask) {
        const bool b = mask & 1, t = mask & 2, e = mask & 4;
        const bool expected = e || (b && t);
        CHECK(!decide(combine_votes(votes_for(1, b, t, e), cfg, c), cfg).cited.empty() == expected);
    }
}

TEST_CASE("decide monotonicity properties")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> n(1, 15);
    for (int trial = 0; trial < 300; ++trial) {
        EnsembleConfig cfg;
        cfg.w_bm25 = w(rng);
        cfg.w_tfidf = w(rng);
        cfg.w_ce = w(rng);
        auto c = testutil::make_case("m", static_cast<std::size_t>(n(rng)));
        MethodVotes v;
        for (const auto& s : c.sentences) {
            if (coin(rng)) v.bm25.insert(s.id);
            if (coin(rng)) v.tfidf.insert(s.id);
            if (coin(rng)) v.ce.insert(s.id);
        }
        auto rec = combine_votes(v, cfg, c);

        CHECK(decide(rec, 0.0).cited.size() == c.size());

        double t1 = w(rng) * cfg.total_weight();
        double t2 = w(rng) * cfg.total_weight();
        if (t1 > t2) std::swap(t1, t2);
        auto low = decide(rec, t1).cited;
        for (auto id : decide(rec, t2).cited) {
            REQUIRE(std::binary_search(low.begin(), low.end(), id));
        }

        const double tau = w(rng) * cfg.total_weight();
        auto before = decide(rec, tau).cited;
        auto more = v;
        const auto extra = c.sentences[static_cast<std::size_t>(n(rng)) % c.size()].id;
        (coin(rng) ? more.bm25 : more.ce).insert(extra);
        auto after = decide(combine_votes(more, cfg, c), tau).cited;
        for (auto id : before) {
            REQUIRE(std::binary_search(after.begin(), after.end(), id));
        }
    }
}

TEST_CASE("run_case, lexical-only")
{
    auto cfg = lexical_only(EnsembleConfig{});
    auto c = testutil::make_case("L", {"The echocardiogram showed reduced ejection fraction.",
                                      "Diet was advanced as tolerated.",
                                      "Family meeting was held."});
    GoldAnswer answer{"L", {{"The echocardiogram showed reduced ejection fraction.", {1}}}};
    auto result = run_case(c, answer, cfg, nullptr);
    CHECK(result.votes.sentences[0].bm25);
    CHECK(result.votes.sentences[0].tfidf);
    CHECK_FALSE(result.votes.sentences[0].ce);
    CHECK(result.votes.sentences[0].total == 0.527 + 0.493);
    CHECK(result.citations.cited == std::vector<SentenceId>{1});
}

TEST_CASE("run_case, CE alone can cite")
{
    EnsembleConfig cfg;
    auto c = testutil::make_case("C", 8);
    GoldAnswer answer{"C", {{"Unrelated vocabulary only.", {7}}}};
    auto ce = ce_table(c, {{7, 0.9}}, 0.05);
    auto result = run_case(c, answer, cfg, &ce);
    CHECK(result.citations.cited == std::vector<SentenceId>{7});
}

TEST_CASE("run_case with an empty answer is decided by CE alone")
{
    EnsembleConfig cfg;
    auto c = testutil::make_case("E", 4);
    GoldAnswer answer{"E", {{"", {}}}};
    auto ce = ce_table(c, {{2, 0.8}, {3, 0.4}}, 0.0);
    auto result = run_case(c, answer, cfg, &ce);
    for (const auto& v : result.votes.sentences) {
        CHECK_FALSE(v.bm25);
        CHECK_FALSE(v.tfidf);
    }
    CHECK(result.citations.cited == std::vector<SentenceId>{2, 3});
}

TEST_CASE("missing external table")
{
    EnsembleConfig cfg;
    auto c = testutil::make_case("M", 2);
    GoldAnswer answer{"M", {{"sentence 1", {1}}}};
    CHECK_THROWS_AS(run_case(c, answer, cfg, nullptr), ValidationError);

    cfg.allow_missing_external = true;
    auto abstained = run_case(c, answer, cfg, nullptr);
    auto lexical = run_case(c, answer, lexical_only(EnsembleConfig{}), nullptr);
    CHECK(abstained.citations == lexical.citations);
}

TEST_CASE("run_ensemble over a bundle agrees with run_case")
{
    auto cases = testutil::load_cases("case20.xml");
    auto golds = testutil::load_gold("case20_gold.json");
    EnsembleConfig cfg;
    auto bundle = lexical_scores(cases, golds, cfg.bm25);
    ExternalScoreTable ce;
    for (const auto& s : cases[0].sentences) {
        ce.add("20", s.id, s.id % 3 == 0 ? 0.7 : 0.01);
    }
    bundle.external = ce;
    auto results = run_ensemble(cases, bundle, cfg);
    auto direct = run_case(cases[0], golds[0], cfg, &ce);
    CHECK(results[0].citations == direct.citations);

    ScoreBundle no_ce = lexical_scores(cases, golds, cfg.bm25);
    CHECK_THROWS_AS(run_ensemble(cases, no_ce, cfg), ValidationError);
    CHECK_THROWS_AS(score_method(Method::bm25, cases, {}, cfg.bm25), ValidationError);
}
