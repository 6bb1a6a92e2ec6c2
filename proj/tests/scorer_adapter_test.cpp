#include "evalign/scorer_adapter.hpp"

#include "evalign/error.hpp"
#include "evalign/io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <functional>
#include <random>

using namespace evalign;

namespace {

std::string message_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("load_scores")
{
    auto t = load_scores("case_id\tsentence_id\tscore\n1\t1\t0.9\n1\t2\t0.09\n1\t3\t0\n");
    CHECK(t.size() == 3);

    auto msg = message_of([] { load_scores("case_id\tsentence_id\tscore\n1\t1\t0.9\n1\t2\t1.2\n"); });
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("outside [0,1]") != std::string::npos);
    CHECK_THROWS_AS(load_scores("case_id\tsentence_id\tscore\n1\t1\t-0.1\n"), ValidationError);
    CHECK_THROWS_AS(load_scores("case_id\tsentence_id\tscore\n1\t1\t0.5\n1\t1\t0.5\n"), ValidationError);
    CHECK_THROWS_AS(load_scores("case_id\tsentence_id\tscore\n1\t1\tabc\n"), ParseError);
}

TEST_CASE("validate_coverage")
{
    std::vector<CaseRecord> cases{testutil::make_case("4", 21), testutil::make_case("5", 2)};
    ScoreTable full;
    for (const auto& c : cases) {
        for (const auto& s : c.sentences) {
            full.add(c.case_id, s.id, 0.5);
        }
    }
    CHECK_NOTHROW(validate_coverage(full, cases));

    ScoreTable missing;
    for (const auto& r : full.rows()) {
        if (!(r.case_id == "4" && r.sentence_id == 21)) {
            missing.add(r.case_id, r.sentence_id, r.score);
        }
    }
    CHECK(message_of([&] { validate_coverage(missing, cases); }).find("(4, 21)") != std::string::npos);

    auto extra = full;
    extra.add("999", 1, 0.5);
    CHECK(message_of([&] { validate_coverage(extra, cases); }).find("unknown case 999") != std::string::npos);

    ScoreTable empty;
    std::vector<CaseRecord> big{testutil::make_case("9", 30)};
    auto msg = message_of([&] { validate_coverage(empty, big); });
    CHECK(msg.find("missing pairs (30)") != std::string::npos);
    CHECK(msg.find("and 10 more") != std::string::npos);
}

TEST_CASE("external_votes")
{
    auto c = testutil::make_case("1", 3);
    auto t = load_scores("case_id\tsentence_id\tscore\n1\t1\t0.9\n1\t2\t0.09\n1\t3\t0.0\n");
    CHECK(external_votes(t, c, 0.10) == VoteSet{1, 2});

    auto zeros = load_scores("case_id\tsentence_id\tscore\n1\t1\t0\n1\t2\t0\n1\t3\t0\n");
    CHECK(external_votes(zeros, c, 0.10).empty());

    auto single = testutil::make_case("s", 1);
    auto one = load_scores("case_id\tsentence_id\tscore\ns\t1\t0.5\n");
    CHECK(external_votes(one, single, 0.10) == VoteSet{1});
}

TEST_CASE("external_votes is invariant under shrinking scores")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> n(1, 12);
    for (int trial = 0; trial < 500; ++trial) {
        auto c = testutil::make_case("c", static_cast<std::size_t>(n(rng)));
        ScoreTable base;
        ScoreTable scaled;
        const double lambda = std::max(u(rng), 1e-3);
        for (const auto& s : c.sentences) {
            double v = u(rng);
            base.add("c", s.id, v);
            scaled.add("c", s.id, lambda * v);
        }
        const double tau = u(rng);
        REQUIRE(external_votes(base, c, tau) == external_votes(scaled, c, tau));
    }
}

TEST_CASE("a sidecar-produced score file passes the primary validator")
{
    auto cases = testutil::load_cases("case20.xml");
    auto table = load_scores(read_file(testutil::data_path("ce_scores_case20.tsv")));
    CHECK_NOTHROW(validate_coverage(table, cases));
    CHECK(table.size() == cases[0].size());
}
