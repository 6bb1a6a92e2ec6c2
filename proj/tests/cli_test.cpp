#include "evalign/cli.hpp"

#include "evalign/ensemble.hpp"
#include "evalign/eval.hpp"
#include "evalign/io.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <sstream>

using namespace evalign;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string cases_xml = testutil::corpus_path("cases.xml");
const std::string gold_json = testutil::corpus_path("gold.json");
const std::string ce_tsv = testutil::corpus_path("ce_scores.tsv");

std::size_t count_lines(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("cli score")
{
    testutil::TempDir dir;
    auto cases = parse_cases(read_file(cases_xml));
    std::size_t pairs = 0;
    for (const auto& c : cases) {
        pairs += c.size();
    }

    for (std::string method : {"bm25", "tfidf"}) {
        auto out = dir.file(method + ".tsv");
        auto r = run({"score", "--method", method, "--cases", cases_xml, "--answers", gold_json, "--out", out});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        auto tsv = read_file(out);
        CHECK(tsv.starts_with("case_id\tsentence_id\tscore\n"));
        CHECK(count_lines(tsv) == pairs + 1);
        auto manifest = nlohmann::json::parse(read_file(out + ".manifest.json"));
        CHECK(manifest["command"] == "score " + method);
        CHECK(manifest["inputs"]["cases"] == cases_xml);
        CHECK(manifest["durations_ms"].contains("score"));
    }
}

TEST_CASE("cli usage and validation errors")
{
    testutil::TempDir dir;
    auto bad_method = run({"score", "--method", "bm26", "--cases", cases_xml, "--answers", gold_json,
                           "--out", dir.file("x.tsv")});
    CHECK(bad_method.code == 2);
    CHECK(bad_method.err.find("--method") != std::string::npos);

    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"--help"}).code == 0);

    auto partial = dir.file("partial.json");
    write_file_atomic(partial, R"({"cases":[{"case_id":"1","answer_sentences":[{"text":"x","citations":[]}]}]})");
    auto missing = run({"score", "--method", "bm25", "--cases", cases_xml, "--answers", partial,
                        "--out", dir.file("y.tsv")});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("no answer for case(s): 2, 3") != std::string::npos);

    auto io = run({"parse", "--cases", dir.file("does-not-exist.xml")});
    CHECK(io.code == 1);

    auto no_ce = run({"ensemble", "--cases", cases_xml, "--answers", gold_json, "--out", dir.file("p.json")});
    CHECK(no_ce.code == 2);
    CHECK(no_ce.err.find("external") != std::string::npos);
}

TEST_CASE("cli ensemble follows the decision rule and is deterministic")
{
    testutil::TempDir dir;
    auto out1 = dir.file("pred1.json");
    auto out2 = dir.file("pred2.json");
    for (const auto& out : {out1, out2}) {
        auto r = run({"ensemble", "--cases", cases_xml, "--answers", gold_json, "--ce-scores", ce_tsv, "--out", out});
        REQUIRE_MESSAGE(r.code == 0, r.err);
    }
    CHECK(read_file(out1) == read_file(out2));

    auto cases = parse_cases(read_file(cases_xml));
    auto golds = parse_gold(read_file(gold_json));
    EnsembleConfig cfg;
    auto bundle = lexical_scores(cases, golds, cfg.bm25);
    bundle.external = load_scores(read_file(ce_tsv));
    auto votes = bundle_votes(cases, bundle, cfg);
    auto preds = read_citations(read_file(out1));
    REQUIRE(preds.size() == cases.size());
    std::size_t cited = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        std::vector<SentenceId> expected;
        for (const auto& s : cases[i].sentences) {
            const auto& v = votes[i];
            if (v.ce.contains(s.id) || (v.bm25.contains(s.id) && v.tfidf.contains(s.id))) {
                expected.push_back(s.id);
            }
        }
        CHECK(preds[i].case_id == cases[i].case_id);
        CHECK(preds[i].cited == expected);
        cited += expected.size();
    }
    CHECK(cited > 0);
}

TEST_CASE("cli ensemble from precomputed lexical score files")
{
    testutil::TempDir dir;
    auto bm25 = dir.file("bm25.tsv");
    auto tfidf = dir.file("tfidf.tsv");
    REQUIRE(run({"score", "--method", "bm25", "--cases", cases_xml, "--answers", gold_json, "--out", bm25}).code == 0);
    REQUIRE(run({"score", "--method", "tfidf", "--cases", cases_xml, "--answers", gold_json, "--out", tfidf}).code == 0);
    auto from_files = dir.file("a.json");
    auto in_process = dir.file("b.json");
    REQUIRE(run({"ensemble", "--cases", cases_xml, "--bm25-scores", bm25, "--tfidf-scores", tfidf,
                 "--ce-scores", ce_tsv, "--out", from_files}).code == 0);
    REQUIRE(run({"ensemble", "--cases", cases_xml, "--answers", gold_json, "--ce-scores", ce_tsv,
                 "--out", in_process}).code == 0);
    CHECK(read_file(from_files) == read_file(in_process));

    auto truncated = dir.file("truncated.tsv");
    auto text = read_file(ce_tsv);
    write_file_atomic(truncated, text.substr(0, text.rfind('\n', text.size() - 2) + 1));
    auto r = run({"ensemble", "--cases", cases_xml, "--answers", gold_json, "--ce-scores", truncated,
                  "--out", dir.file("c.json")});
    CHECK(r.code == 2);
    CHECK(r.err.find("missing pairs") != std::string::npos);
}

TEST_CASE("cli --lexical-only equals w_ce = 0 with allow_missing_external")
{
    testutil::TempDir dir;
    auto cfg_path = dir.file("cfg.json");
    write_file_atomic(cfg_path, R"({"w_ce":0,"allow_missing_external":true})");
    auto a = dir.file("a.json");
    auto b = dir.file("b.json");
    REQUIRE(run({"ensemble", "--cases", cases_xml, "--answers", gold_json, "--lexical-only", "--out", a}).code == 0);
    REQUIRE(run({"--config", cfg_path, "ensemble", "--cases", cases_xml, "--answers", gold_json, "--out", b}).code == 0);
    CHECK(read_file(a) == read_file(b));

    // Global flags may also follow the subcommand.
    auto c = dir.file("c.json");
    REQUIRE(run({"ensemble", "--config", cfg_path, "--quiet", "--cases", cases_xml, "--answers", gold_json,
                 "--out", c}).code == 0);
    CHECK(read_file(a) == read_file(c));
}

TEST_CASE("cli picks up EVALIGN_CONFIG")
{
    testutil::TempDir dir;
    auto cfg_path = dir.file("env.json");
    write_file_atomic(cfg_path, R"({"tau_ens":0.5,"w_ce":0,"allow_missing_external":true})");
    ::setenv("EVALIGN_CONFIG", cfg_path.c_str(), 1);
    auto out = dir.file("p.json");
    auto r = run({"ensemble", "--cases", cases_xml, "--answers", gold_json, "--out", out});
    ::unsetenv("EVALIGN_CONFIG");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto manifest = nlohmann::json::parse(read_file(out + ".manifest.json"));
    CHECK(manifest["config"]["tau_ens"] == 0.5);
    CHECK(manifest["inputs"]["config"] == cfg_path);
}

TEST_CASE("cli evaluate")
{
    testutil::TempDir dir;
    auto cases = parse_cases(read_file(cases_xml));
    auto golds = parse_gold(read_file(gold_json));
    std::vector<CitationSet> perfect;
    for (const auto& c : cases) {
        perfect.push_back(gold_set(c, find_gold(golds, c.case_id), GoldMode::citations));
    }
    auto pred = dir.file("pred.json");
    write_file_atomic(pred, citations_to_json(perfect));
    auto report = dir.file("report.json");
    auto r = run({"evaluate", "--cases", cases_xml, "--gold", gold_json, "--pred", pred, "--out", report});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("micro  P=100.00  R=100.00  F1=100.00") != std::string::npos);
    auto j = nlohmann::json::parse(read_file(report));
    for (const char* scope : {"micro", "macro"}) {
        for (const char* k : {"p", "r", "f1"}) {
            CHECK(j[scope][k] == 1.0);
        }
    }
    CHECK(j["per_case"].size() == cases.size());

    auto essential = run({"evaluate", "--cases", cases_xml, "--pred", pred, "--gold-mode", "essential",
                          "--out", dir.file("ess.json")});
    CHECK(essential.code == 0);
    auto citations_without_gold = run({"evaluate", "--cases", cases_xml, "--pred", pred, "--out", dir.file("x.json")});
    CHECK(citations_without_gold.code == 2);
}

TEST_CASE("cli calibrate default grid")
{
    testutil::TempDir dir;
    auto out = dir.file("sweep.tsv");
    auto r = run({"calibrate", "--cases", cases_xml, "--answers", gold_json, "--ce-scores", ce_tsv, "--out", out});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto tsv = read_file(out);
    CHECK(tsv.starts_with("tau_ens\tmicro_p\tmicro_r\tmicro_f1\n0\t"));
    CHECK(count_lines(tsv) == 1 + 376 + 1);
    CHECK(tsv.find("\n1.875\t") != std::string::npos);
    CHECK(tsv.find("\n# best\t") != std::string::npos);

    auto explicit_grid = run({"calibrate", "--cases", cases_xml, "--answers", gold_json, "--ce-scores", ce_tsv,
                              "--grid", "0.5", "0.85", "1.1", "--out", dir.file("g.tsv")});
    REQUIRE(explicit_grid.code == 0);
    CHECK(count_lines(read_file(dir.file("g.tsv"))) == 5);
}

TEST_CASE("cli prompt and parse")
{
    auto case4 = testutil::data_path("case4.xml");
    auto r = run({"prompt", "--cases", case4, "--case-id", "4"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Clinical Note Excerpt:\n1: History of Present Illness:\n") != std::string::npos);
    CHECK(run({"prompt", "--cases", case4, "--case-id", "5"}).code == 2);

    auto parsed = run({"parse", "--cases", cases_xml, "--answers", gold_json});
    CHECK(parsed.code == 0);
    CHECK(count_lines(parsed.out) == 21);
}
