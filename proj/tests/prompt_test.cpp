#include "evalign/prompt.hpp"

#include "evalign/io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <regex>
#include <sstream>

using namespace evalign;

TEST_CASE("render_prompt starts with the system block")
{
    auto c = testutil::load_cases("case20.xml")[0];
    auto prompt = render_prompt(c);
    CHECK(prompt.starts_with("[System]\nYou are a clinical assistant answering\na patient's question. /no_think\n"));
    CHECK(prompt.find("\nPatient Question: So what is the dizziness") != std::string::npos);
    CHECK(prompt.find("\nClinician-Interpreted Question: How did they diagnose") != std::string::npos);
    CHECK(prompt.find("\nClinical Note Excerpt:\n1: Discharge Instructions:") != std::string::npos);
    CHECK(prompt.ends_with("\n\nAnswer:"));
    CHECK(prompt.find('\r') == std::string::npos);
}

TEST_CASE("render_prompt numbers each sentence on its own line")
{
    auto c = testutil::make_case("2", {"First line.", "Second\nspans lines."});
    auto prompt = render_prompt(c);
    CHECK(prompt.find("\n1: First line.\n") != std::string::npos);
    CHECK(prompt.find("\n2: Second spans lines.\n") != std::string::npos);

    const std::regex numbered(R"(^([0-9]+): )");
    for (const auto& fixture : {"case4.xml", "case20.xml"}) {
        auto cases = testutil::load_cases(fixture);
        std::istringstream lines(render_prompt(cases[0]));
        std::string line;
        int expected = 1;
        std::smatch m;
        while (std::getline(lines, line)) {
            if (std::regex_search(line, m, numbered)) {
                CHECK(std::stoi(m[1]) == expected);
                ++expected;
            }
        }
        CHECK(expected - 1 == static_cast<int>(cases[0].size()));
    }
}

TEST_CASE("render_prompt golden file")
{
    auto c = testutil::load_cases("case20.xml")[0];
    CHECK(render_prompt(c) == read_file(testutil::data_path("prompt_case20.golden")));
}
