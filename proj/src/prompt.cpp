#include "evalign/prompt.hpp"

#include <string_view>

namespace evalign {

namespace {

constexpr std::string_view system_block =
    "[System]\n"
    "You are a clinical assistant answering\n"
    "a patient's question. /no_think\n"
    "Write a clear, professional answer of\n"
    "4-5 sentences (max 75 words). Rules:\n"
    "- Use ONLY information in the note.\n"
    "- Address what happened and why.\n"
    "- Do not speculate or add knowledge.\n"
    "- Do not reproduce medication lists\n"
    "  or dosing schedules.\n";

std::string single_line(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
            if (!out.empty() && out.back() != ' ') {
                out += ' ';
            }
            continue;
        }
        out += c;
    }
    return out;
}

} // namespace

std::string render_prompt(const CaseRecord& c)
{
    std::string out(system_block);
    out += '\n';
    out += "Patient Question: " + single_line(c.patient_question) + "\n";
    out += "Clinician-Interpreted Question: " + single_line(c.clinician_question) + "\n";
    out += "Clinical Note Excerpt:\n";
    for (const auto& s : c.sentences) {
        out += std::to_string(s.id) + ": " + single_line(s.text) + "\n";
    }
    out += "\nAnswer:";
    return out;
}

} // namespace evalign
