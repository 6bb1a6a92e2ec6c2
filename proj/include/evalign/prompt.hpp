#pragma once

#include "evalign/corpus.hpp"

#include <string>

namespace evalign {

/// Renders the answer-generation prompt for a case: the fixed system block,
/// both questions, and the note excerpt with one "N: text" line per sentence.
/// Lines end with '\n' only; the output ends with "Answer:" and no newline.
/// Embedded line breaks in case text are flattened to single spaces so each
/// sentence occupies exactly one line.
std::string render_prompt(const CaseRecord& c);

} // namespace evalign
