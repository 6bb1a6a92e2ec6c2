#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evalign::xml {

/// Minimal element tree. Mixed content is flattened: `text` holds all direct
/// character data of the element in document order.
struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;
    std::vector<Element> children;
    std::size_t line = 0;

    std::optional<std::string_view> attribute(std::string_view key) const;
    const Element* child(std::string_view child_name) const;
};

/// Parses a complete document and returns its root element. Supports the XML
/// declaration, comments, processing instructions, CDATA sections, and the
/// predefined and numeric character entities. DTDs are rejected. Throws
/// ParseError with the offending line.
Element parse_document(std::string_view input);

} // namespace evalign::xml
