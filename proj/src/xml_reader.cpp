#include "xml_reader.hpp"

#include "evalign/error.hpp"

#include <cstdint>

namespace evalign::xml {

std::optional<std::string_view> Element::attribute(std::string_view key) const
{
    for (const auto& [k, v] : attributes) {
        if (k == key) {
            return std::string_view(v);
        }
    }
    return std::nullopt;
}

const Element* Element::child(std::string_view child_name) const
{
    for (const auto& c : children) {
        if (c.name == child_name) {
            return &c;
        }
    }
    return nullptr;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_start(char c)
{
    auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' || u >= 0x80;
}

bool is_name_char(char c)
{
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

void append_utf8(std::string& out, std::uint32_t cp)
{
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class Parser {
public:
    explicit Parser(std::string_view in) : in_(in) {}

    Element document()
    {
        skip_misc();
        if (at_end() || peek() != '<') {
            fail("expected root element");
        }
        Element root = element();
        skip_misc();
        if (!at_end()) {
            fail("content after root element");
        }
        return root;
    }

private:
    std::string_view in_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_); }

    bool at_end() const { return pos_ >= in_.size(); }
    char peek() const { return in_[pos_]; }
    bool starts_with(std::string_view s) const { return in_.substr(pos_).starts_with(s); }

    char get()
    {
        if (at_end()) {
            fail("unexpected end of input");
        }
        char c = in_[pos_++];
        if (c == '\n') {
            ++line_;
        }
        return c;
    }

    void advance(std::size_t n)
    {
        for (std::size_t i = 0; i < n; ++i) {
            get();
        }
    }

    void expect(std::string_view s)
    {
        if (!starts_with(s)) {
            fail("expected '" + std::string(s) + "'");
        }
        advance(s.size());
    }

    void skip_space()
    {
        while (!at_end() && is_space(peek())) {
            get();
        }
    }

    void skip_until(std::string_view terminator, const char* what)
    {
        while (!starts_with(terminator)) {
            if (at_end()) {
                fail(std::string("unterminated ") + what);
            }
            get();
        }
        advance(terminator.size());
    }

    // Whitespace, comments, declarations and processing instructions outside
    // the root element.
    void skip_misc()
    {
        for (;;) {
            skip_space();
            if (starts_with("<?")) {
                skip_until("?>", "processing instruction");
            } else if (starts_with("<!--")) {
                skip_until("-->", "comment");
            } else if (starts_with("<!DOCTYPE")) {
                fail("DTDs are not supported");
            } else {
                return;
            }
        }
    }

    std::string name()
    {
        if (at_end() || !is_name_start(peek())) {
            fail("expected a name");
        }
        std::size_t start = pos_;
        while (!at_end() && is_name_char(peek())) {
            get();
        }
        return std::string(in_.substr(start, pos_ - start));
    }

    void entity(std::string& out)
    {
        expect("&");
        std::size_t end = in_.find(';', pos_);
        if (end == std::string_view::npos || end - pos_ > 10) {
            fail("malformed entity reference");
        }
        std::string_view ref = in_.substr(pos_, end - pos_);
        advance(ref.size() + 1);
        if (ref == "lt") {
            out += '<';
        } else if (ref == "gt") {
            out += '>';
        } else if (ref == "amp") {
            out += '&';
        } else if (ref == "quot") {
            out += '"';
        } else if (ref == "apos") {
            out += '\'';
        } else if (ref.size() > 1 && ref[0] == '#') {
            bool hex = ref[1] == 'x';
            std::string_view digits = ref.substr(hex ? 2 : 1);
            if (digits.empty()) {
                fail("malformed character reference");
            }
            std::uint32_t cp = 0;
            for (char c : digits) {
                std::uint32_t d;
                if (c >= '0' && c <= '9') {
                    d = static_cast<std::uint32_t>(c - '0');
                } else if (hex && c >= 'a' && c <= 'f') {
                    d = static_cast<std::uint32_t>(c - 'a' + 10);
                } else if (hex && c >= 'A' && c <= 'F') {
                    d = static_cast<std::uint32_t>(c - 'A' + 10);
                } else {
                    fail("malformed character reference");
                }
                cp = cp * (hex ? 16 : 10) + d;
                if (cp > 0x10FFFF) {
                    fail("character reference out of range");
                }
            }
            append_utf8(out, cp);
        } else {
            fail("unknown entity '&" + std::string(ref) + ";'");
        }
    }

    std::string attribute_value()
    {
        char quote = get();
        if (quote != '"' && quote != '\'') {
            fail("expected quoted attribute value");
        }
        std::string value;
        for (;;) {
            if (at_end()) {
                fail("unterminated attribute value");
            }
            char c = peek();
            if (c == quote) {
                get();
                return value;
            }
            if (c == '<') {
                fail("'<' in attribute value");
            }
            if (c == '&') {
                entity(value);
            } else {
                value += get();
            }
        }
    }

    Element element()
    {
        Element el;
        el.line = line_;
        expect("<");
        el.name = name();
        for (;;) {
            bool had_space = !at_end() && is_space(peek());
            skip_space();
            if (starts_with("/>")) {
                advance(2);
                return el;
            }
            if (starts_with(">")) {
                get();
                break;
            }
            if (!had_space) {
                fail("expected whitespace before attribute");
            }
            std::string key = name();
            skip_space();
            expect("=");
            skip_space();
            if (el.attribute(key)) {
                fail("duplicate attribute '" + key + "'");
            }
            el.attributes.emplace_back(std::move(key), attribute_value());
        }
        content(el);
        return el;
    }

    void content(Element& el)
    {
        for (;;) {
            if (at_end()) {
                fail("unclosed element <" + el.name + ">");
            }
            if (starts_with("</")) {
                advance(2);
                std::string closing = name();
                if (closing != el.name) {
                    fail("mismatched closing tag </" + closing + ">, expected </" + el.name + ">");
                }
                skip_space();
                expect(">");
                return;
            }
            if (starts_with("<!--")) {
                skip_until("-->", "comment");
            } else if (starts_with("<![CDATA[")) {
                advance(9);
                std::size_t end = in_.find("]]>", pos_);
                if (end == std::string_view::npos) {
                    fail("unterminated CDATA section");
                }
                el.text.append(in_.substr(pos_, end - pos_));
                advance(end - pos_ + 3);
            } else if (starts_with("<?")) {
                skip_until("?>", "processing instruction");
            } else if (starts_with("<!")) {
                fail("unsupported markup declaration");
            } else if (peek() == '<') {
                el.children.push_back(element());
            } else if (peek() == '&') {
                entity(el.text);
            } else {
                el.text += get();
            }
        }
    }
};

} // namespace

Element parse_document(std::string_view input)
{
    if (input.starts_with("\xEF\xBB\xBF")) {
        input.remove_prefix(3);
    }
    return Parser(input).document();
}

} // namespace evalign::xml
