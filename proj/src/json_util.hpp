#pragma once

#include "evalign/corpus.hpp"
#include "evalign/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

namespace evalign::detail {

/// nlohmann reports byte offsets; convert them to a line number.
inline nlohmann::json parse_json(std::string_view text)
{
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto offset = std::min<std::size_t>(e.byte, text.size());
        auto line = 1 + static_cast<std::size_t>(
                            std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
        throw ParseError("malformed JSON: " + std::string(e.what()), line);
    }
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& ctx)
{
    if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) {
        throw ValidationError(ctx + ": missing string field \"" + key + "\"");
    }
    return obj[key].get<std::string>();
}

inline std::vector<SentenceId> require_id_array(const nlohmann::json& obj, const char* key,
                                                const std::string& ctx)
{
    if (!obj.is_object() || !obj.contains(key) || !obj[key].is_array()) {
        throw ValidationError(ctx + ": missing array field \"" + key + "\"");
    }
    std::vector<SentenceId> ids;
    for (const auto& v : obj[key]) {
        if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1'000'000) {
            throw ValidationError(ctx + ": \"" + key + "\" must hold positive integer sentence ids");
        }
        ids.push_back(static_cast<SentenceId>(v.get<long long>()));
    }
    return ids;
}

} // namespace evalign::detail
