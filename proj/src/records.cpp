#include "tracewise/harness.hpp"

#include "tracewise/error.hpp"

#include <fstream>
#include <set>
#include <tuple>

namespace tracewise {

using nlohmann::json;

json parse_json_strict(const std::string& text) {
    std::vector<std::set<std::string>> keys;
    std::optional<std::string> duplicate;
    json::parser_callback_t cb = [&](int, json::parse_event_t event, json& parsed) {
        switch (event) {
        case json::parse_event_t::object_start: keys.emplace_back(); break;
        case json::parse_event_t::object_end:
            if (!keys.empty())
                keys.pop_back();
            break;
        case json::parse_event_t::key:
            if (!keys.empty() && !keys.back().insert(parsed.get<std::string>()).second && !duplicate)
                duplicate = parsed.get<std::string>();
            break;
        default: break;
        }
        return true;
    };
    json j;
    try {
        j = json::parse(text, cb);
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, e.what());
    }
    if (duplicate)
        fail(ErrorCode::DuplicateKey, "key '" + *duplicate + "' repeated in one object");
    return j;
}

json record_to_json(const ResponseRecord& r) {
    json j{{"instance_id", r.instance_id},
           {"run", r.run},
           {"model", r.model},
           {"raw", r.raw},
           {"thinking", r.thinking ? json(*r.thinking) : json(nullptr)},
           {"latency_ms", r.latency_ms},
           {"retries", r.retries}};
    if (r.prompt_tokens)
        j["prompt_tokens"] = *r.prompt_tokens;
    if (r.completion_tokens)
        j["completion_tokens"] = *r.completion_tokens;
    return j;
}

ResponseRecord record_from_json(const json& j) {
    if (!j.is_object())
        fail(ErrorCode::FormatError, "response record must be an object");
    ResponseRecord r;
    try {
        r.instance_id = j.at("instance_id").get<std::string>();
        r.run = j.value("run", std::size_t{0});
        r.model = j.value("model", std::string("offline"));
        r.raw = j.at("raw").get<std::string>();
        if (j.contains("thinking") && j["thinking"].is_string())
            r.thinking = j["thinking"].get<std::string>();
        r.latency_ms = j.value("latency_ms", 0.0);
        r.retries = j.value("retries", std::size_t{0});
        if (j.contains("prompt_tokens") && j["prompt_tokens"].is_number_unsigned())
            r.prompt_tokens = j["prompt_tokens"].get<std::uint64_t>();
        if (j.contains("completion_tokens") && j["completion_tokens"].is_number_unsigned())
            r.completion_tokens = j["completion_tokens"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, e.what());
    }
    return r;
}

std::vector<ResponseRecord> ingest_responses(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::IoError, "cannot open " + path);
    std::vector<ResponseRecord> out;
    std::set<std::tuple<std::string, std::size_t, std::string>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        ResponseRecord r;
        try {
            r = record_from_json(parse_json_strict(line));
        } catch (const Error& e) {
            fail(e.code(), path + " line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert({r.instance_id, r.run, r.model}).second)
            fail(ErrorCode::DuplicateKey, path + " line " + std::to_string(lineno) + ": response (" + r.instance_id +
                                              ", " + std::to_string(r.run) + ", " + r.model + ") already seen");
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace tracewise
