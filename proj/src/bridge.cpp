#include "pidlr/bridge.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "pidlr/errors.hpp"

namespace pidlr {

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

std::string RemoteBackend::complete(const CompletionRequest& req) {
    if (req.instruction.empty()) throw IntegrityError("empty instruction");

    nlohmann::ordered_json body;
    body["model"] = cfg_.model;
    body["prompt"] = req.instruction;
    body["max_tokens"] = req.max_tokens;
    body["temperature"] = req.temperature;
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        if (attempt > 0) {
            double delay = cfg_.backoff_seconds * static_cast<double>(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client client(cfg_.host, cfg_.port);
        client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
        client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
        httplib::Headers headers;
        if (!cfg_.auth_token.empty())
            headers.emplace("Authorization", "Bearer " + cfg_.auth_token);

        auto res = client.Post(cfg_.path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "status " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200);
            continue;  // transient, retry
        }
        if (res->status != 200)
            throw TransportError("protocol error, status " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 200));
        try {
            auto j = nlohmann::json::parse(res->body);
            return j.at("completion").get<std::string>();
        } catch (const std::exception& e) {
            throw TransportError(std::string("malformed completion response: ") + e.what());
        }
    }
    throw TransportError("exhausted " + std::to_string(cfg_.retries) + " retries: " + last_error);
}

RemoteConfig remote_config_from_env() {
    RemoteConfig cfg;
    if (const char* v = std::getenv("PIDLR_ENDPOINT_HOST")) cfg.host = v;
    if (const char* v = std::getenv("PIDLR_ENDPOINT_PORT")) cfg.port = std::atoi(v);
    if (const char* v = std::getenv("PIDLR_ENDPOINT_PATH")) cfg.path = v;
    if (const char* v = std::getenv("PIDLR_AUTH_TOKEN")) cfg.auth_token = v;
    if (const char* v = std::getenv("PIDLR_MODEL")) cfg.model = v;
    return cfg;
}

ChoiceParse parse_choice(const std::string& response, const std::vector<std::string>& titles) {
    ChoiceParse out;
    out.raw = response;
    out.rule = "none";

    const std::string trimmed = lower(trim(response));

    // Rule 1: exact (case-insensitive) match of the trimmed response.
    for (size_t i = 0; i < titles.size(); ++i) {
        if (trimmed == lower(titles[i])) {
            out.matched_index = static_cast<int>(i);
            out.valid = true;
            out.rule = "exact";
            return out;
        }
    }

    // Rule 2: exactly one title occurs as a substring. Occurrences of a
    // shorter title nested entirely inside a longer matched title don't
    // count as separate matches.
    const std::string hay = lower(response);
    struct Span {
        size_t begin, end;
        size_t title;
    };
    std::vector<size_t> by_length(titles.size());
    for (size_t i = 0; i < titles.size(); ++i) by_length[i] = i;
    std::sort(by_length.begin(), by_length.end(), [&](size_t a, size_t b) {
        if (titles[a].size() != titles[b].size()) return titles[a].size() > titles[b].size();
        return titles[a] < titles[b];
    });

    std::vector<Span> claimed;
    std::vector<size_t> matched;
    for (size_t idx : by_length) {
        const std::string needle = lower(titles[idx]);
        if (needle.empty()) continue;
        bool found_unclaimed = false;
        size_t pos = hay.find(needle);
        while (pos != std::string::npos) {
            size_t end = pos + needle.size();
            bool nested = false;
            for (const auto& sp : claimed)
                if (pos >= sp.begin && end <= sp.end) nested = true;
            if (!nested) {
                found_unclaimed = true;
                claimed.push_back({pos, end, idx});
            }
            pos = hay.find(needle, pos + 1);
        }
        if (found_unclaimed) matched.push_back(idx);
    }

    if (matched.size() == 1) {
        out.matched_index = static_cast<int>(matched[0]);
        out.valid = true;
        out.rule = "substring";
    }
    return out;
}

std::string mock_oracle_recommend(const KnowledgeGraph& g, const HintSet& hints,
                                  const std::vector<int32_t>& candidates) {
    if (candidates.empty()) throw IntegrityError("mock_oracle_recommend: empty candidate list");

    std::vector<int32_t> user_tuples;
    for (const auto& h : hints.user_hints) user_tuples.push_back(h.tuple.index);
    std::sort(user_tuples.begin(), user_tuples.end());

    std::string best_title;
    long best_overlap = -1;
    for (int32_t c : candidates) {
        long overlap = 0;
        auto it = hints.item_hints.find(c);
        if (it != hints.item_hints.end())
            for (const auto& h : it->second)
                if (std::binary_search(user_tuples.begin(), user_tuples.end(), h.tuple.index))
                    ++overlap;
        const std::string& title = g.item_title(c);
        if (overlap > best_overlap || (overlap == best_overlap && title < best_title)) {
            best_overlap = overlap;
            best_title = title;
        }
    }
    return best_title;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string transcript_record(const TranscriptEntry& e) {
    nlohmann::ordered_json j;
    j["request_id"] = e.request_id;
    j["instance_id"] = e.instance_id;
    j["prompt_hash"] = e.prompt_hash;
    j["response"] = e.response;
    j["parse_rule"] = e.parse_rule;
    j["matched_index"] = e.matched_index;
    j["valid"] = e.valid;
    return j.dump();
}

}  // namespace pidlr
