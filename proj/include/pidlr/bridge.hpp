#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pidlr/discovery.hpp"

namespace pidlr {

struct CompletionRequest {
    std::string instruction;  // x
    int max_tokens = 64;
    double temperature = 0.0;  // 0 for all evaluation calls
    int64_t request_id = 0;
};

struct ChoiceParse {
    std::string raw;
    int matched_index = -1;  // index into the candidate title list, -1 = none
    bool valid = false;
    std::string rule;  // "exact" | "substring" | "none"
};

class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string complete(const CompletionRequest& req) = 0;
    virtual std::string name() const = 0;
};

// Deterministic mock: answers with whatever the bound resolver returns (the
// evaluation harness binds mock_oracle_recommend per instance).
class MockBackend : public Backend {
  public:
    using Resolver = std::function<std::string(const CompletionRequest&)>;

    explicit MockBackend(Resolver resolver) : resolver_(std::move(resolver)) {}
    std::string complete(const CompletionRequest& req) override { return resolver_(req); }
    std::string name() const override { return "mock"; }

  private:
    Resolver resolver_;
};

struct RemoteConfig {
    std::string host;           // e.g. "127.0.0.1"
    int port = 443;
    std::string path = "/v1/completions";
    std::string auth_token;
    std::string model;
    int retries = 3;            // R
    double backoff_seconds = 1.0;  // 1s, 2s, 4s, ...
    double timeout_seconds = 60.0;
};

// POST {model, prompt, max_tokens, temperature} with bearer auth; expects a
// JSON body with a "completion" field. Retries transient failures with
// exponential backoff, then throws TransportError.
class RemoteBackend : public Backend {
  public:
    explicit RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {}
    std::string complete(const CompletionRequest& req) override;
    std::string name() const override { return "remote"; }

  private:
    RemoteConfig cfg_;
};

// Reads endpoint settings from PIDLR_ENDPOINT_HOST / PIDLR_ENDPOINT_PORT /
// PIDLR_ENDPOINT_PATH / PIDLR_AUTH_TOKEN / PIDLR_MODEL.
RemoteConfig remote_config_from_env();

// Rule 1: trimmed response equals a title (case-insensitive).
// Rule 2: exactly one title occurs as a substring, longest-first to resolve
// nested titles. Anything else is invalid (a value, not an error).
ChoiceParse parse_choice(const std::string& response, const std::vector<std::string>& titles);

// Title of the candidate maximizing |item hints ∩ user hints| by tuple
// index; ties (including all-empty hints) go to the lexicographically
// smallest title.
std::string mock_oracle_recommend(const KnowledgeGraph& g, const HintSet& hints,
                                  const std::vector<int32_t>& candidates);

struct TranscriptEntry {
    int64_t request_id = 0;
    int64_t instance_id = 0;
    uint64_t prompt_hash = 0;  // FNV-1a of the instruction
    std::string response;
    std::string parse_rule;
    int matched_index = -1;
    bool valid = false;
};

uint64_t fnv1a(const std::string& s);

std::string transcript_record(const TranscriptEntry& e);

}  // namespace pidlr
