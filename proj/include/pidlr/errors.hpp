#pragma once

#include <stdexcept>
#include <string>

namespace pidlr {

// Malformed input file (wrong column count, bad number, ...).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally invalid data (dangling ids, empty required sections, ...).
struct IntegrityError : std::runtime_error {
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unknown user/item/entity id at query time.
struct LookupError : std::runtime_error {
    explicit LookupError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension mismatch between tensors or against the configured sizes.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or unreadable checkpoint file.
struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration value.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Name id that cannot be resolved while rendering prompts.
struct RenderError : std::runtime_error {
    explicit RenderError(const std::string& msg) : std::runtime_error(msg) {}
};

// Remote backend failure after retries, or protocol-level failure.
struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pidlr
