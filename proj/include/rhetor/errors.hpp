#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rhetor {

/// Base class for every error this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration: invalid flags, malformed files, impossible parameter combos.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A document could not be canonically serialized (non-finite number, etc.).
class SerializationError : public Error {
public:
    using Error::Error;
};

/// The prompt catalog lacks a required stage key.
class MissingPromptError : public Error {
public:
    explicit MissingPromptError(std::string key)
        : Error("missing prompt key: " + key), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// A template placeholder had no binding at render time.
class UnboundPlaceholderError : public Error {
public:
    explicit UnboundPlaceholderError(std::string name)
        : Error("unbound placeholder: " + name), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Model output was not exactly one JSON object.
class NotSingleObjectError : public Error {
public:
    enum class Kind { Empty, ProseWrapped, MultipleObjects, SyntaxError };

    NotSingleObjectError(Kind kind, const std::string& detail)
        : Error("not a single JSON object (" + kind_name(kind) + "): " + detail),
          kind_(kind) {}
    Kind kind() const { return kind_; }

    static std::string kind_name(Kind k) {
        switch (k) {
            case Kind::Empty: return "empty";
            case Kind::ProseWrapped: return "prose-wrapped";
            case Kind::MultipleObjects: return "multiple objects";
            case Kind::SyntaxError: return "syntax error";
        }
        return "unknown";
    }

private:
    Kind kind_;
};

/// The extraction call kept producing unparseable output until retries ran out.
class ExtractionFailedError : public Error {
public:
    ExtractionFailedError(std::string last_text, int attempts)
        : Error("extraction failed after " + std::to_string(attempts) + " attempts"),
          last_text_(std::move(last_text)), attempts_(attempts) {}
    const std::string& last_text() const { return last_text_; }
    int attempts() const { return attempts_; }

private:
    std::string last_text_;
    int attempts_;
};

/// Missing or rejected API credentials. Never retried.
class AuthConfigError : public Error {
public:
    using Error::Error;
};

/// Transient transport problem (connect failure, 5xx, timeout). Retried with backoff.
class TransportError : public Error {
public:
    using Error::Error;
};

/// A structured response was missing a required field or carried a bad value.
class SchemaError : public Error {
public:
    explicit SchemaError(std::string field, const std::string& detail = "")
        : Error("schema violation at field '" + field + "'" +
                (detail.empty() ? "" : ": " + detail)),
          field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// A numeric score fell outside its declared range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A stage returned the wrong number of items (candidates, strategies, ...).
class WrongArityError : public Error {
public:
    using Error::Error;
};

/// The red team reported no attack vectors at all.
class NoVectorsError : public Error {
public:
    using Error::Error;
};

/// A precondition on an operation's inputs was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Scorecard aggregation is missing one or more (topic, persona) cells.
class IncompleteScorecardError : public Error {
public:
    explicit IncompleteScorecardError(std::vector<std::pair<std::string, std::string>> missing)
        : Error(describe(missing)), missing_(std::move(missing)) {}
    const std::vector<std::pair<std::string, std::string>>& missing_cells() const {
        return missing_;
    }

private:
    static std::string describe(const std::vector<std::pair<std::string, std::string>>& m) {
        std::string s = "incomplete scorecard; missing cells:";
        for (const auto& [topic, persona] : m) s += " (" + topic + ", " + persona + ")";
        return s;
    }
    std::vector<std::pair<std::string, std::string>> missing_;
};

}  // namespace rhetor
