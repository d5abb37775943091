#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rhetor/canonical_json.hpp"

namespace rhetor {

enum class BackendKind { Remote, Mock };

struct BackendConfig {
    BackendKind kind = BackendKind::Mock;
    std::string base_url;                        // required for remote
    std::string api_key_env = "RHETOR_API_KEY";  // key is only ever read from env
    std::string model_name = "default";
    std::string extractor_model_name;  // empty -> same model as model_name
    std::chrono::milliseconds timeout{60000};
    int max_retries = 2;
    std::chrono::milliseconds retry_backoff{250};  // doubled per retry
    double gen_temperature = 0.7;
    double extract_temperature = 0.0;  // extraction should be deterministic
    int max_tokens = 2048;
};

struct CompletionRequest {
    std::string prompt;
    int max_tokens = 2048;
    double temperature = 0.0;
    std::optional<std::uint64_t> seed;
    std::string model_name = "default";
};

/// One text-completion transport. Implementations throw TransportError for
/// transient failures (retried by the gateway) and AuthConfigError for
/// credential problems (never retried).
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string send(const CompletionRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Mock backend

struct MockReply {
    enum class Kind { Text, TransientFailure, AuthFailure };
    Kind kind = Kind::Text;
    std::string text;

    static MockReply text_reply(std::string t) { return {Kind::Text, std::move(t)}; }
    static MockReply transient_failure() { return {Kind::TransientFailure, {}}; }
    static MockReply auth_failure() { return {Kind::AuthFailure, {}}; }
};

/// Scriptable fixture backend. Ordered (substring matcher -> reply sequence)
/// rules are consumed first; a rule's last reply repeats once the sequence is
/// exhausted. When no rule matches, a seeded fallback generator emits a
/// schema-valid document for whatever stage the prompt belongs to, as a pure
/// function of (seed, prompt) — that is what makes full pipeline transcripts
/// replayable bit-for-bit.
class MockBackend : public Backend {
public:
    void add_rule(std::string match_substring, std::vector<MockReply> replies);
    void add_text_rule(std::string match_substring, std::string reply_text);

    std::string send(const CompletionRequest& request) override;
    std::size_t call_count() const;

    /// The fallback generator, exposed so tests can pin its purity.
    static std::string fallback_reply(std::uint64_t seed, const std::string& prompt);

private:
    struct Rule {
        std::string match;
        std::vector<MockReply> replies;
        std::size_t next = 0;
    };
    mutable std::mutex mutex_;
    std::vector<Rule> rules_;
    std::size_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// Remote backend (HTTP chat-completion wire format)

class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(const BackendConfig& config);
    std::string send(const CompletionRequest& request) override;

private:
    BackendConfig config_;
    std::string api_key_;
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

// ---------------------------------------------------------------------------
// Strict structured-output parsing

/// Parse text that must be exactly one JSON object: no leading or trailing
/// prose, no concatenated objects. Throws NotSingleObjectError otherwise,
/// distinguishing empty / prose-wrapped / multiple-objects / syntax-error.
json parse_single_object(const std::string& text);

// ---------------------------------------------------------------------------
// Gateway

struct ExtractionResult {
    json object;
    std::string raw_reasoning;  // kept verbatim for run-record inspection
    int attempts = 1;           // extraction calls made
};

/// Uniform access to a completion backend plus the two-call protocol that
/// guarantees a single valid object per agent step: call 1 reasons freely,
/// call 2 extracts the clean object and is retried until it parses.
class Gateway {
public:
    Gateway(BackendConfig config, std::shared_ptr<Backend> backend);
    explicit Gateway(BackendConfig config);

    /// One completion with retry/backoff on transient transport failures.
    std::string complete(const CompletionRequest& request);

    /// extractor_template must contain a {{raw}} placeholder.
    ExtractionResult reason_then_extract(const std::string& reasoning_prompt,
                                         const std::string& extractor_template,
                                         std::optional<std::uint64_t> seed);

    const BackendConfig& config() const { return config_; }
    Backend& backend() { return *backend_; }

private:
    BackendConfig config_;
    std::shared_ptr<Backend> backend_;
};

}  // namespace rhetor
