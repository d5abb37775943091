#include "rhetor/gateway.hpp"

#include <cctype>
#include <thread>

#include "rhetor/errors.hpp"
#include "rhetor/prompts.hpp"

namespace rhetor {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

/// Index one past the brace that closes the object opening at `open`, or npos
/// if the text ends first. String-literal and escape aware.
std::size_t balanced_object_end(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

std::string clip(std::string_view s, std::size_t n = 80) {
    return std::string(s.substr(0, n)) + (s.size() > n ? "..." : "");
}

}  // namespace

json parse_single_object(const std::string& text) {
    using Kind = NotSingleObjectError::Kind;
    const std::string_view body = trim(text);
    if (body.empty()) throw NotSingleObjectError(Kind::Empty, "no content");

    if (body.front() != '{') {
        // Leading prose. If a well-formed object is embedded anyway, say so —
        // the distinction matters for retry diagnostics.
        const std::size_t open = body.find('{');
        if (open != std::string_view::npos) {
            const std::size_t end = balanced_object_end(body, open);
            if (end != std::string_view::npos &&
                json::accept(body.substr(open, end - open))) {
                throw NotSingleObjectError(Kind::ProseWrapped, clip(body));
            }
        }
        throw NotSingleObjectError(Kind::SyntaxError, clip(body));
    }

    const std::size_t end = balanced_object_end(body, 0);
    if (end == std::string_view::npos) {
        throw NotSingleObjectError(Kind::SyntaxError, "truncated object: " + clip(body));
    }
    json parsed;
    try {
        parsed = json::parse(body.substr(0, end));
    } catch (const json::parse_error& e) {
        throw NotSingleObjectError(Kind::SyntaxError, e.what());
    }
    const std::string_view rest = trim(body.substr(end));
    if (!rest.empty()) {
        if (rest.front() == '{') {
            throw NotSingleObjectError(Kind::MultipleObjects, clip(body));
        }
        throw NotSingleObjectError(Kind::ProseWrapped, "trailing content: " + clip(rest));
    }
    return parsed;
}

// ---------------------------------------------------------------------------

Gateway::Gateway(BackendConfig config, std::shared_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {}

Gateway::Gateway(BackendConfig config)
    : config_(std::move(config)), backend_(make_backend(config_)) {}

std::string Gateway::complete(const CompletionRequest& request) {
    if (request.prompt.empty()) {
        throw PreconditionError("completion prompt must be non-empty");
    }
    auto backoff = config_.retry_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            return backend_->send(request);
        } catch (const AuthConfigError&) {
            throw;  // credentials never fix themselves on retry
        } catch (const TransportError&) {
            if (attempt >= config_.max_retries) throw;
            if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
}

ExtractionResult Gateway::reason_then_extract(const std::string& reasoning_prompt,
                                              const std::string& extractor_template,
                                              std::optional<std::uint64_t> seed) {
    if (!scan_placeholders(extractor_template).count("raw")) {
        throw ConfigError("extractor template must contain a {{raw}} placeholder");
    }

    CompletionRequest reasoning;
    reasoning.prompt = reasoning_prompt;
    reasoning.max_tokens = config_.max_tokens;
    reasoning.temperature = config_.gen_temperature;
    reasoning.seed = seed;
    reasoning.model_name = config_.model_name;
    const std::string raw = complete(reasoning);

    CompletionRequest extraction;
    extraction.prompt = render_template(extractor_template, {{"raw", raw}});
    extraction.max_tokens = config_.max_tokens;
    extraction.temperature = config_.extract_temperature;
    extraction.seed = seed;
    extraction.model_name = config_.extractor_model_name.empty()
                                ? config_.model_name
                                : config_.extractor_model_name;

    int attempts = 0;
    std::string last;
    while (true) {
        ++attempts;
        last = complete(extraction);
        try {
            return ExtractionResult{parse_single_object(last), raw, attempts};
        } catch (const NotSingleObjectError&) {
            if (attempts > config_.max_retries) {
                throw ExtractionFailedError(last, attempts);
            }
        }
    }
}

}  // namespace rhetor
