#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace rhetor {

/// One catalog entry. Placeholders use {{name}} syntax; a literal "{{" is
/// written as "{{{{". required_placeholders is always exactly the set the
/// scanner finds in template_text.
struct PromptTemplate {
    std::string template_text;
    std::set<std::string> required_placeholders;
    bool expects_thinking_block = false;
};

struct PromptCatalog {
    std::map<std::string, PromptTemplate> entries;
    std::string version;
};

/// Every stage key that must be present for the pipelines to run.
inline constexpr std::array<std::string_view, 10> kRequiredPromptKeys = {
    "selector",     "thinker_single", "thinker_triple", "validator",
    "red_team",     "strategist",     "final_judge",    "communicator",
    "arbiter",      "json_extractor",
};

/// Scan a template for {{name}} placeholders. "{{{{" escapes a literal "{{"
/// and is not a placeholder. Throws ConfigError on an unterminated or empty
/// placeholder.
std::set<std::string> scan_placeholders(const std::string& template_text);

/// Substitute bindings into a raw template string. Missing binding ->
/// UnboundPlaceholderError. Values are inserted verbatim (no re-expansion).
std::string render_template(const std::string& template_text,
                            const std::map<std::string, std::string>& bindings);

/// Load the YAML prompt catalog. Missing stage key -> MissingPromptError;
/// parse problems -> ConfigError.
PromptCatalog load_catalog(const std::filesystem::path& path);

/// Render a catalog entry by key. Unknown key -> MissingPromptError.
std::string render(const PromptCatalog& catalog, const std::string& key,
                   const std::map<std::string, std::string>& bindings);

}  // namespace rhetor
