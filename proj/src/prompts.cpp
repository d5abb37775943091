#include "rhetor/prompts.hpp"

#include <cctype>
#include <fstream>

#include <yaml-cpp/yaml.h>

#include "rhetor/errors.hpp"

namespace rhetor {

namespace {

bool is_placeholder_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Shared walk over a template. Emits literal text and placeholder names to
// the two callbacks; the scanner and the renderer differ only in what they do
// with them.
template <typename OnText, typename OnPlaceholder>
void walk_template(const std::string& tmpl, OnText&& on_text, OnPlaceholder&& on_slot) {
    size_t i = 0;
    while (i < tmpl.size()) {
        const size_t open = tmpl.find("{{", i);
        if (open == std::string::npos) {
            on_text(std::string_view(tmpl).substr(i));
            return;
        }
        on_text(std::string_view(tmpl).substr(i, open - i));
        if (tmpl.compare(open, 4, "{{{{") == 0) {
            on_text(std::string_view("{{"));
            i = open + 4;
            continue;
        }
        size_t p = open + 2;
        size_t name_end = p;
        while (name_end < tmpl.size() && is_placeholder_char(tmpl[name_end])) ++name_end;
        if (name_end == p) {
            throw ConfigError("empty placeholder name at offset " + std::to_string(open));
        }
        if (tmpl.compare(name_end, 2, "}}") != 0) {
            throw ConfigError("unterminated placeholder '{{" +
                              tmpl.substr(p, name_end - p) + "'");
        }
        on_slot(tmpl.substr(p, name_end - p));
        i = name_end + 2;
    }
}

}  // namespace

std::set<std::string> scan_placeholders(const std::string& template_text) {
    std::set<std::string> names;
    walk_template(
        template_text, [](std::string_view) {},
        [&](const std::string& name) { names.insert(name); });
    return names;
}

std::string render_template(const std::string& template_text,
                            const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(template_text.size());
    walk_template(
        template_text, [&](std::string_view text) { out.append(text); },
        [&](const std::string& name) {
            auto it = bindings.find(name);
            if (it == bindings.end()) throw UnboundPlaceholderError(name);
            out.append(it->second);
        });
    return out;
}

PromptCatalog load_catalog(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ConfigError("prompt catalog not found: " + path.string());
    }
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ConfigError("failed to parse prompt catalog " + path.string() + ": " +
                          e.what());
    }
    if (!root.IsMap()) throw ConfigError("prompt catalog root must be a mapping");

    PromptCatalog catalog;
    catalog.version = root["version"] ? root["version"].as<std::string>() : "unversioned";

    const YAML::Node prompts = root["prompts"];
    if (!prompts || !prompts.IsMap()) {
        throw ConfigError("prompt catalog must contain a 'prompts' mapping");
    }
    for (const auto& entry : prompts) {
        const std::string key = entry.first.as<std::string>();
        if (catalog.entries.count(key)) {
            throw ConfigError("duplicate prompt key: " + key);
        }
        PromptTemplate tmpl;
        if (entry.second.IsScalar()) {
            tmpl.template_text = entry.second.as<std::string>();
        } else if (entry.second.IsMap()) {
            const YAML::Node text = entry.second["template"];
            if (!text) throw ConfigError("prompt '" + key + "' lacks a template field");
            tmpl.template_text = text.as<std::string>();
            if (entry.second["thinking"]) {
                tmpl.expects_thinking_block = entry.second["thinking"].as<bool>();
            }
        } else {
            throw ConfigError("prompt '" + key + "' must be a string or a mapping");
        }
        tmpl.required_placeholders = scan_placeholders(tmpl.template_text);
        catalog.entries.emplace(key, std::move(tmpl));
    }

    for (const auto key : kRequiredPromptKeys) {
        if (!catalog.entries.count(std::string(key))) {
            throw MissingPromptError(std::string(key));
        }
    }
    return catalog;
}

std::string render(const PromptCatalog& catalog, const std::string& key,
                   const std::map<std::string, std::string>& bindings) {
    auto it = catalog.entries.find(key);
    if (it == catalog.entries.end()) throw MissingPromptError(key);
    return render_template(it->second.template_text, bindings);
}

}  // namespace rhetor
