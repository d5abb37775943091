#include <algorithm>
#include <array>
#include <string>

#include "rhetor/errors.hpp"
#include "rhetor/gateway.hpp"

// Scriptable offline backend. The fallback generator below produces
// schema-valid documents for every known stage so whole pipelines and
// experiments run without a network; its content is an arbitrary but fixed
// function of (seed, prompt).

namespace rhetor {

namespace {

std::uint64_t mix(std::uint64_t& h) {
    h += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

template <std::size_t N>
const char* pick(std::uint64_t& h, const std::array<const char*, N>& words) {
    return words[mix(h) % N];
}

int score(std::uint64_t& h) { return static_cast<int>(mix(h) % 11); }

constexpr std::array<const char*, 8> kPrinciples = {
    "energetic federal administration", "agrarian self-sufficiency",
    "the supremacy of public credit",   "checks upon concentrated power",
    "commercial union among the states", "the liberty of the yeoman farmer",
    "a balanced extended republic",      "restraint of factional passion"};

constexpr std::array<const char*, 8> kPrecedents = {
    "the assumption of state debts",  "the national bank charter debate",
    "the neutrality proclamation",    "the ratification convention",
    "the funding system compromise",  "the western settlement ordinance",
    "the militia organization bill",  "the commercial treaty negotiations"};

constexpr std::array<const char*, 8> kAllies = {
    "Montesquieu", "Hume",   "Locke",  "Blackstone",
    "Necker",      "Cicero", "Vattel", "Adam Smith"};

constexpr std::array<const char*, 6> kQualities = {
    "prudence", "vigor", "moderation", "firmness", "candor", "foresight"};

constexpr std::array<const char*, 6> kObjects = {
    "the public interest", "the national character", "our commercial prospects",
    "the several states",  "posterity",              "the general welfare"};

std::string sentence(std::uint64_t& h) {
    std::string s = "Let ";
    s += pick(h, kQualities);
    s += " guide our judgment of ";
    s += pick(h, kObjects);
    s += ", for ";
    s += pick(h, kPrinciples);
    s += " demands nothing less.";
    return s;
}

std::string paragraph(std::uint64_t& h) {
    std::string s = sentence(h);
    s += " ";
    s += sentence(h);
    return s;
}

/// Inner text of the first <tag>...</tag> block, or "" when absent.
std::string find_tag(const std::string& text, const std::string& tag) {
    const std::string open = "<" + tag + ">";
    const std::string close = "</" + tag + ">";
    const auto begin = text.find(open);
    if (begin == std::string::npos) return "";
    const auto start = begin + open.size();
    const auto end = text.find(close, start);
    if (end == std::string::npos) return "";
    return text.substr(start, end - start);
}

/// First balanced {...} block in the text, or "" when none exists.
std::string first_object_block(const std::string& text) {
    const auto open = text.find('{');
    if (open == std::string::npos) return "";
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return text.substr(open, i + 1 - open);
    }
    return "";
}

json candidate_for(std::uint64_t& h, const char* stance) {
    return json{{"stance", stance},
                {"thesis", std::string("On this question, ") + pick(h, kPrinciples) +
                               " must govern."},
                {"body", paragraph(h)}};
}

json stage_document(const std::string& role, std::uint64_t& h) {
    if (role == "selector") {
        return json{{"core_principle", pick(h, kPrinciples)},
                    {"historical_precedent", pick(h, kPrecedents)},
                    {"ideological_ally", pick(h, kAllies)}};
    }
    if (role == "thinker_single") {
        return json{{"thesis", std::string("The answer lies in ") + pick(h, kPrinciples) + "."},
                    {"body", paragraph(h)}};
    }
    if (role == "thinker_triple") {
        return json{{"candidates", json::array({candidate_for(h, "orthodox"),
                                                candidate_for(h, "unorthodox"),
                                                candidate_for(h, "pragmatic")})}};
    }
    if (role == "validator") {
        json evals = json::array();
        for (const char* stance : {"orthodox", "unorthodox", "pragmatic"}) {
            evals.push_back(json{{"stance", stance},
                                 {"principles", score(h)},
                                 {"personality", score(h)},
                                 {"strength", score(h)}});
        }
        return json{{"evaluations", evals}};
    }
    if (role == "red_team") {
        const int n = 2 + static_cast<int>(mix(h) % 3);
        json vectors = json::array();
        for (int i = 0; i < n; ++i) {
            vectors.push_back(json{
                {"description", std::string("the argument presumes ") + pick(h, kObjects) +
                                    " will favor " + pick(h, kPrinciples)},
                {"origin", "internal-flaw"},
                {"simulated_defense", sentence(h)},
                {"defensibility", score(h)}});
        }
        return json{{"attack_vectors", vectors}};
    }
    if (role == "strategist") {
        return json{{"rebuttal", sentence(h)},
                    {"reframe_minimize", sentence(h)},
                    {"concede_outweigh", sentence(h)}};
    }
    if (role == "final_judge") {
        constexpr std::array<const char*, 4> choices = {"original", "rebuttal",
                                                        "reframe_minimize",
                                                        "concede_outweigh"};
        return json{{"chosen", pick(h, choices)},
                    {"text", paragraph(h)},
                    {"justification", sentence(h)}};
    }
    if (role == "communicator") {
        return json{{"text", std::string("Fellow citizens: ") + paragraph(h)}};
    }
    if (role == "arbiter") {
        auto scores = [&h] {
            return json{{"structure", score(h)},
                        {"depth", score(h)},
                        {"support", score(h)},
                        {"rhetoric", score(h)}};
        };
        return json{{"scores_a", scores()},
                    {"scores_b", scores()},
                    {"justification", sentence(h)}};
    }
    return json{{"text", sentence(h)}};
}

}  // namespace

void MockBackend::add_rule(std::string match_substring, std::vector<MockReply> replies) {
    if (replies.empty()) throw ConfigError("mock rule needs at least one reply");
    std::lock_guard lock(mutex_);
    rules_.push_back(Rule{std::move(match_substring), std::move(replies), 0});
}

void MockBackend::add_text_rule(std::string match_substring, std::string reply_text) {
    add_rule(std::move(match_substring), {MockReply::text_reply(std::move(reply_text))});
}

std::string MockBackend::send(const CompletionRequest& request) {
    std::lock_guard lock(mutex_);
    ++calls_;
    for (auto& rule : rules_) {
        if (request.prompt.find(rule.match) == std::string::npos) continue;
        const auto idx = std::min(rule.next, rule.replies.size() - 1);
        ++rule.next;
        const MockReply& reply = rule.replies[idx];
        switch (reply.kind) {
            case MockReply::Kind::Text: return reply.text;
            case MockReply::Kind::TransientFailure:
                throw TransportError("scripted transient failure");
            case MockReply::Kind::AuthFailure:
                throw AuthConfigError("scripted auth failure");
        }
    }
    return fallback_reply(request.seed.value_or(0), request.prompt);
}

std::size_t MockBackend::call_count() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::string MockBackend::fallback_reply(std::uint64_t seed, const std::string& prompt) {
    const std::string role = find_tag(prompt, "agent_role");

    // The extractor's job is mechanical: pull the object out of the raw text.
    if (role == "json_extractor") {
        const std::string raw = find_tag(prompt, "raw");
        const std::string block = first_object_block(raw);
        return block.empty() ? std::string("{}") : block;
    }

    std::uint64_t h = derive_seed(seed, {"mock-fallback", prompt});
    const json doc = stage_document(role, h);
    std::uint64_t t = h;
    return "<thinking>" + sentence(t) + "</thinking>\n" + doc.dump();
}

}  // namespace rhetor
