#include "rhetor/agents.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "rhetor/errors.hpp"

namespace rhetor {

namespace {

std::string trim_copy(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::map<std::string, std::string> base_bindings(const AgentContext& ctx) {
    return {{"persona_id", ctx.persona.persona_id},
            {"display_name", ctx.persona.display_name},
            {"philosophy", ctx.persona.philosophy},
            {"communication_style", ctx.persona.communication_style},
            {"representative_prose", join(ctx.persona.representative_prose, "\n---\n")},
            {"question", ctx.topic.question}};
}

std::string dossier_block(const ResearchDossier& dossier) {
    if (dossier.passages.empty()) return "(no passages retrieved)";
    std::string out;
    for (const auto& p : dossier.passages) {
        out += "<passage origin=\"" + to_string(p.query_origin) + "\" source=\"" +
               p.source_ref + "\" similarity=\"" + format_real(p.similarity) + "\">\n" +
               p.text + "\n</passage>\n";
    }
    return out;
}

void require_in(const AgentContext& ctx) {
    if (ctx.gateway == nullptr) throw ConfigError("agent context lacks a gateway");
    if (ctx.catalog == nullptr) throw ConfigError("agent context lacks a prompt catalog");
}

constexpr std::array<Stance, 3> kTripleOrder = {Stance::Orthodox, Stance::Unorthodox,
                                                Stance::Pragmatic};

}  // namespace

json agent_extract(const AgentContext& ctx, const std::string& prompt_key,
                   const std::map<std::string, std::string>& bindings,
                   std::string_view stage_label) {
    require_in(ctx);
    const std::string prompt = render(*ctx.catalog, prompt_key, bindings);
    auto it = ctx.catalog->entries.find("json_extractor");
    if (it == ctx.catalog->entries.end()) throw MissingPromptError("json_extractor");
    const std::uint64_t call_seed = derive_seed(ctx.seed, {stage_label});
    return ctx.gateway
        ->reason_then_extract(prompt, it->second.template_text, call_seed)
        .object;
}

StrategicBrief select_strategy(const AgentContext& ctx) {
    const json obj = agent_extract(ctx, "selector", base_bindings(ctx), "selector");
    StrategicBrief brief = brief_from_json(obj);
    validate(brief);
    return brief;
}

std::vector<std::string> compile_queries(const StrategicBrief& brief) {
    // Deterministic by design: the researcher never consults an LLM.
    return {"views and writings concerning: " + trim_copy(brief.core_principle),
            "views and writings concerning: " + trim_copy(brief.historical_precedent),
            "views and writings concerning: " + trim_copy(brief.ideological_ally)};
}

ResearchDossier research(const StrategicBrief& brief, const VectorStore& store,
                         const std::string& persona_id, std::size_t top_k) {
    const auto queries = compile_queries(brief);
    constexpr std::array<QueryOrigin, 3> origins = {QueryOrigin::CorePrinciple,
                                                    QueryOrigin::HistoricalPrecedent,
                                                    QueryOrigin::IdeologicalAlly};

    // chunk_id -> best passage seen so far; earlier origins win exact ties.
    std::map<std::uint64_t, Passage> best;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        for (const QueryHit& hit :
             store.query(QuerySpec{queries[i], persona_id, top_k})) {
            Passage p{hit.text, hit.persona_id, hit.source_ref, hit.similarity,
                      origins[i]};
            auto [it, inserted] = best.emplace(hit.chunk_id, p);
            if (!inserted && p.similarity > it->second.similarity) it->second = p;
        }
    }

    ResearchDossier dossier;
    for (const QueryOrigin origin : origins) {
        std::vector<std::pair<std::uint64_t, Passage>> group;
        for (const auto& [id, p] : best) {
            if (p.query_origin == origin) group.emplace_back(id, p);
        }
        std::sort(group.begin(), group.end(), [](const auto& a, const auto& b) {
            if (a.second.similarity != b.second.similarity) {
                return a.second.similarity > b.second.similarity;
            }
            return a.first < b.first;
        });
        for (auto& [id, p] : group) dossier.passages.push_back(std::move(p));
    }
    validate(dossier, persona_id);
    return dossier;
}

CandidateSet think(const AgentContext& ctx, const StrategicBrief& brief,
                   const ResearchDossier& dossier, ThinkMode mode) {
    auto bindings = base_bindings(ctx);
    bindings["core_principle"] = brief.core_principle;
    bindings["historical_precedent"] = brief.historical_precedent;
    bindings["ideological_ally"] = brief.ideological_ally;
    bindings["dossier"] = dossier_block(dossier);

    CandidateSet set;
    set.mode = mode;
    if (mode == ThinkMode::Single) {
        const json obj = agent_extract(ctx, "thinker_single", bindings, "thinker");
        CandidateArgument c;
        c.stance = Stance::Single;
        c.thesis = string_field(obj, "thesis");
        c.body = string_field(obj, "body");
        set.candidates.push_back(std::move(c));
    } else {
        const json obj = agent_extract(ctx, "thinker_triple", bindings, "thinker");
        if (!obj.contains("candidates") || !obj["candidates"].is_array()) {
            throw SchemaError("candidates", "missing or not an array");
        }
        const json& arr = obj["candidates"];
        if (arr.size() != 3) {
            throw WrongArityError("triple think returned " + std::to_string(arr.size()) +
                                  " candidates, expected 3");
        }
        std::vector<CandidateArgument> parsed;
        for (const auto& item : arr) parsed.push_back(candidate_from_json(item));
        // Normalize to the fixed stance order so downstream tie-breaks are
        // independent of the order the model listed them in.
        for (const Stance stance : kTripleOrder) {
            auto it = std::find_if(parsed.begin(), parsed.end(),
                                   [&](const auto& c) { return c.stance == stance; });
            if (it == parsed.end()) {
                throw SchemaError("stance", "missing stance '" + to_string(stance) + "'");
            }
            set.candidates.push_back(*it);
        }
    }
    validate(set);
    return set;
}

double composite_score(double principles, double personality, double strength) {
    for (double v : {principles, personality, strength}) {
        if (v < 0.0 || v > 10.0) {
            throw RangeError("criterion score " + format_real(v) + " outside [0,10]");
        }
    }
    return 0.60 * principles + 0.25 * personality + 0.15 * strength;
}

Stance pick_winner(const std::vector<CandidateScore>& scores) {
    if (scores.empty()) throw PreconditionError("no candidate scores to rank");
    std::vector<CandidateScore> ordered = scores;
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        return static_cast<int>(a.stance) < static_cast<int>(b.stance);
    });
    const CandidateScore* best = &ordered.front();
    for (const auto& s : ordered) {
        if (s.composite > best->composite) best = &s;
    }
    return best->stance;
}

ValidationReport validate_candidates(const AgentContext& ctx,
                                     const CandidateSet& candidates) {
    if (candidates.mode != ThinkMode::Triple || candidates.candidates.size() != 3) {
        throw PreconditionError("validator requires exactly three candidates");
    }
    auto bindings = base_bindings(ctx);
    std::string block;
    for (const auto& c : candidates.candidates) {
        block += "<candidate stance=\"" + to_string(c.stance) + "\">\n" + c.full_text() +
                 "\n</candidate>\n";
    }
    bindings["candidates"] = block;

    const json obj = agent_extract(ctx, "validator", bindings, "validator");
    if (!obj.contains("evaluations") || !obj["evaluations"].is_array()) {
        throw SchemaError("evaluations", "missing or not an array");
    }
    if (obj["evaluations"].size() != 3) {
        throw WrongArityError("validator returned " +
                              std::to_string(obj["evaluations"].size()) +
                              " evaluations, expected 3");
    }

    // Composites are computed here from the raw criteria; the model's own
    // arithmetic, if any, is ignored.
    std::map<Stance, CandidateScore> by_stance;
    for (const auto& item : obj["evaluations"]) {
        CandidateScore s;
        s.stance = stance_from_string(string_field(item, "stance"));
        s.principles = score_field(item, "principles");
        s.personality = score_field(item, "personality");
        s.strength = score_field(item, "strength");
        s.composite = composite_score(s.principles, s.personality, s.strength);
        if (!by_stance.emplace(s.stance, s).second) {
            throw SchemaError("stance", "duplicate evaluation for " + to_string(s.stance));
        }
    }

    ValidationReport report;
    for (const Stance stance : kTripleOrder) {
        auto it = by_stance.find(stance);
        if (it == by_stance.end()) {
            throw SchemaError("stance", "no evaluation for " + to_string(stance));
        }
        report.per_candidate.push_back(it->second);
    }
    report.winner_stance = pick_winner(report.per_candidate);
    const auto winner = std::find_if(
        candidates.candidates.begin(), candidates.candidates.end(),
        [&](const auto& c) { return c.stance == report.winner_stance; });
    report.winner_text = winner->full_text();
    validate(report);
    return report;
}

const AttackVector& pick_critical(const std::vector<AttackVector>& vectors) {
    if (vectors.empty()) throw NoVectorsError("no attack vectors to rank");
    const AttackVector* worst = &vectors.front();
    for (const auto& v : vectors) {
        if (v.defensibility < worst->defensibility) worst = &v;
    }
    return *worst;
}

VulnerabilityReport red_team(const AgentContext& ctx,
                             const std::string& winning_argument,
                             const std::vector<std::string>& rival_personas) {
    if (winning_argument.empty()) {
        throw PreconditionError("red team needs a non-empty argument");
    }
    if (rival_personas.empty()) {
        throw PreconditionError("red team needs at least one rival persona");
    }
    auto bindings = base_bindings(ctx);
    bindings["argument"] = winning_argument;
    bindings["rivals"] = join(rival_personas, ", ");

    const json obj = agent_extract(ctx, "red_team", bindings, "red_team");
    if (!obj.contains("attack_vectors") || !obj["attack_vectors"].is_array()) {
        throw SchemaError("attack_vectors", "missing or not an array");
    }
    VulnerabilityReport report;
    for (const auto& item : obj["attack_vectors"]) {
        AttackVector v = attack_vector_from_json(item);
        if (v.origin != "internal-flaw" &&
            std::find(rival_personas.begin(), rival_personas.end(), v.origin) ==
                rival_personas.end()) {
            throw SchemaError("origin", "'" + v.origin +
                                            "' is neither internal-flaw nor a rival");
        }
        report.attack_vectors.push_back(std::move(v));
    }
    if (report.attack_vectors.empty()) throw NoVectorsError("red team listed no vectors");

    const AttackVector& critical = pick_critical(report.attack_vectors);
    report.critical.description = critical.description;
    report.critical.rationale =
        "hardest to defend: defensibility " + std::to_string(critical.defensibility) +
        "/10 across " + std::to_string(report.attack_vectors.size()) +
        " simulated defenses";
    validate(report);
    return report;
}

StrategySet strategize(const AgentContext& ctx, const std::string& argument,
                       const CriticalVulnerability& vulnerability) {
    if (vulnerability.description.empty()) {
        throw PreconditionError("strategist needs a non-empty vulnerability");
    }
    auto bindings = base_bindings(ctx);
    bindings["argument"] = argument;
    bindings["vulnerability"] = vulnerability.description;

    StrategySet set = strategy_set_from_json(
        agent_extract(ctx, "strategist", bindings, "strategist"));
    validate(set);
    return set;
}

FinalArgument final_judge(const AgentContext& ctx, const std::string& original_argument,
                          const StrategySet& strategies) {
    validate(strategies);
    auto bindings = base_bindings(ctx);
    // The four candidates are constructed here and shown to the model; it
    // must pick from this closed set.
    bindings["candidate_original"] = original_argument;
    bindings["candidate_rebuttal"] = original_argument + "\n\n" + strategies.rebuttal;
    bindings["candidate_reframe_minimize"] =
        original_argument + "\n\n" + strategies.reframe_minimize;
    bindings["candidate_concede_outweigh"] =
        original_argument + "\n\n" + strategies.concede_outweigh;

    const json obj = agent_extract(ctx, "final_judge", bindings, "final_judge");
    FinalArgument result = final_argument_from_json(obj);
    if (result.chosen == FinalChoice::Original) {
        result.text = original_argument;  // no integration happened
    }
    validate(result);
    return result;
}

PolishedStatement communicate(const AgentContext& ctx, const std::string& argument,
                              ModelKind model_kind) {
    if (argument.empty()) {
        throw PreconditionError("communicator needs a non-empty argument");
    }
    auto bindings = base_bindings(ctx);
    bindings["argument"] = argument;

    const json obj = agent_extract(ctx, "communicator", bindings, "communicator");
    PolishedStatement statement{ctx.persona.persona_id, ctx.topic.topic_id, model_kind,
                                string_field(obj, "text")};
    validate(statement);
    return statement;
}

}  // namespace rhetor
