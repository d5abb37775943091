#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rhetor/domain.hpp"
#include "rhetor/gateway.hpp"
#include "rhetor/prompts.hpp"
#include "rhetor/rag.hpp"

// The specialized agents. Each is a stateless function over injected
// dependencies; every numeric selection (composite argmax, defensibility
// argmin) is computed here, never taken from model output.

namespace rhetor {

struct AgentContext {
    PersonaProfile persona;
    DebateTopic topic;
    Gateway* gateway = nullptr;
    const PromptCatalog* catalog = nullptr;
    std::uint64_t seed = 0;  // fixed per run; all agent calls derive from it
};

/// Render a catalog prompt, run the two-call protocol, return the extracted
/// object. Shared by every LLM-backed agent.
json agent_extract(const AgentContext& ctx, const std::string& prompt_key,
                   const std::map<std::string, std::string>& bindings,
                   std::string_view stage_label);

/// Selector: deconstruct the question into a strategic blueprint.
StrategicBrief select_strategy(const AgentContext& ctx);

/// Researcher, step 1: one deterministic query per brief element (no LLM).
std::vector<std::string> compile_queries(const StrategicBrief& brief);

/// Researcher, step 2: run the queries persona-filtered and merge into a
/// dossier, de-duplicating by chunk keeping the higher similarity.
ResearchDossier research(const StrategicBrief& brief, const VectorStore& store,
                         const std::string& persona_id, std::size_t top_k);

/// Thinker: one direct argument (single) or orthodox/unorthodox/pragmatic
/// options (triple).
CandidateSet think(const AgentContext& ctx, const StrategicBrief& brief,
                   const ResearchDossier& dossier, ThinkMode mode);

/// Weighted validator composite: 0.60 principles + 0.25 personality +
/// 0.15 strength. Inputs outside [0,10] -> RangeError.
double composite_score(double principles, double personality, double strength);

/// Argmax by composite; ties go to the earliest stance in the fixed order
/// orthodox, unorthodox, pragmatic. Input permutation never changes the
/// winner.
Stance pick_winner(const std::vector<CandidateScore>& scores);

/// Validator: score the three candidates and select the winner.
ValidationReport validate_candidates(const AgentContext& ctx,
                                     const CandidateSet& candidates);

/// First minimal-defensibility vector in listing order.
const AttackVector& pick_critical(const std::vector<AttackVector>& vectors);

/// Red team: attack the winning argument and isolate the vulnerability that
/// was hardest to defend.
VulnerabilityReport red_team(const AgentContext& ctx,
                             const std::string& winning_argument,
                             const std::vector<std::string>& rival_personas);

/// Strategist: three labeled counter-responses to the critical vulnerability.
StrategySet strategize(const AgentContext& ctx, const std::string& argument,
                       const CriticalVulnerability& vulnerability);

/// Final judge: choose among the original and the three integrations.
FinalArgument final_judge(const AgentContext& ctx, const std::string& original_argument,
                          const StrategySet& strategies);

/// Communicator: stylistic rewrite in the persona's own voice.
PolishedStatement communicate(const AgentContext& ctx, const std::string& argument,
                              ModelKind model_kind);

}  // namespace rhetor
