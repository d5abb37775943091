#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rhetor/canonical_json.hpp"

// Data contracts between pipeline stages. Every stage consumes exactly the
// prior stage's output, so these types are the whole inter-agent protocol.
// All values are immutable after construction and safe to share across
// threads. Canonical serialization for every type is JSON.

namespace rhetor {

// ---------------------------------------------------------------------------
// Enums shared across stages

enum class ModelKind { Simple, Complex };
enum class Stance { Single, Orthodox, Unorthodox, Pragmatic };
enum class ThinkMode { Single, Triple };
enum class QueryOrigin { CorePrinciple, HistoricalPrecedent, IdeologicalAlly };
enum class FinalChoice { Original, Rebuttal, ReframeMinimize, ConcedeOutweigh };
enum class Winner { A, B, Tie };

std::string to_string(ModelKind k);
std::string to_string(Stance s);
std::string to_string(QueryOrigin o);
std::string to_string(FinalChoice c);
std::string to_string(Winner w);

ModelKind model_kind_from_string(const std::string& s);
Stance stance_from_string(const std::string& s);
QueryOrigin query_origin_from_string(const std::string& s);
FinalChoice final_choice_from_string(const std::string& s);
Winner winner_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Panel inputs

/// A historical figure as the pipeline sees it. persona_id doubles as the
/// corpus author tag, so it must match the ingest manifest exactly
/// (case-sensitive).
struct PersonaProfile {
    std::string persona_id;
    std::string display_name;
    std::string philosophy;
    std::string communication_style;
    std::vector<std::string> representative_prose;
};

struct DebateTopic {
    std::string topic_id;
    std::string question;
};

// ---------------------------------------------------------------------------
// Stage outputs

/// Selector output: the strategic blueprint the rest of the pipeline builds on.
struct StrategicBrief {
    std::string core_principle;
    std::string historical_precedent;
    std::string ideological_ally;
};

struct Passage {
    std::string text;
    std::string persona_id;
    std::string source_ref;
    double similarity = 0.0;  // cosine, in [-1, 1]
    QueryOrigin query_origin = QueryOrigin::CorePrinciple;
};

/// Researcher output: persona-filtered passages, grouped by the brief element
/// that produced them, each group sorted by descending similarity.
struct ResearchDossier {
    std::vector<Passage> passages;
};

struct CandidateArgument {
    Stance stance = Stance::Single;
    std::string thesis;
    std::string body;

    /// Full argument text as downstream stages consume it.
    std::string full_text() const { return thesis + "\n\n" + body; }
};

struct CandidateSet {
    ThinkMode mode = ThinkMode::Single;
    std::vector<CandidateArgument> candidates;
};

struct CandidateScore {
    Stance stance = Stance::Orthodox;
    int principles = 0;   // 0-10
    int personality = 0;  // 0-10
    int strength = 0;     // 0-10
    double composite = 0.0;
};

struct ValidationReport {
    std::vector<CandidateScore> per_candidate;
    Stance winner_stance = Stance::Orthodox;
    std::string winner_text;
};

struct AttackVector {
    std::string description;
    std::string origin;  // "internal-flaw" or a rival persona_id
    std::string simulated_defense;
    int defensibility = 0;  // 0-10, lower = harder to defend
};

struct CriticalVulnerability {
    std::string description;
    std::string rationale;
};

struct VulnerabilityReport {
    std::vector<AttackVector> attack_vectors;
    CriticalVulnerability critical;
};

struct StrategySet {
    std::string rebuttal;
    std::string reframe_minimize;
    std::string concede_outweigh;
};

struct FinalArgument {
    FinalChoice chosen = FinalChoice::Original;
    std::string text;
    std::string justification;
};

struct PolishedStatement {
    std::string persona_id;
    std::string topic_id;
    ModelKind model_kind = ModelKind::Simple;
    std::string text;
};

// ---------------------------------------------------------------------------
// Run transcript

struct StageRecord {
    std::string stage_name;
    std::string input_digest;
    json output_document;
    std::string started_at;
    std::string ended_at;
};

/// Full persisted transcript of one pipeline execution. Stage k's
/// input_digest always equals the digest of stage k-1's output_document;
/// stage 0 chains off the run inputs.
struct RunRecord {
    std::string run_id;
    std::string persona_id;
    std::string topic_id;
    ModelKind model_kind = ModelKind::Simple;
    std::uint64_t seed = 0;
    std::vector<StageRecord> stages;
    bool failed = false;
    std::string failed_stage;
    std::string error;
};

// ---------------------------------------------------------------------------
// Evaluation

struct CriterionScores {
    int structure = 0;
    int depth = 0;
    int support = 0;
    int rhetoric = 0;

    int sum() const { return structure + depth + support + rhetoric; }
};

struct ArbiterVerdict {
    std::string topic_id;
    std::string persona_id;
    CriterionScores scores_a;
    CriterionScores scores_b;
    double final_a = 0.0;  // 0-100
    double final_b = 0.0;
    Winner winner = Winner::Tie;
    std::string justification;
};

struct ScoreRow {
    std::string topic_id;
    std::string topic_label;
    std::string persona_id;
    ModelKind model_kind = ModelKind::Simple;
    double final_score = 0.0;
    CriterionScores criteria;
};

struct ModelAverages {
    double simple = 0.0;
    double complex_ = 0.0;
};

struct ScorecardReport {
    std::vector<ScoreRow> rows;  // topics x personas x 2
    ModelAverages overall_avg;
    std::map<std::string, ModelAverages> per_persona_avg;
};

// ---------------------------------------------------------------------------
// JSON mapping (canonical field names)

json to_json(const PersonaProfile&);
json to_json(const DebateTopic&);
json to_json(const StrategicBrief&);
json to_json(const Passage&);
json to_json(const ResearchDossier&);
json to_json(const CandidateArgument&);
json to_json(const CandidateSet&);
json to_json(const CandidateScore&);
json to_json(const ValidationReport&);
json to_json(const AttackVector&);
json to_json(const VulnerabilityReport&);
json to_json(const StrategySet&);
json to_json(const FinalArgument&);
json to_json(const PolishedStatement&);
json to_json(const StageRecord&, bool with_timestamps = true);
json to_json(const RunRecord&, bool with_timestamps = true);
json to_json(const CriterionScores&);
json to_json(const ArbiterVerdict&);
json to_json(const ScoreRow&);
json to_json(const ScorecardReport&);

PersonaProfile persona_from_json(const json&);
DebateTopic topic_from_json(const json&);
StrategicBrief brief_from_json(const json&);
Passage passage_from_json(const json&);
ResearchDossier dossier_from_json(const json&);
CandidateArgument candidate_from_json(const json&);
CandidateSet candidate_set_from_json(const json&);
CandidateScore candidate_score_from_json(const json&);
ValidationReport validation_report_from_json(const json&);
AttackVector attack_vector_from_json(const json&);
VulnerabilityReport vulnerability_report_from_json(const json&);
StrategySet strategy_set_from_json(const json&);
FinalArgument final_argument_from_json(const json&);
PolishedStatement statement_from_json(const json&);
StageRecord stage_record_from_json(const json&);
RunRecord run_record_from_json(const json&);
CriterionScores criterion_scores_from_json(const json&);
ArbiterVerdict verdict_from_json(const json&);
ScoreRow score_row_from_json(const json&);
ScorecardReport scorecard_from_json(const json&);

/// Pull an integer 0-10 criterion score out of a document. Missing or
/// non-integer -> SchemaError; out of range -> RangeError.
int score_field(const json& j, const char* field);

/// Pull a required string field. Missing or wrong type -> SchemaError.
std::string string_field(const json& j, const char* field);

// ---------------------------------------------------------------------------
// Invariant checks. Each throws (SchemaError / RangeError / WrongArityError /
// NoVectorsError) on violation.

void validate(const PersonaProfile&);
void validate(const DebateTopic&);
void validate(const StrategicBrief&);
void validate(const ResearchDossier&, const std::string& expected_persona);
void validate(const CandidateSet&);
void validate(const ValidationReport&);
void validate(const VulnerabilityReport&);
void validate(const StrategySet&);
void validate(const FinalArgument&);
void validate(const PolishedStatement&);
void validate(const ArbiterVerdict&);

/// Canonical text of a run record; timestamps are excluded from digests and
/// equality so replays of the same seed compare byte-identical.
std::string canonical_run_text(const RunRecord&, bool with_timestamps);
bool records_equal(const RunRecord& a, const RunRecord& b);

}  // namespace rhetor
