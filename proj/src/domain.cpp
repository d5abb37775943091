#include "rhetor/domain.hpp"

#include <algorithm>
#include <cmath>

#include "rhetor/errors.hpp"

namespace rhetor {

// ---------------------------------------------------------------------------
// Enum <-> string

std::string to_string(ModelKind k) {
    return k == ModelKind::Simple ? "simple" : "complex";
}

std::string to_string(Stance s) {
    switch (s) {
        case Stance::Single: return "single";
        case Stance::Orthodox: return "orthodox";
        case Stance::Unorthodox: return "unorthodox";
        case Stance::Pragmatic: return "pragmatic";
    }
    return "single";
}

std::string to_string(QueryOrigin o) {
    switch (o) {
        case QueryOrigin::CorePrinciple: return "core_principle";
        case QueryOrigin::HistoricalPrecedent: return "historical_precedent";
        case QueryOrigin::IdeologicalAlly: return "ideological_ally";
    }
    return "core_principle";
}

std::string to_string(FinalChoice c) {
    switch (c) {
        case FinalChoice::Original: return "original";
        case FinalChoice::Rebuttal: return "rebuttal";
        case FinalChoice::ReframeMinimize: return "reframe_minimize";
        case FinalChoice::ConcedeOutweigh: return "concede_outweigh";
    }
    return "original";
}

std::string to_string(Winner w) {
    switch (w) {
        case Winner::A: return "a";
        case Winner::B: return "b";
        case Winner::Tie: return "tie";
    }
    return "tie";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "simple") return ModelKind::Simple;
    if (s == "complex") return ModelKind::Complex;
    throw SchemaError("model_kind", "unknown value '" + s + "'");
}

Stance stance_from_string(const std::string& s) {
    if (s == "single") return Stance::Single;
    if (s == "orthodox") return Stance::Orthodox;
    if (s == "unorthodox") return Stance::Unorthodox;
    if (s == "pragmatic") return Stance::Pragmatic;
    throw SchemaError("stance", "unknown value '" + s + "'");
}

QueryOrigin query_origin_from_string(const std::string& s) {
    if (s == "core_principle") return QueryOrigin::CorePrinciple;
    if (s == "historical_precedent") return QueryOrigin::HistoricalPrecedent;
    if (s == "ideological_ally") return QueryOrigin::IdeologicalAlly;
    throw SchemaError("query_origin", "unknown value '" + s + "'");
}

FinalChoice final_choice_from_string(const std::string& s) {
    if (s == "original") return FinalChoice::Original;
    if (s == "rebuttal") return FinalChoice::Rebuttal;
    if (s == "reframe_minimize") return FinalChoice::ReframeMinimize;
    if (s == "concede_outweigh") return FinalChoice::ConcedeOutweigh;
    throw SchemaError("chosen", "unknown value '" + s + "'");
}

Winner winner_from_string(const std::string& s) {
    if (s == "a") return Winner::A;
    if (s == "b") return Winner::B;
    if (s == "tie") return Winner::Tie;
    throw SchemaError("winner", "unknown value '" + s + "'");
}

// ---------------------------------------------------------------------------
// Field extraction helpers

namespace {

const json& require_field(const json& j, const char* field) {
    if (!j.is_object()) throw SchemaError(field, "parent is not an object");
    auto it = j.find(field);
    if (it == j.end()) throw SchemaError(field, "missing");
    return *it;
}

std::string require_string(const json& j, const char* field) {
    const json& v = require_field(j, field);
    if (!v.is_string()) throw SchemaError(field, "expected string");
    return v.get<std::string>();
}

double require_number(const json& j, const char* field) {
    const json& v = require_field(j, field);
    if (!v.is_number()) throw SchemaError(field, "expected number");
    return v.get<double>();
}

/// Integer criterion score. Integral floats (7.0) are accepted; out-of-range
/// values are a RangeError, not a schema error.
int require_score(const json& j, const char* field) {
    const json& v = require_field(j, field);
    if (!v.is_number()) throw SchemaError(field, "expected number");
    const double d = v.get<double>();
    if (d != std::floor(d)) throw SchemaError(field, "expected integer score");
    const int i = static_cast<int>(d);
    if (i < 0 || i > 10) {
        throw RangeError(std::string(field) + " score " + std::to_string(i) +
                         " outside [0,10]");
    }
    return i;
}

std::vector<std::string> string_list(const json& j, const char* field) {
    const json& v = require_field(j, field);
    if (!v.is_array()) throw SchemaError(field, "expected array");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) throw SchemaError(field, "expected array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

constexpr double kCompositeTol = 1e-9;

}  // namespace

int score_field(const json& j, const char* field) { return require_score(j, field); }

std::string string_field(const json& j, const char* field) {
    return require_string(j, field);
}

// ---------------------------------------------------------------------------
// to_json

json to_json(const PersonaProfile& p) {
    return json{{"persona_id", p.persona_id},
                {"display_name", p.display_name},
                {"philosophy", p.philosophy},
                {"communication_style", p.communication_style},
                {"representative_prose", p.representative_prose}};
}

json to_json(const DebateTopic& t) {
    return json{{"topic_id", t.topic_id}, {"question", t.question}};
}

json to_json(const StrategicBrief& b) {
    return json{{"core_principle", b.core_principle},
                {"historical_precedent", b.historical_precedent},
                {"ideological_ally", b.ideological_ally}};
}

json to_json(const Passage& p) {
    return json{{"text", p.text},
                {"persona_id", p.persona_id},
                {"source_ref", p.source_ref},
                {"similarity", p.similarity},
                {"query_origin", to_string(p.query_origin)}};
}

json to_json(const ResearchDossier& d) {
    json passages = json::array();
    for (const auto& p : d.passages) passages.push_back(to_json(p));
    return json{{"passages", passages}};
}

json to_json(const CandidateArgument& c) {
    return json{{"stance", to_string(c.stance)},
                {"thesis", c.thesis},
                {"body", c.body}};
}

json to_json(const CandidateSet& s) {
    json candidates = json::array();
    for (const auto& c : s.candidates) candidates.push_back(to_json(c));
    return json{{"mode", s.mode == ThinkMode::Single ? "single" : "triple"},
                {"candidates", candidates}};
}

json to_json(const CandidateScore& s) {
    return json{{"stance", to_string(s.stance)},
                {"principles", s.principles},
                {"personality", s.personality},
                {"strength", s.strength},
                {"composite", s.composite}};
}

json to_json(const ValidationReport& r) {
    json per = json::array();
    for (const auto& s : r.per_candidate) per.push_back(to_json(s));
    return json{{"per_candidate", per},
                {"winner_stance", to_string(r.winner_stance)},
                {"winner_text", r.winner_text}};
}

json to_json(const AttackVector& v) {
    return json{{"description", v.description},
                {"origin", v.origin},
                {"simulated_defense", v.simulated_defense},
                {"defensibility", v.defensibility}};
}

json to_json(const VulnerabilityReport& r) {
    json vectors = json::array();
    for (const auto& v : r.attack_vectors) vectors.push_back(to_json(v));
    return json{{"attack_vectors", vectors},
                {"critical", json{{"description", r.critical.description},
                                  {"rationale", r.critical.rationale}}}};
}

json to_json(const StrategySet& s) {
    return json{{"rebuttal", s.rebuttal},
                {"reframe_minimize", s.reframe_minimize},
                {"concede_outweigh", s.concede_outweigh}};
}

json to_json(const FinalArgument& f) {
    return json{{"chosen", to_string(f.chosen)},
                {"text", f.text},
                {"justification", f.justification}};
}

json to_json(const PolishedStatement& s) {
    return json{{"persona_id", s.persona_id},
                {"topic_id", s.topic_id},
                {"model_kind", to_string(s.model_kind)},
                {"text", s.text}};
}

json to_json(const StageRecord& s, bool with_timestamps) {
    json j{{"stage_name", s.stage_name},
           {"input_digest", s.input_digest},
           {"output_document", s.output_document}};
    if (with_timestamps) {
        j["started_at"] = s.started_at;
        j["ended_at"] = s.ended_at;
    }
    return j;
}

json to_json(const RunRecord& r, bool with_timestamps) {
    json stages = json::array();
    for (const auto& s : r.stages) stages.push_back(to_json(s, with_timestamps));
    json j{{"run_id", r.run_id},
           {"persona_id", r.persona_id},
           {"topic_id", r.topic_id},
           {"model_kind", to_string(r.model_kind)},
           {"seed", r.seed},
           {"status", r.failed ? "failed" : "ok"},
           {"stages", stages}};
    if (r.failed) {
        j["failed_stage"] = r.failed_stage;
        j["error"] = r.error;
    }
    return j;
}

json to_json(const CriterionScores& s) {
    return json{{"structure", s.structure},
                {"depth", s.depth},
                {"support", s.support},
                {"rhetoric", s.rhetoric}};
}

json to_json(const ArbiterVerdict& v) {
    return json{{"topic_id", v.topic_id},
                {"persona_id", v.persona_id},
                {"scores_a", to_json(v.scores_a)},
                {"scores_b", to_json(v.scores_b)},
                {"final_a", v.final_a},
                {"final_b", v.final_b},
                {"winner", to_string(v.winner)},
                {"justification", v.justification}};
}

json to_json(const ScoreRow& r) {
    return json{{"topic_id", r.topic_id},
                {"topic_label", r.topic_label},
                {"persona_id", r.persona_id},
                {"model_kind", to_string(r.model_kind)},
                {"final_score", r.final_score},
                {"criteria", to_json(r.criteria)}};
}

json to_json(const ScorecardReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) rows.push_back(to_json(row));
    json per_persona = json::object();
    for (const auto& [persona, avg] : r.per_persona_avg) {
        per_persona[persona] = json{{"simple", avg.simple}, {"complex", avg.complex_}};
    }
    return json{{"rows", rows},
                {"overall_avg", json{{"simple", r.overall_avg.simple},
                                     {"complex", r.overall_avg.complex_}}},
                {"per_persona_avg", per_persona}};
}

// ---------------------------------------------------------------------------
// from_json

PersonaProfile persona_from_json(const json& j) {
    PersonaProfile p;
    p.persona_id = require_string(j, "persona_id");
    p.display_name = require_string(j, "display_name");
    p.philosophy = require_string(j, "philosophy");
    p.communication_style = require_string(j, "communication_style");
    p.representative_prose = string_list(j, "representative_prose");
    return p;
}

DebateTopic topic_from_json(const json& j) {
    return DebateTopic{require_string(j, "topic_id"), require_string(j, "question")};
}

StrategicBrief brief_from_json(const json& j) {
    StrategicBrief b;
    b.core_principle = require_string(j, "core_principle");
    b.historical_precedent = require_string(j, "historical_precedent");
    b.ideological_ally = require_string(j, "ideological_ally");
    return b;
}

Passage passage_from_json(const json& j) {
    Passage p;
    p.text = require_string(j, "text");
    p.persona_id = require_string(j, "persona_id");
    p.source_ref = require_string(j, "source_ref");
    p.similarity = require_number(j, "similarity");
    p.query_origin = query_origin_from_string(require_string(j, "query_origin"));
    return p;
}

ResearchDossier dossier_from_json(const json& j) {
    ResearchDossier d;
    for (const auto& item : require_field(j, "passages")) {
        d.passages.push_back(passage_from_json(item));
    }
    return d;
}

CandidateArgument candidate_from_json(const json& j) {
    CandidateArgument c;
    c.stance = stance_from_string(require_string(j, "stance"));
    c.thesis = require_string(j, "thesis");
    c.body = require_string(j, "body");
    return c;
}

CandidateSet candidate_set_from_json(const json& j) {
    CandidateSet s;
    const std::string mode = require_string(j, "mode");
    if (mode == "single") {
        s.mode = ThinkMode::Single;
    } else if (mode == "triple") {
        s.mode = ThinkMode::Triple;
    } else {
        throw SchemaError("mode", "unknown value '" + mode + "'");
    }
    for (const auto& item : require_field(j, "candidates")) {
        s.candidates.push_back(candidate_from_json(item));
    }
    return s;
}

CandidateScore candidate_score_from_json(const json& j) {
    CandidateScore s;
    s.stance = stance_from_string(require_string(j, "stance"));
    s.principles = require_score(j, "principles");
    s.personality = require_score(j, "personality");
    s.strength = require_score(j, "strength");
    s.composite = require_number(j, "composite");
    return s;
}

ValidationReport validation_report_from_json(const json& j) {
    ValidationReport r;
    for (const auto& item : require_field(j, "per_candidate")) {
        r.per_candidate.push_back(candidate_score_from_json(item));
    }
    r.winner_stance = stance_from_string(require_string(j, "winner_stance"));
    r.winner_text = require_string(j, "winner_text");
    return r;
}

AttackVector attack_vector_from_json(const json& j) {
    AttackVector v;
    v.description = require_string(j, "description");
    v.origin = require_string(j, "origin");
    v.simulated_defense = require_string(j, "simulated_defense");
    v.defensibility = require_score(j, "defensibility");
    return v;
}

VulnerabilityReport vulnerability_report_from_json(const json& j) {
    VulnerabilityReport r;
    for (const auto& item : require_field(j, "attack_vectors")) {
        r.attack_vectors.push_back(attack_vector_from_json(item));
    }
    const json& crit = require_field(j, "critical");
    r.critical.description = require_string(crit, "description");
    r.critical.rationale = require_string(crit, "rationale");
    return r;
}

StrategySet strategy_set_from_json(const json& j) {
    StrategySet s;
    s.rebuttal = require_string(j, "rebuttal");
    s.reframe_minimize = require_string(j, "reframe_minimize");
    s.concede_outweigh = require_string(j, "concede_outweigh");
    return s;
}

FinalArgument final_argument_from_json(const json& j) {
    FinalArgument f;
    f.chosen = final_choice_from_string(require_string(j, "chosen"));
    f.text = require_string(j, "text");
    f.justification = require_string(j, "justification");
    return f;
}

PolishedStatement statement_from_json(const json& j) {
    PolishedStatement s;
    s.persona_id = require_string(j, "persona_id");
    s.topic_id = require_string(j, "topic_id");
    s.model_kind = model_kind_from_string(require_string(j, "model_kind"));
    s.text = require_string(j, "text");
    return s;
}

StageRecord stage_record_from_json(const json& j) {
    StageRecord s;
    s.stage_name = require_string(j, "stage_name");
    s.input_digest = require_string(j, "input_digest");
    s.output_document = require_field(j, "output_document");
    if (j.contains("started_at")) s.started_at = j["started_at"].get<std::string>();
    if (j.contains("ended_at")) s.ended_at = j["ended_at"].get<std::string>();
    return s;
}

RunRecord run_record_from_json(const json& j) {
    RunRecord r;
    r.run_id = require_string(j, "run_id");
    r.persona_id = require_string(j, "persona_id");
    r.topic_id = require_string(j, "topic_id");
    r.model_kind = model_kind_from_string(require_string(j, "model_kind"));
    r.seed = require_field(j, "seed").get<std::uint64_t>();
    r.failed = require_string(j, "status") == "failed";
    if (r.failed) {
        r.failed_stage = require_string(j, "failed_stage");
        r.error = require_string(j, "error");
    }
    for (const auto& item : require_field(j, "stages")) {
        r.stages.push_back(stage_record_from_json(item));
    }
    return r;
}

CriterionScores criterion_scores_from_json(const json& j) {
    CriterionScores s;
    s.structure = require_score(j, "structure");
    s.depth = require_score(j, "depth");
    s.support = require_score(j, "support");
    s.rhetoric = require_score(j, "rhetoric");
    return s;
}

ArbiterVerdict verdict_from_json(const json& j) {
    ArbiterVerdict v;
    v.topic_id = require_string(j, "topic_id");
    v.persona_id = require_string(j, "persona_id");
    v.scores_a = criterion_scores_from_json(require_field(j, "scores_a"));
    v.scores_b = criterion_scores_from_json(require_field(j, "scores_b"));
    v.final_a = require_number(j, "final_a");
    v.final_b = require_number(j, "final_b");
    v.winner = winner_from_string(require_string(j, "winner"));
    v.justification = require_string(j, "justification");
    return v;
}

ScoreRow score_row_from_json(const json& j) {
    ScoreRow r;
    r.topic_id = require_string(j, "topic_id");
    r.topic_label = require_string(j, "topic_label");
    r.persona_id = require_string(j, "persona_id");
    r.model_kind = model_kind_from_string(require_string(j, "model_kind"));
    r.final_score = require_number(j, "final_score");
    r.criteria = criterion_scores_from_json(require_field(j, "criteria"));
    return r;
}

ScorecardReport scorecard_from_json(const json& j) {
    ScorecardReport r;
    for (const auto& item : require_field(j, "rows")) {
        r.rows.push_back(score_row_from_json(item));
    }
    const json& overall = require_field(j, "overall_avg");
    r.overall_avg.simple = require_number(overall, "simple");
    r.overall_avg.complex_ = require_number(overall, "complex");
    for (const auto& [persona, avg] : require_field(j, "per_persona_avg").items()) {
        r.per_persona_avg[persona] =
            ModelAverages{require_number(avg, "simple"), require_number(avg, "complex")};
    }
    return r;
}

// ---------------------------------------------------------------------------
// Invariant checks

void validate(const PersonaProfile& p) {
    if (p.persona_id.empty()) throw SchemaError("persona_id", "must be non-empty");
}

void validate(const DebateTopic& t) {
    if (t.topic_id.empty()) throw SchemaError("topic_id", "must be non-empty");
    if (t.question.empty()) throw SchemaError("question", "must be non-empty");
}

void validate(const StrategicBrief& b) {
    if (b.core_principle.empty()) throw SchemaError("core_principle", "must be non-empty");
    if (b.historical_precedent.empty())
        throw SchemaError("historical_precedent", "must be non-empty");
    if (b.ideological_ally.empty())
        throw SchemaError("ideological_ally", "must be non-empty");
}

void validate(const ResearchDossier& d, const std::string& expected_persona) {
    double last_sim[3] = {2.0, 2.0, 2.0};  // per query_origin, descending check
    for (const auto& p : d.passages) {
        if (p.persona_id != expected_persona) {
            throw SchemaError("persona_id", "passage from '" + p.persona_id +
                                                "' leaked into dossier for '" +
                                                expected_persona + "'");
        }
        if (p.similarity < -1.0 - kCompositeTol || p.similarity > 1.0 + kCompositeTol) {
            throw RangeError("passage similarity outside [-1,1]");
        }
        auto& last = last_sim[static_cast<int>(p.query_origin)];
        if (p.similarity > last + kCompositeTol) {
            throw SchemaError("passages", "not sorted by descending similarity within " +
                                              to_string(p.query_origin));
        }
        last = p.similarity;
    }
}

void validate(const CandidateSet& s) {
    if (s.mode == ThinkMode::Single) {
        if (s.candidates.size() != 1) {
            throw WrongArityError("single mode requires exactly 1 candidate, got " +
                                  std::to_string(s.candidates.size()));
        }
        if (s.candidates[0].stance != Stance::Single) {
            throw SchemaError("stance", "single-mode candidate must have stance 'single'");
        }
    } else {
        if (s.candidates.size() != 3) {
            throw WrongArityError("triple mode requires exactly 3 candidates, got " +
                                  std::to_string(s.candidates.size()));
        }
        bool seen[3] = {false, false, false};
        for (const auto& c : s.candidates) {
            switch (c.stance) {
                case Stance::Orthodox: seen[0] = true; break;
                case Stance::Unorthodox: seen[1] = true; break;
                case Stance::Pragmatic: seen[2] = true; break;
                case Stance::Single:
                    throw SchemaError("stance", "stance 'single' only valid in simple runs");
            }
        }
        if (!(seen[0] && seen[1] && seen[2])) {
            throw SchemaError("stance",
                              "triple mode requires orthodox, unorthodox and pragmatic");
        }
    }
    for (const auto& c : s.candidates) {
        if (c.thesis.empty()) throw SchemaError("thesis", "must be non-empty");
        if (c.body.empty()) throw SchemaError("body", "must be non-empty");
    }
}

void validate(const ValidationReport& r) {
    if (r.per_candidate.empty()) throw WrongArityError("validation report has no candidates");
    double best = -1.0;
    for (const auto& s : r.per_candidate) {
        const double expected =
            0.60 * s.principles + 0.25 * s.personality + 0.15 * s.strength;
        if (std::fabs(s.composite - expected) > kCompositeTol) {
            throw SchemaError("composite", "does not match 60/25/15 weighting");
        }
        if (s.composite < -kCompositeTol || s.composite > 10.0 + kCompositeTol) {
            throw RangeError("composite outside [0,10]");
        }
        best = std::max(best, s.composite);
    }
    const auto winner = std::find_if(
        r.per_candidate.begin(), r.per_candidate.end(),
        [&](const CandidateScore& s) { return s.stance == r.winner_stance; });
    if (winner == r.per_candidate.end()) {
        throw SchemaError("winner_stance", "winner not among scored candidates");
    }
    if (winner->composite < best - kCompositeTol) {
        throw SchemaError("winner_stance", "winner does not have maximal composite");
    }
    if (r.winner_text.empty()) throw SchemaError("winner_text", "must be non-empty");
}

void validate(const VulnerabilityReport& r) {
    if (r.attack_vectors.empty()) throw NoVectorsError("no attack vectors reported");
    int min_def = 11;
    for (const auto& v : r.attack_vectors) min_def = std::min(min_def, v.defensibility);
    const bool critical_is_min = std::any_of(
        r.attack_vectors.begin(), r.attack_vectors.end(), [&](const AttackVector& v) {
            return v.defensibility == min_def && v.description == r.critical.description;
        });
    if (!critical_is_min) {
        throw SchemaError("critical",
                          "critical vulnerability is not a minimal-defensibility vector");
    }
}

void validate(const StrategySet& s) {
    if (s.rebuttal.empty()) throw SchemaError("rebuttal", "must be non-empty");
    if (s.reframe_minimize.empty()) throw SchemaError("reframe_minimize", "must be non-empty");
    if (s.concede_outweigh.empty()) throw SchemaError("concede_outweigh", "must be non-empty");
}

void validate(const FinalArgument& f) {
    if (f.text.empty()) throw SchemaError("text", "must be non-empty");
    if (f.justification.empty()) throw SchemaError("justification", "must be non-empty");
}

void validate(const PolishedStatement& s) {
    if (s.text.empty()) throw SchemaError("text", "must be non-empty");
}

void validate(const ArbiterVerdict& v) {
    const double expected_a = 2.5 * v.scores_a.sum();
    const double expected_b = 2.5 * v.scores_b.sum();
    if (std::fabs(v.final_a - expected_a) > kCompositeTol ||
        std::fabs(v.final_b - expected_b) > kCompositeTol) {
        throw SchemaError("final", "final score does not equal 2.5 x criteria sum");
    }
    Winner expected = Winner::Tie;
    if (v.final_a > v.final_b) expected = Winner::A;
    if (v.final_b > v.final_a) expected = Winner::B;
    if (v.winner != expected) {
        throw SchemaError("winner", "winner inconsistent with final scores");
    }
}

std::string canonical_run_text(const RunRecord& r, bool with_timestamps) {
    return canonical_dump(to_json(r, with_timestamps));
}

bool records_equal(const RunRecord& a, const RunRecord& b) {
    return canonical_run_text(a, false) == canonical_run_text(b, false);
}

}  // namespace rhetor
