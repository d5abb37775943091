#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rhetor/agents.hpp"
#include "rhetor/domain.hpp"

// Wires the agents into the two fixed pipelines and persists full run
// transcripts. A single run is strictly sequential; distinct runs may execute
// in parallel (the store is read-only during experiments).

namespace rhetor {

struct PipelineDefinition {
    ModelKind model_kind = ModelKind::Simple;
    std::vector<std::string> stages;

    static PipelineDefinition simple();    // 4 stages
    static PipelineDefinition complex();   // 8 stages
    static PipelineDefinition for_kind(ModelKind kind);
};

struct RunOptions {
    std::size_t top_k = 4;
    std::vector<std::string> rival_personas;  // defaults to empty -> red team
                                              // uses the other panel members
};

/// Execute one pipeline. Stage errors abort the run; the returned record then
/// carries the failure marker and every stage completed before it.
RunRecord run_pipeline(const PipelineDefinition& definition, const AgentContext& ctx,
                       const VectorStore& store, const RunOptions& options = {});

/// Write <root>/<run_id>/run.json in canonical form; returns the file path.
std::filesystem::path persist_run(const RunRecord& record,
                                  const std::filesystem::path& root_dir);
RunRecord load_run(const std::filesystem::path& run_json);

/// Check the record's structural invariants: stage names match the
/// definition for its kind, and every stage's input digest equals the digest
/// of the previous stage's output document. Throws SchemaError on violation.
void check_run_chain(const RunRecord& record);

struct Panel {
    std::vector<PersonaProfile> personas;
    std::vector<DebateTopic> topics;
    std::map<std::string, std::string> topic_labels;  // topic_id -> display label

    const PersonaProfile* find_persona(const std::string& id) const;
    const DebateTopic* find_topic(const std::string& id) const;
    std::string label_for(const std::string& topic_id) const;
};

/// Panel file: {"personas": [...], "topics": [{"topic_id", "question",
/// "label"?}, ...]}. Duplicate or empty persona_ids are rejected.
Panel load_panel(const std::filesystem::path& path);

/// Seed for one run, derived so every (topic, persona, kind) cell is
/// independent yet reproducible from the master seed.
std::uint64_t run_seed(std::uint64_t master_seed, const std::string& topic_id,
                       const std::string& persona_id, ModelKind kind);

std::string make_run_id(const std::string& topic_id, const std::string& persona_id,
                        ModelKind kind, std::uint64_t seed);

struct ExperimentOptions {
    std::uint64_t master_seed = 0;
    int jobs = 1;
    std::size_t top_k = 4;
};

/// One simple and one complex run per (topic, persona) cell. Per-run failures
/// are recorded in the returned records; the experiment itself keeps going.
std::vector<RunRecord> run_experiment(const Panel& panel, const VectorStore& store,
                                      Gateway& gateway, const PromptCatalog& catalog,
                                      const ExperimentOptions& options);

}  // namespace rhetor
