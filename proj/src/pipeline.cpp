#include "rhetor/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <thread>

#include "rhetor/errors.hpp"

namespace rhetor {

PipelineDefinition PipelineDefinition::simple() {
    return {ModelKind::Simple, {"selector", "researcher", "thinker", "communicator"}};
}

PipelineDefinition PipelineDefinition::complex() {
    return {ModelKind::Complex,
            {"selector", "researcher", "thinker", "validator", "red_team", "strategist",
             "final_judge", "communicator"}};
}

PipelineDefinition PipelineDefinition::for_kind(ModelKind kind) {
    return kind == ModelKind::Simple ? simple() : complex();
}

namespace {

std::string now_iso8601() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()) % 1000;
    const std::time_t secs = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
    return out;
}

json make_envelope(const std::string& stage, json doc, json carry) {
    return json{{"stage", stage}, {"doc", std::move(doc)}, {"carry", std::move(carry)}};
}

json run_inputs_document(const AgentContext& ctx, ModelKind kind) {
    return json{{"model_kind", to_string(kind)},
                {"persona_id", ctx.persona.persona_id},
                {"topic_id", ctx.topic.topic_id},
                {"seed", ctx.seed}};
}

// Each stage sees exactly the previous stage's output envelope; whatever a
// later stage still needs travels in the envelope's carry block. That keeps
// the flow strictly one-directional and lets the digest chain prove it.
json execute_stage(const std::string& stage, const json& prev, const AgentContext& ctx,
                   const VectorStore& store, const RunOptions& options,
                   ModelKind kind) {
    if (stage == "selector") {
        const StrategicBrief brief = select_strategy(ctx);
        return make_envelope(stage, to_json(brief), json::object());
    }
    if (stage == "researcher") {
        const StrategicBrief brief = brief_from_json(prev.at("doc"));
        const ResearchDossier dossier =
            research(brief, store, ctx.persona.persona_id, options.top_k);
        return make_envelope(stage, to_json(dossier),
                             json{{"brief", to_json(brief)}});
    }
    if (stage == "thinker") {
        const StrategicBrief brief = brief_from_json(prev.at("carry").at("brief"));
        const ResearchDossier dossier = dossier_from_json(prev.at("doc"));
        const ThinkMode mode =
            kind == ModelKind::Simple ? ThinkMode::Single : ThinkMode::Triple;
        const CandidateSet set = think(ctx, brief, dossier, mode);
        json carry = json::object();
        if (mode == ThinkMode::Single) {
            carry["argument"] = set.candidates.front().full_text();
        }
        return make_envelope(stage, to_json(set), std::move(carry));
    }
    if (stage == "validator") {
        const CandidateSet set = candidate_set_from_json(prev.at("doc"));
        const ValidationReport report = validate_candidates(ctx, set);
        return make_envelope(stage, to_json(report), json::object());
    }
    if (stage == "red_team") {
        const ValidationReport report = validation_report_from_json(prev.at("doc"));
        const VulnerabilityReport vulnerability =
            red_team(ctx, report.winner_text, options.rival_personas);
        return make_envelope(stage, to_json(vulnerability),
                             json{{"argument", report.winner_text}});
    }
    if (stage == "strategist") {
        const VulnerabilityReport vulnerability =
            vulnerability_report_from_json(prev.at("doc"));
        const std::string argument = prev.at("carry").at("argument").get<std::string>();
        const StrategySet strategies = strategize(ctx, argument, vulnerability.critical);
        return make_envelope(stage, to_json(strategies), json{{"argument", argument}});
    }
    if (stage == "final_judge") {
        const StrategySet strategies = strategy_set_from_json(prev.at("doc"));
        const std::string argument = prev.at("carry").at("argument").get<std::string>();
        const FinalArgument final_argument = final_judge(ctx, argument, strategies);
        return make_envelope(stage, to_json(final_argument), json::object());
    }
    if (stage == "communicator") {
        std::string argument;
        if (kind == ModelKind::Simple) {
            argument = prev.at("carry").at("argument").get<std::string>();
        } else {
            argument = final_argument_from_json(prev.at("doc")).text;
        }
        const PolishedStatement statement = communicate(ctx, argument, kind);
        return make_envelope(stage, to_json(statement), json::object());
    }
    throw ConfigError("unknown pipeline stage: " + stage);
}

}  // namespace

RunRecord run_pipeline(const PipelineDefinition& definition, const AgentContext& ctx,
                       const VectorStore& store, const RunOptions& options) {
    RunRecord record;
    record.persona_id = ctx.persona.persona_id;
    record.topic_id = ctx.topic.topic_id;
    record.model_kind = definition.model_kind;
    record.seed = ctx.seed;
    record.run_id =
        make_run_id(ctx.topic.topic_id, ctx.persona.persona_id, definition.model_kind,
                    ctx.seed);

    std::string prev_digest = digest(run_inputs_document(ctx, definition.model_kind));
    json prev_envelope;
    for (const std::string& stage : definition.stages) {
        StageRecord sr;
        sr.stage_name = stage;
        sr.input_digest = prev_digest;
        sr.started_at = now_iso8601();
        json envelope;
        try {
            envelope =
                execute_stage(stage, prev_envelope, ctx, store, options,
                              definition.model_kind);
        } catch (const std::exception& e) {
            record.failed = true;
            record.failed_stage = stage;
            record.error = e.what();
            break;
        }
        sr.ended_at = now_iso8601();
        sr.output_document = envelope;
        record.stages.push_back(std::move(sr));
        prev_digest = digest(envelope);
        prev_envelope = std::move(envelope);
    }
    return record;
}

std::filesystem::path persist_run(const RunRecord& record,
                                  const std::filesystem::path& root_dir) {
    const auto dir = root_dir / record.run_id;
    std::filesystem::create_directories(dir);
    const auto path = dir / "run.json";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write run file: " + path.string());
    out << canonical_run_text(record, true) << '\n';
    if (!out.good()) throw ConfigError("failed writing run file: " + path.string());
    return path;
}

RunRecord load_run(const std::filesystem::path& run_json) {
    std::ifstream in(run_json);
    if (!in) throw ConfigError("cannot open run file: " + run_json.string());
    json parsed;
    try {
        in >> parsed;
    } catch (const json::parse_error& e) {
        throw ConfigError("bad run file " + run_json.string() + ": " + e.what());
    }
    return run_record_from_json(parsed);
}

void check_run_chain(const RunRecord& record) {
    const auto definition = PipelineDefinition::for_kind(record.model_kind);
    if (record.failed) {
        if (record.stages.size() >= definition.stages.size()) {
            throw SchemaError("stages", "failed run has a full stage list");
        }
    } else if (record.stages.size() != definition.stages.size()) {
        throw SchemaError("stages",
                          "expected " + std::to_string(definition.stages.size()) +
                              " stages, found " + std::to_string(record.stages.size()));
    }
    for (std::size_t k = 0; k < record.stages.size(); ++k) {
        if (record.stages[k].stage_name != definition.stages[k]) {
            throw SchemaError("stage_name", "stage " + std::to_string(k) + " is '" +
                                                record.stages[k].stage_name +
                                                "', expected '" + definition.stages[k] +
                                                "'");
        }
        if (k > 0) {
            const std::string expected = digest(record.stages[k - 1].output_document);
            if (record.stages[k].input_digest != expected) {
                throw SchemaError("input_digest",
                                  "digest chain broken at stage " + std::to_string(k));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Panel

const PersonaProfile* Panel::find_persona(const std::string& id) const {
    for (const auto& p : personas) {
        if (p.persona_id == id) return &p;
    }
    return nullptr;
}

const DebateTopic* Panel::find_topic(const std::string& id) const {
    for (const auto& t : topics) {
        if (t.topic_id == id) return &t;
    }
    return nullptr;
}

std::string Panel::label_for(const std::string& topic_id) const {
    auto it = topic_labels.find(topic_id);
    return it == topic_labels.end() ? topic_id : it->second;
}

Panel load_panel(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open panel file: " + path.string());
    json parsed;
    try {
        in >> parsed;
    } catch (const json::parse_error& e) {
        throw ConfigError("bad panel file " + path.string() + ": " + e.what());
    }

    Panel panel;
    for (const auto& item : parsed.at("personas")) {
        PersonaProfile p = persona_from_json(item);
        validate(p);
        if (panel.find_persona(p.persona_id) != nullptr) {
            throw ConfigError("duplicate persona_id in panel: " + p.persona_id);
        }
        panel.personas.push_back(std::move(p));
    }
    for (const auto& item : parsed.at("topics")) {
        DebateTopic t = topic_from_json(item);
        validate(t);
        if (panel.find_topic(t.topic_id) != nullptr) {
            throw ConfigError("duplicate topic_id in panel: " + t.topic_id);
        }
        if (item.contains("label")) {
            panel.topic_labels[t.topic_id] = item["label"].get<std::string>();
        }
        panel.topics.push_back(std::move(t));
    }
    if (panel.personas.empty() || panel.topics.empty()) {
        throw ConfigError("panel needs at least one persona and one topic");
    }
    return panel;
}

std::uint64_t run_seed(std::uint64_t master_seed, const std::string& topic_id,
                       const std::string& persona_id, ModelKind kind) {
    return derive_seed(master_seed, {topic_id, persona_id, to_string(kind)});
}

std::string make_run_id(const std::string& topic_id, const std::string& persona_id,
                        ModelKind kind, std::uint64_t seed) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(seed));
    return topic_id + "-" + persona_id + "-" + to_string(kind) + "-" + hex;
}

std::vector<RunRecord> run_experiment(const Panel& panel, const VectorStore& store,
                                      Gateway& gateway, const PromptCatalog& catalog,
                                      const ExperimentOptions& options) {
    struct Cell {
        const DebateTopic* topic;
        const PersonaProfile* persona;
        ModelKind kind;
    };
    std::vector<Cell> cells;
    for (const auto& topic : panel.topics) {
        for (const auto& persona : panel.personas) {
            cells.push_back({&topic, &persona, ModelKind::Simple});
            cells.push_back({&topic, &persona, ModelKind::Complex});
        }
    }

    std::vector<RunRecord> records(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& cell = cells[i];

            AgentContext ctx;
            ctx.persona = *cell.persona;
            ctx.topic = *cell.topic;
            ctx.gateway = &gateway;
            ctx.catalog = &catalog;
            ctx.seed = run_seed(options.master_seed, cell.topic->topic_id,
                                cell.persona->persona_id, cell.kind);

            RunOptions run_options;
            run_options.top_k = options.top_k;
            for (const auto& other : panel.personas) {
                if (other.persona_id != cell.persona->persona_id) {
                    run_options.rival_personas.push_back(other.persona_id);
                }
            }
            if (run_options.rival_personas.empty()) {
                // 1x1 panels still need an adversary for the red team.
                run_options.rival_personas.push_back("devils-advocate");
            }

            try {
                records[i] = run_pipeline(PipelineDefinition::for_kind(cell.kind), ctx,
                                          store, run_options);
            } catch (const std::exception& e) {
                // stage errors are already captured inside run_pipeline; this
                // records anything thrown before the first stage
                RunRecord failed;
                failed.persona_id = cell.persona->persona_id;
                failed.topic_id = cell.topic->topic_id;
                failed.model_kind = cell.kind;
                failed.seed = ctx.seed;
                failed.run_id = make_run_id(failed.topic_id, failed.persona_id,
                                            cell.kind, ctx.seed);
                failed.failed = true;
                failed.failed_stage = "setup";
                failed.error = e.what();
                records[i] = std::move(failed);
            }
        }
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return records;
}

}  // namespace rhetor
