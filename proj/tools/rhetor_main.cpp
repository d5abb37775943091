// rhetor - persona debate pipelines over a persona-filtered retrieval store,
// with a judging harness and scorecard reports.
//
// Exit codes: 0 success, 1 pipeline/backend failure, 2 usage or config error,
// 3 incomplete data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rhetor/errors.hpp"
#include "rhetor/eval.hpp"
#include "rhetor/pipeline.hpp"

namespace fs = std::filesystem;
using namespace rhetor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipelineFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIncomplete = 3;

struct GlobalOptions {
    std::string prompts = "fixtures/prompts.yaml";
    std::string store = "store.jsonl";
    std::string backend = "mock";
    std::string base_url;
    std::string model = "default";
    std::string api_key_env = "RHETOR_API_KEY";
    std::string panel = "fixtures/panel.json";
    std::string out = "runs";
    std::uint64_t seed = 0;
    int jobs = 1;
};

BackendConfig backend_config(const GlobalOptions& opt) {
    BackendConfig config;
    if (opt.backend == "mock") {
        config.kind = BackendKind::Mock;
    } else if (opt.backend == "remote") {
        config.kind = BackendKind::Remote;
    } else {
        throw ConfigError("unknown backend '" + opt.backend + "' (mock|remote)");
    }
    config.base_url = opt.base_url;
    config.model_name = opt.model;
    config.api_key_env = opt.api_key_env;
    return config;
}

VectorStore open_store(const GlobalOptions& opt) {
    if (!fs::exists(opt.store)) {
        throw ConfigError("store file not found: " + opt.store +
                          " (run 'ingest' first)");
    }
    return VectorStore::load(opt.store);
}

std::vector<std::string> rivals_of(const Panel& panel, const std::string& persona_id) {
    std::vector<std::string> rivals;
    for (const auto& p : panel.personas) {
        if (p.persona_id != persona_id) rivals.push_back(p.persona_id);
    }
    if (rivals.empty()) rivals.push_back("devils-advocate");
    return rivals;
}

PolishedStatement final_statement(const RunRecord& record) {
    if (record.failed || record.stages.empty()) {
        throw ConfigError("run " + record.run_id + " did not complete");
    }
    const StageRecord& last = record.stages.back();
    if (last.stage_name != "communicator") {
        throw ConfigError("run " + record.run_id + " does not end at the communicator");
    }
    return statement_from_json(last.output_document.at("doc"));
}

// ---------------------------------------------------------------------------

int cmd_ingest(const GlobalOptions& opt, const std::string& corpus_dir,
               std::string manifest_path, std::size_t chunk_size, std::size_t overlap) {
    if (manifest_path.empty()) manifest_path = (fs::path(corpus_dir) / "manifest.json").string();
    std::ifstream manifest_in(manifest_path);
    if (!manifest_in) throw ConfigError("cannot open manifest: " + manifest_path);
    json manifest;
    try {
        manifest_in >> manifest;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("bad manifest: ") + e.what());
    }

    VectorStore store = fs::exists(opt.store)
                            ? VectorStore::load(opt.store)
                            : VectorStore(EmbedderConfig{},
                                          ChunkingConfig{chunk_size, overlap});

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(corpus_dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename() == fs::path(manifest_path).filename()) continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::map<std::string, std::size_t> per_persona;
    std::size_t documents = 0;
    for (const auto& file : files) {
        const std::string name = file.filename().string();
        if (!manifest.contains(name)) {
            std::cerr << "error: no manifest entry for file: " << name << "\n";
            return kExitUsage;
        }
        const std::string persona = manifest[name].get<std::string>();
        std::ifstream in(file);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        per_persona[persona] += store.ingest(text, persona, name);
        ++documents;
    }

    store.save(opt.store);
    std::cout << documents << " documents ingested into " << opt.store << "\n";
    for (const auto& [persona, count] : per_persona) {
        std::cout << "  " << persona << ": " << count << " chunks\n";
    }
    return kExitOk;
}

int cmd_run(const GlobalOptions& opt, const std::string& kind_name,
            const std::string& persona_id, const std::string& topic_id) {
    const ModelKind kind = model_kind_from_string(kind_name);
    const Panel panel = load_panel(opt.panel);
    const PersonaProfile* persona = panel.find_persona(persona_id);
    if (persona == nullptr) throw ConfigError("unknown persona: " + persona_id);
    const DebateTopic* topic = panel.find_topic(topic_id);
    if (topic == nullptr) throw ConfigError("unknown topic: " + topic_id);

    const PromptCatalog catalog = load_catalog(opt.prompts);
    const VectorStore store = open_store(opt);
    Gateway gateway(backend_config(opt));

    AgentContext ctx;
    ctx.persona = *persona;
    ctx.topic = *topic;
    ctx.gateway = &gateway;
    ctx.catalog = &catalog;
    ctx.seed = run_seed(opt.seed, topic_id, persona_id, kind);

    RunOptions run_options;
    run_options.rival_personas = rivals_of(panel, persona_id);

    const RunRecord record =
        run_pipeline(PipelineDefinition::for_kind(kind), ctx, store, run_options);
    const fs::path path = persist_run(record, opt.out);
    if (record.failed) {
        std::cerr << "run failed at stage '" << record.failed_stage
                  << "': " << record.error << "\n";
        std::cerr << "partial record: " << path.string() << "\n";
        return kExitPipelineFailure;
    }
    std::cout << path.string() << "\n\n" << final_statement(record).text << "\n";
    return kExitOk;
}

int cmd_experiment(const GlobalOptions& opt) {
    const Panel panel = load_panel(opt.panel);
    const PromptCatalog catalog = load_catalog(opt.prompts);
    const VectorStore store = open_store(opt);
    Gateway gateway(backend_config(opt));

    ExperimentOptions options;
    options.master_seed = opt.seed;
    options.jobs = opt.jobs;

    const auto records = run_experiment(panel, store, gateway, catalog, options);
    std::size_t failures = 0;
    for (const auto& record : records) {
        persist_run(record, opt.out);
        if (record.failed) {
            ++failures;
            std::cout << record.run_id << "  FAILED at " << record.failed_stage << "\n";
        } else {
            std::cout << record.run_id << "  ok\n";
        }
    }
    std::cout << records.size() << " runs (" << records.size() / 2 << " simple + "
              << records.size() / 2 << " complex), " << failures << " failed\n";
    return failures == 0 ? kExitOk : kExitPipelineFailure;
}

int cmd_compare(const GlobalOptions& opt, bool both_orders) {
    const Panel panel = load_panel(opt.panel);
    const PromptCatalog catalog = load_catalog(opt.prompts);
    Gateway gateway(backend_config(opt));

    // Index completed runs by (topic, persona, kind).
    std::map<std::tuple<std::string, std::string, std::string>, RunRecord> runs;
    if (fs::exists(opt.out)) {
        for (const auto& entry : fs::directory_iterator(opt.out)) {
            const fs::path file = entry.path() / "run.json";
            if (!fs::exists(file)) continue;
            RunRecord record = load_run(file);
            if (record.failed) continue;
            runs[{record.topic_id, record.persona_id, to_string(record.model_kind)}] =
                std::move(record);
        }
    }

    std::vector<std::pair<std::string, std::string>> missing;
    std::vector<ComparisonCell> cells;
    for (const auto& topic : panel.topics) {
        for (const auto& persona : panel.personas) {
            const auto simple_it =
                runs.find({topic.topic_id, persona.persona_id, "simple"});
            const auto complex_it =
                runs.find({topic.topic_id, persona.persona_id, "complex"});
            if (simple_it == runs.end() || complex_it == runs.end()) {
                missing.emplace_back(topic.topic_id, persona.persona_id);
                continue;
            }

            AgentContext ctx;
            ctx.persona = persona;
            ctx.topic = topic;
            ctx.gateway = &gateway;
            ctx.catalog = &catalog;
            ctx.seed = derive_seed(opt.seed, {"arbiter", topic.topic_id,
                                              persona.persona_id});

            const PolishedStatement a = final_statement(simple_it->second);
            const PolishedStatement b = final_statement(complex_it->second);

            ArbiterVerdict verdict;
            if (both_orders) {
                const BothOrdersResult result = arbitrate_both_orders(ctx, a, b);
                verdict = result.forward;
                if (!result.consistent) {
                    std::cerr << "warning: order-dependent verdict for (" << topic.topic_id
                              << ", " << persona.persona_id << ")\n";
                }
            } else {
                verdict = arbitrate(ctx, a, b);
            }
            cells.push_back(ComparisonCell{topic.topic_id, panel.label_for(topic.topic_id),
                                           persona.persona_id, verdict});
            std::cout << topic.topic_id << " " << persona.persona_id << ": "
                      << format_real(verdict.final_a) << " vs "
                      << format_real(verdict.final_b) << " -> "
                      << to_string(verdict.winner) << "\n";
        }
    }
    if (!missing.empty()) throw IncompleteScorecardError(std::move(missing));

    json out = json::array();
    for (const auto& cell : cells) {
        out.push_back(json{{"topic_id", cell.topic_id},
                           {"topic_label", cell.topic_label},
                           {"persona_id", cell.persona_id},
                           {"verdict", to_json(cell.verdict)}});
    }
    fs::create_directories(opt.out);
    const fs::path path = fs::path(opt.out) / "verdicts.json";
    std::ofstream file(path, std::ios::trunc);
    file << canonical_dump(json{{"cells", out}}) << "\n";
    std::cout << cells.size() << " verdicts written to " << path.string() << "\n";
    return kExitOk;
}

int cmd_report(const GlobalOptions& opt, const std::string& from_fixture,
               const std::string& report_path, const std::string& format_name) {
    ScorecardReport report;
    if (!from_fixture.empty()) {
        std::ifstream in(from_fixture);
        if (!in) throw ConfigError("cannot open fixture: " + from_fixture);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        report = parse_scorecard_csv(text);
    } else {
        const fs::path path = fs::path(opt.out) / "verdicts.json";
        std::ifstream in(path);
        if (!in) {
            throw IncompleteScorecardError({{"<no verdicts file>", path.string()}});
        }
        json parsed;
        in >> parsed;
        std::vector<ComparisonCell> cells;
        for (const auto& item : parsed.at("cells")) {
            cells.push_back(ComparisonCell{item.at("topic_id").get<std::string>(),
                                           item.at("topic_label").get<std::string>(),
                                           item.at("persona_id").get<std::string>(),
                                           verdict_from_json(item.at("verdict"))});
        }
        report = aggregate(cells, load_panel(opt.panel));
    }

    const ReportFormat format =
        format_name == "csv" ? ReportFormat::Delimited : ReportFormat::TextTable;
    const std::string rendered = render_report(report, format);
    std::cout << rendered;
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::trunc);
        if (!out) throw ConfigError("cannot write report: " + report_path);
        out << rendered;
        std::cout << "report written to " << report_path << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"persona debate pipelines with retrieval grounding and a judging harness"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions opt;
    app.add_option("--prompts", opt.prompts, "prompt catalog path")
        ->envname("PIPELINE_PROMPTS");
    app.add_option("--store", opt.store, "vector store file");
    app.add_option("--backend", opt.backend, "mock|remote");
    app.add_option("--base-url", opt.base_url, "remote backend base URL");
    app.add_option("--model", opt.model, "model name for the backend");
    app.add_option("--api-key-env", opt.api_key_env,
                   "environment variable holding the API key");
    app.add_option("--panel", opt.panel, "panel file (personas + topics)");
    app.add_option("--seed", opt.seed, "master seed; all randomness flows from it");
    app.add_option("--out", opt.out, "run output directory");
    app.add_option("--jobs", opt.jobs, "parallel runs for the experiment");

    auto* ingest = app.add_subcommand("ingest", "chunk + embed a corpus directory");
    std::string corpus_dir, manifest_path;
    std::size_t chunk_size = 1000, overlap = 200;
    ingest->add_option("--corpus", corpus_dir, "directory of plain-text files")
        ->required();
    ingest->add_option("--manifest", manifest_path,
                       "filename -> persona_id map (default <corpus>/manifest.json)");
    ingest->add_option("--chunk-size", chunk_size, "chunk size in characters");
    ingest->add_option("--overlap", overlap, "chunk overlap in characters");

    auto* run = app.add_subcommand("run", "execute one pipeline");
    std::string kind_name, persona_id, topic_id;
    run->add_option("--kind", kind_name, "simple|complex")->required();
    run->add_option("--persona", persona_id, "persona id")->required();
    run->add_option("--topic", topic_id, "topic id")->required();

    app.add_subcommand("experiment",
                       "run every (topic, persona) cell through both pipelines");

    auto* compare = app.add_subcommand("compare", "judge simple vs complex per cell");
    bool both_orders = false;
    compare->add_flag("--both-orders", both_orders,
                      "judge both label orders and flag disagreement");

    auto* report = app.add_subcommand("report", "render the scorecard");
    std::string from_fixture, report_path, format_name = "table";
    report->add_option("--from-fixture", from_fixture,
                       "aggregate a delimited scorecard file instead of verdicts");
    report->add_option("--report", report_path, "also write the report to this file");
    report->add_option("--format", format_name, "table|csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand("ingest")) {
            return cmd_ingest(opt, corpus_dir, manifest_path, chunk_size, overlap);
        }
        if (app.got_subcommand("run")) {
            return cmd_run(opt, kind_name, persona_id, topic_id);
        }
        if (app.got_subcommand("experiment")) {
            return cmd_experiment(opt);
        }
        if (app.got_subcommand("compare")) {
            return cmd_compare(opt, both_orders);
        }
        if (app.got_subcommand("report")) {
            return cmd_report(opt, from_fixture, report_path, format_name);
        }
    } catch (const IncompleteScorecardError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIncomplete;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const MissingPromptError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const AuthConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipelineFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipelineFailure;
    }
    return kExitUsage;
}
