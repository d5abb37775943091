#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rhetor/domain.hpp"
#include "rhetor/pipeline.hpp"

// End-to-end checks of the installed command surface: spawns the real binary
// and asserts on exit codes and output. Exit codes are a stable contract:
// 0 ok, 1 pipeline failure, 2 usage/config, 3 incomplete data.

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const fs::path& scratch_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "rhetor_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = scratch_dir() / ("out" + std::to_string(counter) + ".txt");
    const fs::path err = scratch_dir() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string command = "cd " + scratch_dir().string() + " && " +
                                std::string(RHETOR_CLI_BIN) + " " + args + " > " +
                                out.string() + " 2> " + err.string();
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

std::string fixtures() { return RHETOR_FIXTURES_DIR; }

std::string base_flags() {
    return "--prompts " + fixtures() + "/prompts.yaml --panel " + fixtures() +
           "/panel.json --store store.jsonl --seed 42";
}

}  // namespace

TEST_CASE("cli end-to-end flow" * doctest::test_suite("cli")) {
    // ordered scenario: ingest -> run -> experiment -> compare -> report

    // --- ingest
    CliResult ingest =
        run_cli(base_flags() + " ingest --corpus " + fixtures() + "/corpus");
    REQUIRE(ingest.exit_code == 0);
    CHECK(ingest.out.find("6 documents ingested") != std::string::npos);
    CHECK(ingest.out.find("hamilton:") != std::string::npos);

    // --- unknown persona is a usage error
    CliResult unknown =
        run_cli(base_flags() + " run --kind simple --persona burr --topic 1");
    CHECK(unknown.exit_code == 2);
    CHECK(unknown.err.find("unknown persona") != std::string::npos);

    // --- single complex run: 8 stages persisted
    CliResult run1 =
        run_cli(base_flags() + " run --kind complex --persona hamilton --topic 1");
    REQUIRE(run1.exit_code == 0);
    const std::string first_line = run1.out.substr(0, run1.out.find('\n'));
    const fs::path run_json = scratch_dir() / first_line;
    REQUIRE(fs::exists(run_json));
    const rhetor::RunRecord record = rhetor::load_run(run_json);
    CHECK(record.stages.size() == 8);
    CHECK(record.model_kind == rhetor::ModelKind::Complex);

    // --- replay: same seed, same record modulo timestamps
    const std::string before = rhetor::canonical_run_text(record, false);
    CliResult run2 =
        run_cli(base_flags() + " run --kind complex --persona hamilton --topic 1");
    REQUIRE(run2.exit_code == 0);
    CHECK(rhetor::canonical_run_text(rhetor::load_run(run_json), false) == before);

    // --- compare before the experiment is incomplete data
    CliResult early = run_cli(base_flags() + " compare");
    CHECK(early.exit_code == 3);

    // --- full experiment
    CliResult experiment = run_cli(base_flags() + " experiment --jobs 2");
    REQUIRE(experiment.exit_code == 0);
    CHECK(experiment.out.find("18 runs (9 simple + 9 complex), 0 failed") !=
          std::string::npos);

    // --- compare yields nine verdicts
    CliResult compare = run_cli(base_flags() + " compare");
    REQUIRE(compare.exit_code == 0);
    CHECK(compare.out.find("9 verdicts written") != std::string::npos);
    REQUIRE(fs::exists(scratch_dir() / "runs/verdicts.json"));

    // --- report over live verdicts
    CliResult report = run_cli(base_flags() + " report");
    REQUIRE(report.exit_code == 0);
    CHECK(report.out.find("overall average") != std::string::npos);

    // --- report over the bundled reference scorecard, no LLM calls
    CliResult fixture_report = run_cli("report --from-fixture " + fixtures() +
                                       "/reference_scorecard.csv --format table");
    REQUIRE(fixture_report.exit_code == 0);
    CHECK(fixture_report.out.find("88.33") != std::string::npos);
    CHECK(fixture_report.out.find("71.67") != std::string::npos);

    CliResult fixture_csv = run_cli("report --from-fixture " + fixtures() +
                                    "/reference_scorecard.csv --format csv");
    REQUIRE(fixture_csv.exit_code == 0);
    CHECK(fixture_csv.out.rfind("Q_ID,Topic,Agent,Model Type", 0) == 0);

    // --- deleting one complex run makes compare incomplete (exit 3)
    bool removed = false;
    for (const auto& entry : fs::directory_iterator(scratch_dir() / "runs")) {
        if (entry.path().filename().string().find("-complex-") != std::string::npos) {
            fs::remove_all(entry.path());
            removed = true;
            break;
        }
    }
    REQUIRE(removed);
    CliResult incomplete = run_cli(base_flags() + " compare");
    CHECK(incomplete.exit_code == 3);
    CHECK(incomplete.err.find("missing cells") != std::string::npos);
}

TEST_CASE("ingest rejects unmapped files with exit 2" * doctest::test_suite("cli")) {
    const fs::path corpus = scratch_dir() / "bad_corpus";
    fs::create_directories(corpus);
    std::ofstream(corpus / "mapped.txt") << "some mapped text";
    std::ofstream(corpus / "stray.txt") << "no manifest entry for me";
    std::ofstream(corpus / "manifest.json") << R"({"mapped.txt": "hamilton"})";

    CliResult result = run_cli("--store bad_store.jsonl ingest --corpus " +
                               corpus.string());
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("stray.txt") != std::string::npos);
}

TEST_CASE("ingesting an empty directory succeeds with zero documents" *
          doctest::test_suite("cli")) {
    const fs::path corpus = scratch_dir() / "empty_corpus";
    fs::create_directories(corpus);
    std::ofstream(corpus / "manifest.json") << "{}";
    CliResult result =
        run_cli("--store empty_store.jsonl ingest --corpus " + corpus.string());
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("0 documents ingested") != std::string::npos);
}

TEST_CASE("missing store is a usage error" * doctest::test_suite("cli")) {
    CliResult result = run_cli("--store nope.jsonl --prompts " + fixtures() +
                               "/prompts.yaml --panel " + fixtures() +
                               "/panel.json run --kind simple --persona hamilton "
                               "--topic 1");
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("store") != std::string::npos);
}

TEST_CASE("bad flags are usage errors" * doctest::test_suite("cli")) {
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("run --kind simple").exit_code == 2);  // missing required flags
}

TEST_CASE("a stage failure exits 1 naming the failed stage" *
          doctest::test_suite("cli")) {
    // a strategist template with an unbindable placeholder fails mid-pipeline
    std::ifstream in(fixtures() + "/prompts.yaml");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    const auto pos = text.find("<critical_vulnerability>{{vulnerability}}");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 41, "<critical_vulnerability>{{bogus_slot}}___");
    const fs::path broken = scratch_dir() / "broken_prompts.yaml";
    std::ofstream(broken, std::ios::trunc) << text;

    CliResult result = run_cli("--prompts " + broken.string() + " --panel " +
                               fixtures() +
                               "/panel.json --store store.jsonl --seed 3 run "
                               "--kind complex --persona hamilton --topic 1");
    CHECK(result.exit_code == 1);
    CHECK(result.err.find("strategist") != std::string::npos);
    CHECK(result.err.find("bogus_slot") != std::string::npos);

    // the partial record was persisted with the failure marker
    CHECK(result.err.find("partial record:") != std::string::npos);
    const auto marker = result.err.find("partial record: ");
    const std::string path_line = result.err.substr(marker + 16);
    const std::string run_path = path_line.substr(0, path_line.find('\n'));
    const rhetor::RunRecord record = rhetor::load_run(scratch_dir() / run_path);
    CHECK(record.failed);
    CHECK(record.failed_stage == "strategist");
    CHECK(record.stages.size() == 5);  // selector .. red_team completed
}

TEST_CASE("an ingest document failure exits nonzero" * doctest::test_suite("cli")) {
    // a store built for a remote embedder with nothing listening
    const fs::path store = scratch_dir() / "remote_store.jsonl";
    std::ofstream(store, std::ios::trunc)
        << R"({"format":"rhetor-store-v1","embedder":"remote","dimension":8,)"
        << R"("normalize":true,"chunk_size":1000,"overlap":200})"
        << "\n";
    CliResult result = run_cli("--store " + store.string() + " ingest --corpus " +
                               fixtures() + "/corpus");
    CHECK(result.exit_code != 0);  // unusable embedder wiring is a config error
    CHECK(result.err.find("base URL") != std::string::npos);
}

TEST_CASE("compare --both-orders runs and writes verdicts" *
          doctest::test_suite("cli")) {
    // fresh out dir so this is independent of the main flow's deletions
    CliResult experiment =
        run_cli(base_flags() + " --out runs2 experiment --jobs 1");
    REQUIRE(experiment.exit_code == 0);
    CliResult compare = run_cli(base_flags() + " --out runs2 compare --both-orders");
    REQUIRE(compare.exit_code == 0);
    CHECK(compare.out.find("9 verdicts written") != std::string::npos);
    CHECK(fs::exists(scratch_dir() / "runs2/verdicts.json"));
}

TEST_CASE("the prompt catalog path can come from PIPELINE_PROMPTS" *
          doctest::test_suite("cli")) {
    // no --prompts flag: the env var must supply the catalog
    const std::string command =
        "cd " + scratch_dir().string() + " && PIPELINE_PROMPTS=" + fixtures() +
        "/prompts.yaml " + std::string(RHETOR_CLI_BIN) + " --panel " + fixtures() +
        "/panel.json --store store.jsonl --seed 1 run --kind simple "
        "--persona madison --topic 2 > env_out.txt 2> env_err.txt";
    const int status = std::system(command.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    CHECK(code == 0);
    CHECK(slurp(scratch_dir() / "env_out.txt").find("run.json") != std::string::npos);
}
