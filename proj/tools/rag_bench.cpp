// Benchmark for the store scan kernels: OpenMP parallel scan vs the serial
// reference, on a synthetic store. Verifies both kernels return identical
// results before reporting timings.

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "rhetor/canonical_json.hpp"
#include "rhetor/rag.hpp"

using namespace rhetor;
using Clock = std::chrono::steady_clock;

namespace {

std::string synthetic_text(std::uint64_t i) {
    static const char* words[] = {"union",   "credit",  "liberty", "faction",
                                  "commerce", "soil",    "treaty",  "militia",
                                  "charter", "assembly", "frontier", "revenue"};
    std::string text;
    std::uint64_t h = derive_seed(i, {"bench"});
    for (int w = 0; w < 12; ++w) {
        h = fnv1a64("step", h);
        text += words[h % std::size(words)];
        text += ' ';
    }
    return text;
}

double run_queries(const VectorStore& store, const std::vector<std::string>& queries,
                   const std::vector<std::string>& personas, std::size_t top_k,
                   ScanMode mode, std::vector<std::vector<QueryHit>>& results) {
    results.clear();
    const auto start = Clock::now();
    for (std::size_t i = 0; i < queries.size(); ++i) {
        results.push_back(store.query(
            QuerySpec{queries[i], personas[i % personas.size()], top_k}, mode));
    }
    const auto elapsed = Clock::now() - start;
    return std::chrono::duration<double, std::milli>(elapsed).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"store scan benchmark: serial reference vs OpenMP kernel"};
    std::size_t chunks = 20000, dim = 64, n_queries = 50, top_k = 8, n_personas = 4;
    int reps = 3;
    app.add_option("--chunks", chunks, "synthetic chunk count");
    app.add_option("--dim", dim, "embedding dimension");
    app.add_option("--queries", n_queries, "queries per rep");
    app.add_option("--top-k", top_k, "results per query");
    app.add_option("--personas", n_personas, "distinct persona tags");
    app.add_option("--reps", reps, "timing repetitions");
    CLI11_PARSE(app, argc, argv);

    EmbedderConfig embedder;
    embedder.dimension = dim;
    VectorStore store(embedder, ChunkingConfig{1000, 200});

    std::vector<std::string> personas;
    for (std::size_t p = 0; p < n_personas; ++p) {
        personas.push_back("persona" + std::to_string(p));
    }

    const auto ingest_start = Clock::now();
    for (std::size_t i = 0; i < chunks; ++i) {
        store.ingest(synthetic_text(i), personas[i % n_personas],
                     "doc" + std::to_string(i));
    }
    const double ingest_ms = std::chrono::duration<double, std::milli>(
                                 Clock::now() - ingest_start)
                                 .count();

    std::vector<std::string> queries;
    for (std::size_t q = 0; q < n_queries; ++q) {
        queries.push_back(synthetic_text(1'000'000 + q));
    }

#ifdef _OPENMP
    std::cout << "OpenMP threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "OpenMP: not enabled (parallel mode falls back to one thread)\n";
#endif
    std::cout << "store: " << store.size() << " chunks x dim " << dim << " ("
              << ingest_ms << " ms ingest)\n\n";

    std::vector<std::vector<QueryHit>> serial_hits, parallel_hits;
    // warmup + correctness check
    run_queries(store, queries, personas, top_k, ScanMode::Serial, serial_hits);
    run_queries(store, queries, personas, top_k, ScanMode::Parallel, parallel_hits);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        if (serial_hits[q].size() != parallel_hits[q].size()) {
            std::cerr << "MISMATCH: result count differs on query " << q << "\n";
            return 1;
        }
        for (std::size_t r = 0; r < serial_hits[q].size(); ++r) {
            if (serial_hits[q][r].chunk_id != parallel_hits[q][r].chunk_id ||
                serial_hits[q][r].similarity != parallel_hits[q][r].similarity) {
                std::cerr << "MISMATCH: rank " << r << " differs on query " << q << "\n";
                return 1;
            }
        }
    }
    std::cout << "kernels agree on all " << queries.size() << " queries\n\n";

    std::cout << "rep   serial(ms)   parallel(ms)   speedup\n";
    for (int rep = 0; rep < reps; ++rep) {
        const double serial_ms =
            run_queries(store, queries, personas, top_k, ScanMode::Serial, serial_hits);
        const double parallel_ms = run_queries(store, queries, personas, top_k,
                                               ScanMode::Parallel, parallel_hits);
        std::printf("%3d   %10.2f   %12.2f   %7.2fx\n", rep, serial_ms, parallel_ms,
                    serial_ms / parallel_ms);
    }
    return 0;
}
