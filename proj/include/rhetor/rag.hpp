#pragma once

#include <cstdint>
#include <filesystem>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rhetor {

// Persona-tagged vector store. Ingest chunks documents, embeds them and tags
// every chunk with its author; queries filter by that tag so one persona's
// retrieval can never surface another persona's text.

enum class EmbedderKind { DeterministicTest, Remote };

struct EmbedderConfig {
    EmbedderKind kind = EmbedderKind::DeterministicTest;
    std::size_t dimension = 64;
    bool normalize = true;
    // Remote embedder wiring; ignored by the deterministic kind.
    std::string base_url;
    std::string api_key_env = "RHETOR_API_KEY";
    std::string model_name = "default-embedder";
};

struct ChunkingConfig {
    std::size_t chunk_size = 1000;  // characters
    std::size_t overlap = 200;      // characters shared by consecutive chunks
};

struct Chunk {
    std::uint64_t chunk_id = 0;
    std::string persona_id;
    std::string text;
    std::string source_ref;  // "<document>:<offset>"
    std::vector<double> vector;
};

struct QuerySpec {
    std::string text;
    std::string persona_filter;
    std::size_t top_k = 4;
};

struct QueryHit {
    std::uint64_t chunk_id = 0;
    std::string persona_id;
    std::string text;
    std::string source_ref;
    double similarity = 0.0;
};

/// Sliding-window chunking. Consecutive chunks share exactly `overlap`
/// characters; the final chunk may be shorter. overlap >= chunk_size ->
/// ConfigError. Empty text -> empty list.
std::vector<std::string> chunk_document(std::string_view text,
                                        std::size_t chunk_size,
                                        std::size_t overlap);

/// Embed text under the given config. The deterministic-test kind is a pure
/// function of the text (hashed character n-grams); the remote kind calls an
/// HTTP embeddings endpoint. Empty text -> PreconditionError.
std::vector<double> embed(const EmbedderConfig& config, std::string_view text);

/// Cosine similarity. Dimension mismatch or zero vector -> PreconditionError.
double cosine(std::span<const double> u, std::span<const double> v);

/// Which scan kernel answers a query. Results are identical; Parallel runs
/// the OpenMP kernel, Serial the reference loop kept for testing and
/// benchmarking.
enum class ScanMode { Serial, Parallel };

class VectorStore {
public:
    explicit VectorStore(EmbedderConfig embedder = {}, ChunkingConfig chunking = {});

    VectorStore(VectorStore&& other) noexcept;
    VectorStore& operator=(VectorStore&& other) noexcept;
    VectorStore(const VectorStore&) = delete;
    VectorStore& operator=(const VectorStore&) = delete;

    /// Chunk, embed and add one document. Returns the number of chunks added.
    /// Any embedding failure aborts the whole document; the store is left
    /// unchanged. Concurrent readers never observe a partial ingest.
    std::size_t ingest(const std::string& document_text, const std::string& persona_id,
                       const std::string& source_name);

    /// Persona-filtered top-k by cosine similarity, sorted by descending
    /// similarity with ties broken by ascending chunk_id.
    std::vector<QueryHit> query(const QuerySpec& spec,
                                ScanMode mode = ScanMode::Parallel) const;

    /// Vector-level entry point (query embedding already computed).
    std::vector<QueryHit> search(std::span<const double> query_vector,
                                 const std::string& persona_filter, std::size_t top_k,
                                 ScanMode mode = ScanMode::Parallel) const;

    std::size_t size() const;
    std::size_t count_for(const std::string& persona_id) const;
    std::vector<Chunk> snapshot() const;

    const EmbedderConfig& embedder() const { return embedder_; }
    const ChunkingConfig& chunking() const { return chunking_; }

    /// Append-only record file: one header line, then one JSON chunk record
    /// per line. Inspectable and diff-able.
    void save(const std::filesystem::path& path) const;
    static VectorStore load(const std::filesystem::path& path);

private:
    std::vector<QueryHit> scan_serial(std::span<const double> q,
                                      const std::string& filter,
                                      std::size_t top_k) const;
    std::vector<QueryHit> scan_parallel(std::span<const double> q,
                                        const std::string& filter,
                                        std::size_t top_k) const;

    EmbedderConfig embedder_;
    ChunkingConfig chunking_;
    std::vector<Chunk> chunks_;
    mutable std::shared_mutex mutex_;
};

}  // namespace rhetor
