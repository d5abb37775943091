#include "rhetor/rag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <httplib.h>

#include "rhetor/canonical_json.hpp"
#include "rhetor/errors.hpp"

namespace rhetor {

// ---------------------------------------------------------------------------
// Chunking

std::vector<std::string> chunk_document(std::string_view text, std::size_t chunk_size,
                                        std::size_t overlap) {
    if (chunk_size == 0) throw ConfigError("chunk_size must be positive");
    if (overlap >= chunk_size) {
        throw ConfigError("overlap (" + std::to_string(overlap) +
                          ") must be smaller than chunk_size (" +
                          std::to_string(chunk_size) + ")");
    }
    std::vector<std::string> chunks;
    if (text.empty()) return chunks;

    const std::size_t stride = chunk_size - overlap;
    for (std::size_t start = 0;; start += stride) {
        chunks.emplace_back(text.substr(start, chunk_size));
        if (start + chunk_size >= text.size()) break;  // window reached the end
    }
    return chunks;
}

// ---------------------------------------------------------------------------
// Embedding

namespace {

void normalize_in_place(std::vector<double>& v) {
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) throw PreconditionError("cannot normalize a zero vector");
    for (double& x : v) x /= norm;
}

/// Hashed character n-gram embedding: pure, cheap, and similar texts land on
/// nearby vectors because they share n-gram buckets.
std::vector<double> deterministic_embed(std::string_view text, std::size_t dim) {
    std::vector<double> v(dim, 0.0);
    auto bump = [&](std::string_view gram) {
        const std::uint64_t h = fnv1a64(gram);
        const std::size_t bucket = h % dim;
        v[bucket] += (h >> 32) % 2 == 0 ? 1.0 : -1.0;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        bump(text.substr(i, 1));
        if (i + 3 <= text.size()) bump(text.substr(i, 3));
    }
    return v;
}

std::vector<double> remote_embed(const EmbedderConfig& config, std::string_view text) {
    if (config.base_url.empty()) {
        throw ConfigError("remote embedder requires a base URL");
    }
    httplib::Client client(config.base_url);
    if (!config.api_key_env.empty()) {
        const char* key = std::getenv(config.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw AuthConfigError("API key environment variable '" +
                                  config.api_key_env + "' is not set");
        }
        client.set_bearer_token_auth(key);
    }
    const json body{{"model", config.model_name}, {"input", std::string(text)}};
    auto res = client.Post("/embeddings", body.dump(), "application/json");
    if (!res) throw TransportError("embedding transport failure");
    if (res->status == 401 || res->status == 403) {
        throw AuthConfigError("embedding backend rejected credentials");
    }
    if (res->status != 200) {
        throw TransportError("embedding backend returned HTTP " +
                             std::to_string(res->status));
    }
    std::vector<double> v;
    try {
        const json parsed = json::parse(res->body);
        for (const auto& x : parsed.at("data").at(0).at("embedding")) {
            v.push_back(x.get<double>());
        }
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed embedding response: ") + e.what());
    }
    if (v.size() != config.dimension) {
        throw ConfigError("embedding dimension mismatch: expected " +
                          std::to_string(config.dimension) + ", got " +
                          std::to_string(v.size()));
    }
    return v;
}

}  // namespace

std::vector<double> embed(const EmbedderConfig& config, std::string_view text) {
    if (text.empty()) throw PreconditionError("cannot embed empty text");
    if (config.dimension == 0) throw ConfigError("embedding dimension must be positive");
    std::vector<double> v = config.kind == EmbedderKind::DeterministicTest
                                ? deterministic_embed(text, config.dimension)
                                : remote_embed(config, text);
    if (config.normalize) normalize_in_place(v);
    return v;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw PreconditionError("cosine: dimension mismatch (" +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()) + ")");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw PreconditionError("cosine: zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

// ---------------------------------------------------------------------------
// Store

VectorStore::VectorStore(EmbedderConfig embedder, ChunkingConfig chunking)
    : embedder_(std::move(embedder)), chunking_(chunking) {}

VectorStore::VectorStore(VectorStore&& other) noexcept {
    std::unique_lock lock(other.mutex_);
    embedder_ = std::move(other.embedder_);
    chunking_ = other.chunking_;
    chunks_ = std::move(other.chunks_);
}

VectorStore& VectorStore::operator=(VectorStore&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        embedder_ = std::move(other.embedder_);
        chunking_ = other.chunking_;
        chunks_ = std::move(other.chunks_);
    }
    return *this;
}

std::size_t VectorStore::ingest(const std::string& document_text,
                                const std::string& persona_id,
                                const std::string& source_name) {
    if (persona_id.empty()) throw PreconditionError("persona_id must be non-empty");
    const auto texts =
        chunk_document(document_text, chunking_.chunk_size, chunking_.overlap);
    if (texts.empty()) return 0;

    // Embed everything before touching the store: an embedding failure must
    // abort the whole document, and readers must never see a partial ingest.
    const std::size_t stride = chunking_.chunk_size - chunking_.overlap;
    std::vector<Chunk> staged(texts.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < texts.size(); ++i) {
        try {
            staged[i].persona_id = persona_id;
            staged[i].text = texts[i];
            staged[i].source_ref = source_name + ":" + std::to_string(i * stride);
            staged[i].vector = embed(embedder_, texts[i]);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::unique_lock lock(mutex_);
    std::uint64_t next_id = chunks_.size();
    for (auto& c : staged) {
        c.chunk_id = next_id++;
        chunks_.push_back(std::move(c));
    }
    return staged.size();
}

std::vector<QueryHit> VectorStore::query(const QuerySpec& spec, ScanMode mode) const {
    if (spec.top_k == 0) throw PreconditionError("top_k must be >= 1");
    const auto qv = embed(embedder_, spec.text);
    return search(qv, spec.persona_filter, spec.top_k, mode);
}

std::vector<QueryHit> VectorStore::search(std::span<const double> query_vector,
                                          const std::string& persona_filter,
                                          std::size_t top_k, ScanMode mode) const {
    if (top_k == 0) throw PreconditionError("top_k must be >= 1");
    std::shared_lock lock(mutex_);
    return mode == ScanMode::Serial ? scan_serial(query_vector, persona_filter, top_k)
                                    : scan_parallel(query_vector, persona_filter, top_k);
}

namespace {

struct Scored {
    double similarity;
    std::uint64_t chunk_id;
    const Chunk* chunk;
};

// Total order: descending similarity, ascending chunk_id. chunk_ids are
// unique, so the order never depends on how candidates were gathered.
bool better(const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.chunk_id < b.chunk_id;
}

std::vector<QueryHit> take_top_k(std::vector<Scored>& scored, std::size_t top_k) {
    const std::size_t k = std::min(top_k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), better);
    std::vector<QueryHit> hits;
    hits.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Chunk& c = *scored[i].chunk;
        hits.push_back(QueryHit{c.chunk_id, c.persona_id, c.text, c.source_ref,
                                scored[i].similarity});
    }
    return hits;
}

}  // namespace

std::vector<QueryHit> VectorStore::scan_serial(std::span<const double> q,
                                               const std::string& filter,
                                               std::size_t top_k) const {
    std::vector<Scored> scored;
    for (const Chunk& c : chunks_) {
        if (c.persona_id != filter) continue;
        scored.push_back(Scored{cosine(q, c.vector), c.chunk_id, &c});
    }
    return take_top_k(scored, top_k);
}

std::vector<QueryHit> VectorStore::scan_parallel(std::span<const double> q,
                                                 const std::string& filter,
                                                 std::size_t top_k) const {
    std::vector<Scored> scored;
    std::exception_ptr failure;
#pragma omp parallel
    {
        std::vector<Scored> local;
#pragma omp for nowait
        for (std::size_t i = 0; i < chunks_.size(); ++i) {
            const Chunk& c = chunks_[i];
            if (c.persona_id != filter) continue;
            try {
                local.push_back(Scored{cosine(q, c.vector), c.chunk_id, &c});
            } catch (...) {
#pragma omp critical
                failure = std::current_exception();
            }
        }
#pragma omp critical
        scored.insert(scored.end(), local.begin(), local.end());
    }
    if (failure) std::rethrow_exception(failure);
    return take_top_k(scored, top_k);
}

std::size_t VectorStore::size() const {
    std::shared_lock lock(mutex_);
    return chunks_.size();
}

std::size_t VectorStore::count_for(const std::string& persona_id) const {
    std::shared_lock lock(mutex_);
    return std::count_if(chunks_.begin(), chunks_.end(), [&](const Chunk& c) {
        return c.persona_id == persona_id;
    });
}

std::vector<Chunk> VectorStore::snapshot() const {
    std::shared_lock lock(mutex_);
    return chunks_;
}

// ---------------------------------------------------------------------------
// Persistence

void VectorStore::save(const std::filesystem::path& path) const {
    std::shared_lock lock(mutex_);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open store file for writing: " + path.string());
    const json header{
        {"format", "rhetor-store-v1"},
        {"embedder", embedder_.kind == EmbedderKind::DeterministicTest
                         ? "deterministic-test"
                         : "remote"},
        {"dimension", embedder_.dimension},
        {"normalize", embedder_.normalize},
        {"chunk_size", chunking_.chunk_size},
        {"overlap", chunking_.overlap}};
    out << header.dump() << '\n';
    for (const Chunk& c : chunks_) {
        // Full-precision dump: reload must reproduce similarities exactly.
        out << json{{"chunk_id", c.chunk_id},
                    {"persona_id", c.persona_id},
                    {"text", c.text},
                    {"source_ref", c.source_ref},
                    {"vector", c.vector}}
                   .dump()
            << '\n';
    }
    if (!out.good()) throw ConfigError("failed writing store file: " + path.string());
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open store file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("store file is empty: " + path.string());

    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("bad store header: ") + e.what());
    }
    if (header.value("format", "") != "rhetor-store-v1") {
        throw ConfigError("unrecognized store format in " + path.string());
    }

    EmbedderConfig embedder;
    embedder.kind = header.at("embedder").get<std::string>() == "remote"
                        ? EmbedderKind::Remote
                        : EmbedderKind::DeterministicTest;
    embedder.dimension = header.at("dimension").get<std::size_t>();
    embedder.normalize = header.at("normalize").get<bool>();
    ChunkingConfig chunking{header.at("chunk_size").get<std::size_t>(),
                            header.at("overlap").get<std::size_t>()};

    VectorStore store(embedder, chunking);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ConfigError("bad store record at line " + std::to_string(line_no) +
                              ": " + e.what());
        }
        Chunk c;
        c.chunk_id = rec.at("chunk_id").get<std::uint64_t>();
        c.persona_id = rec.at("persona_id").get<std::string>();
        c.text = rec.at("text").get<std::string>();
        c.source_ref = rec.at("source_ref").get<std::string>();
        c.vector = rec.at("vector").get<std::vector<double>>();
        if (c.vector.size() != embedder.dimension) {
            throw ConfigError("store record dimension mismatch at line " +
                              std::to_string(line_no));
        }
        store.chunks_.push_back(std::move(c));
    }
    return store;
}

}  // namespace rhetor
