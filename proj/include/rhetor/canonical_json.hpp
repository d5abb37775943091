#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

namespace rhetor {

using json = nlohmann::json;

/// Canonical text form of a document: object keys sorted lexicographically,
/// compact separators, reals rendered with at most 6 significant digits and no
/// trailing zeros. Two semantically equal documents always serialize to the
/// same bytes, so digests and golden files are platform-stable.
std::string canonical_dump(const json& doc);

/// Render one real in the canonical form ("%.6g", trailing zeros stripped).
/// Throws SerializationError on NaN / infinity.
std::string format_real(double v);

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t state = 0xcbf29ce484222325ULL);

/// Digest token for a document: FNV-1a 64 over the canonical serialization,
/// rendered as 16 lowercase hex characters. Equal documents (canonically)
/// yield equal digests.
std::string digest(const json& doc);

/// Deterministically derive a child seed from a master seed and labels.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::string_view> parts);

}  // namespace rhetor
