#include "rhetor/canonical_json.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "rhetor/errors.hpp"

namespace rhetor {

std::string format_real(double v) {
    if (!std::isfinite(v)) {
        throw SerializationError("non-finite real is not canonically serializable");
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

namespace {

void dump_into(const json& node, std::string& out) {
    switch (node.type()) {
        case json::value_t::null:
            out += "null";
            break;
        case json::value_t::boolean:
            out += node.get<bool>() ? "true" : "false";
            break;
        case json::value_t::number_integer:
        case json::value_t::number_unsigned:
            out += node.dump();
            break;
        case json::value_t::number_float:
            out += format_real(node.get<double>());
            break;
        case json::value_t::string:
            out += node.dump();  // nlohmann handles JSON string escaping
            break;
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& item : node) {
                if (!first) out += ',';
                first = false;
                dump_into(item, out);
            }
            out += ']';
            break;
        }
        case json::value_t::object: {
            // nlohmann's default object_t is std::map, so iteration order is
            // already lexicographic by key.
            out += '{';
            bool first = true;
            for (auto it = node.begin(); it != node.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += json(it.key()).dump();
                out += ':';
                dump_into(it.value(), out);
            }
            out += '}';
            break;
        }
        default:
            throw SerializationError("document contains a non-serializable value");
    }
}

}  // namespace

std::string canonical_dump(const json& doc) {
    std::string out;
    out.reserve(256);
    dump_into(doc, out);
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
    constexpr std::uint64_t prime = 0x100000001b3ULL;
    for (unsigned char c : bytes) {
        state ^= c;
        state *= prime;
    }
    return state;
}

std::string digest(const json& doc) {
    const std::uint64_t h = fnv1a64(canonical_dump(doc));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::string_view> parts) {
    char raw[sizeof master];
    std::memcpy(raw, &master, sizeof master);
    std::uint64_t h = fnv1a64(std::string_view(raw, sizeof raw));
    for (const auto& part : parts) {
        h = fnv1a64(part, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);  // separator, keeps parts unambiguous
    }
    return h;
}

}  // namespace rhetor
