#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace swincross {

// Writes to a sibling temporary file and renames it over path.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);
bool file_exists(const std::string& path);
void ensure_directory(const std::string& path);

// Little-endian encoding of float/double arrays regardless of host order.
template <typename T>
void append_little_endian(std::string& out, std::span<const T> values) {
    const std::size_t start = out.size();
    out.resize(start + values.size() * sizeof(T));
    std::memcpy(out.data() + start, values.data(), values.size() * sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            char* p = out.data() + start + i * sizeof(T);
            for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) std::swap(p[a], p[b]);
        }
    }
}

template <typename T>
std::vector<T> decode_little_endian(std::string_view bytes) {
    std::vector<T> out(bytes.size() / sizeof(T));
    std::memcpy(out.data(), bytes.data(), out.size() * sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (auto& v : out) {
            char* p = reinterpret_cast<char*>(&v);
            for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) std::swap(p[a], p[b]);
        }
    }
    return out;
}

}  // namespace swincross
