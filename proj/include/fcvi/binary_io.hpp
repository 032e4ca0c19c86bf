#pragma once

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <type_traits>

#include "fcvi/core.hpp"

namespace fcvi {

// Little-endian scalar I/O. The hosts we target are little-endian; the byte
// swap keeps the on-disk layout pinned regardless.

namespace detail {

constexpr bool is_little_endian() {
    return std::endian::native == std::endian::little;
}

}  // namespace detail

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (!detail::is_little_endian()) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw IoError("unexpected end of stream");
    if constexpr (!detail::is_little_endian()) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

template <typename T>
void write_le_array(std::ostream& os, const T* data, std::size_t count) {
    if constexpr (detail::is_little_endian()) {
        os.write(reinterpret_cast<const char*>(data), std::streamsize(count * sizeof(T)));
    } else {
        for (std::size_t i = 0; i < count; ++i) write_le(os, data[i]);
    }
}

template <typename T>
void read_le_array(std::istream& is, T* data, std::size_t count) {
    if constexpr (detail::is_little_endian()) {
        is.read(reinterpret_cast<char*>(data), std::streamsize(count * sizeof(T)));
        if (!is) throw IoError("unexpected end of stream");
    } else {
        for (std::size_t i = 0; i < count; ++i) data[i] = read_le<T>(is);
    }
}

}  // namespace fcvi
