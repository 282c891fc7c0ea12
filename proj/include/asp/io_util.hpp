#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>

#include "asp/error.hpp"

namespace asp {

// Shortest round-trip decimal form of a double. Used for every float that
// lands in a CSV/JSON artifact so that equal values always print identically.
inline std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace detail {

// Fixed-width little-endian binary I/O for the versioned snapshot formats.
template <typename T>
void write_raw(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.write(buf, sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const char* what) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    in.read(buf, sizeof(T));
    if (!in) throw_error(ErrorCode::Parse, std::string("truncated file while reading ") + what);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

}  // namespace detail
}  // namespace asp
