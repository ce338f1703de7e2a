#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace edgeadmm {

/// Shortest round-trip decimal form; identical output for identical bits,
/// which keeps emitted CSVs byte-stable across runs.
inline std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace edgeadmm
