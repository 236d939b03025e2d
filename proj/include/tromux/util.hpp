#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tromux {

/// Base error for anything the toolkit rejects. CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent inputs (parse errors, bad references, broken invariants).
struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Structurally sound request that cannot be satisfied (placement capacity, missing assets).
struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& what) : Error(what) {}
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::string trim(const std::string& s);
std::vector<std::string> split_ws(const std::string& s);
std::vector<std::string> split_on(const std::string& s, char sep);
bool starts_with(const std::string& s, const std::string& prefix);

/// Reserved prefix for every generated instance/net name.
inline const std::string kReservedPrefix = "tromux_";

inline const char* kToolVersion = "0.1.0";

} // namespace tromux
