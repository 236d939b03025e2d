#pragma once

#include <string>

#include "tromux/util.hpp"

namespace tromux {

// Key gate flavor used across selection, locking, and the flow.
enum class Variant { mux, xor_ };

inline std::string to_string(Variant v) { return v == Variant::mux ? "mux" : "xor"; }

inline Variant parse_variant(const std::string& s) {
    if (s == "mux") return Variant::mux;
    if (s == "xor") return Variant::xor_;
    throw ValidationError("unknown variant: " + s + " (expected mux or xor)");
}

} // namespace tromux
