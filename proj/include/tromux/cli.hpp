#pragma once

namespace tromux {

/// Entry point behind the tromux binary. Exit codes: 0 success, 1 usage,
/// 2 validation (malformed inputs), 3 infeasible (capacity/assets).
int run_cli(int argc, const char* const* argv);

} // namespace tromux
