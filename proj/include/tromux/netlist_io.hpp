#pragma once

#include <string>

#include "tromux/netlist.hpp"

namespace tromux {

enum class NetlistFormat { bench, verilog };

/**
 * Bench dialect. Classic lines (`INPUT(a)`, `OUTPUT(y)`, `y = NAND(a, b)`,
 * `q = DFF(d)`, `#` comments) plus documented extensions so every library cell
 * round-trips: `MUX(a, b, s)` (s=0 selects a), `DFFN(d)` for the QN-only FF,
 * `q, qn = DFF2(d)` for the two-output FF, `q = DFFE(d, en)` for the
 * load-enable FF, and any library type name as a fallback keyword. Arguments
 * map positionally onto library input pins. Magic comments
 * (`# tromux keychain-nets:`, `# tromux keypins:`, `# tromux keygate-nets:`,
 * `# tromux assets:`), addressed by first output net since bench has no
 * instance names, restore metadata that is public under the threat model.
 */
Netlist parse_bench(const std::string& text, const CellLibrary& lib);
std::string write_bench(const Netlist& n, const CellLibrary& lib);

/**
 * Structural Verilog subset: one module, scalar ports/wires, gate-level
 * instantiations with named port connections, and `assign po = net;` aliases.
 * Anything else is rejected as an unsupported construct.
 */
Netlist parse_structural_verilog(const std::string& text, const CellLibrary& lib);
std::string write_verilog(const Netlist& n, const CellLibrary& lib);

std::string write_netlist(const Netlist& n, const CellLibrary& lib, NetlistFormat fmt);
/// Pick the parser from the file extension (.bench / .v).
Netlist read_netlist_file(const std::string& path, const CellLibrary& lib);

/// Newline-separated FF instance names; `#` comments allowed.
std::vector<std::string> parse_assets(const std::string& text);

} // namespace tromux
