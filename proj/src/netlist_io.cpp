#include <sstream>

#include "tromux/netlist_io.hpp"
#include "tromux/util.hpp"

namespace tromux {

std::string write_netlist(const Netlist& n, const CellLibrary& lib, NetlistFormat fmt) {
    return fmt == NetlistFormat::bench ? write_bench(n, lib) : write_verilog(n, lib);
}

Netlist read_netlist_file(const std::string& path, const CellLibrary& lib) {
    std::string text = read_text_file(path);
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".bench")
        return parse_bench(text, lib);
    if (path.size() >= 2 && path.substr(path.size() - 2) == ".v")
        return parse_structural_verilog(text, lib);
    throw ValidationError("cannot infer netlist format from extension: " + path);
}

} // namespace tromux
