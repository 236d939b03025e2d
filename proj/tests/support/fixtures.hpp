#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tromux/cell_library.hpp"
#include "tromux/netlist.hpp"

namespace tromux::testsupport {

struct FixtureSpec {
    int gates = 80;
    int ffs = 8;
    int pis = 6;
    int pos = 5;
    uint64_t seed = 1;
};

// Random acyclic design over the given library: FF outputs and PIs seed a
// driven-net pool, gates consume from it and grow it, FF data/enable inputs
// close the sequential loops at the end. Deterministic in the spec.
Netlist random_netlist(const FixtureSpec& spec, const CellLibrary& lib);

// First `count` FF instance names in declaration order (fewer if the design
// has fewer FFs).
std::vector<std::string> pick_assets(const Netlist& n, const CellLibrary& lib, int count);

// Design whose combinational population is `heavy` NAND2s and `light` AND2s
// in a deterministic shuffle, plus DFF glue, for corpus-bias experiments.
Netlist imbalanced_netlist(int heavy, int light, int ffs, uint64_t seed, const CellLibrary& lib);

} // namespace tromux::testsupport
