#include "support/fixtures.hpp"

#include <algorithm>

#include "tromux/rng.hpp"

namespace tromux::testsupport {

namespace {

struct FfPins {
    const char* type;
    const char* second_out; // nullptr for single-output types
};

constexpr FfPins kFfMix[] = {
    {"DFF", nullptr},
    {"DFF_QN", nullptr},
    {"DFF_2OUT", "QN"},
    {"DFF_LE", nullptr},
};

int pick(Rng& rng, const std::vector<int>& pool) { return pool[rng.below(pool.size())]; }

} // namespace

Netlist random_netlist(const FixtureSpec& spec, const CellLibrary& lib) {
    Netlist n;
    n.name = "fx" + std::to_string(spec.seed);
    Rng rng(spec.seed);

    std::vector<int> pool;
    for (int i = 0; i < spec.pis; ++i) {
        int id = n.add_net("pi" + std::to_string(i));
        n.mark_primary_input(id);
        pool.push_back(id);
    }

    // FF outputs join the pool before any gate so combinational logic can
    // sit between registers, not just behind the PIs.
    struct PendingFf {
        int cell;
        bool enable;
    };
    std::vector<PendingFf> pending;
    for (int i = 0; i < spec.ffs; ++i) {
        const FfPins& f = kFfMix[i % 4];
        std::string base = "ff" + std::to_string(i);
        int c = n.add_cell(base, f.type);
        const CellType& t = lib.at(f.type);
        int q = n.add_net(base);
        n.connect(c, t.outputs.front(), q, lib);
        pool.push_back(q);
        if (f.second_out) {
            int qn = n.add_net(base + "_qn");
            n.connect(c, f.second_out, qn, lib);
            pool.push_back(qn);
        }
        pending.push_back({c, t.has_enable});
    }

    // Always include the complement-less types so balanced selection keeps
    // finding picks after a pair saturates.
    const char* kTypes[] = {"AND2", "NAND2", "OR2", "NOR2", "XOR2", "XNOR2", "INV", "MUX2"};
    for (int i = 0; i < spec.gates; ++i) {
        const std::string type = kTypes[rng.below(8)];
        const CellType& t = lib.at(type);
        std::string base = "g" + std::to_string(i);
        int c = n.add_cell(base, type);
        for (const std::string& in : t.inputs) n.connect(c, in, pick(rng, pool), lib);
        int out = n.add_net(base);
        n.connect(c, t.outputs.front(), out, lib);
        pool.push_back(out);
    }

    for (const PendingFf& f : pending) {
        n.connect(f.cell, "D", pick(rng, pool), lib);
        if (f.enable) n.connect(f.cell, "EN", pick(rng, pool), lib);
    }

    int pos = std::min<int>(spec.pos, static_cast<int>(pool.size()));
    for (int i = 0; i < pos; ++i) n.mark_primary_output(pool[pool.size() - 1 - i]);

    n.ensure_valid(lib);
    return n;
}

std::vector<std::string> pick_assets(const Netlist& n, const CellLibrary& lib, int count) {
    std::vector<std::string> out;
    for (const CellInstance& c : n.cells) {
        if (static_cast<int>(out.size()) >= count) break;
        if (lib.at(c.type).sequential) out.push_back(c.name);
    }
    return out;
}

Netlist imbalanced_netlist(int heavy, int light, int ffs, uint64_t seed, const CellLibrary& lib) {
    Netlist n;
    n.name = "biased" + std::to_string(seed);
    Rng rng(seed);

    std::vector<int> pool;
    for (int i = 0; i < 8; ++i) {
        int id = n.add_net("pi" + std::to_string(i));
        n.mark_primary_input(id);
        pool.push_back(id);
    }
    std::vector<int> ff_cells;
    for (int i = 0; i < ffs; ++i) {
        std::string base = "ff" + std::to_string(i);
        int c = n.add_cell(base, "DFF");
        int q = n.add_net(base);
        n.connect(c, "Q", q, lib);
        pool.push_back(q);
        ff_cells.push_back(c);
    }

    std::vector<std::string> types(static_cast<size_t>(heavy), "NAND2");
    types.insert(types.end(), static_cast<size_t>(light), "AND2");
    for (size_t i = types.size(); i > 1; --i) std::swap(types[i - 1], types[rng.below(i)]);

    for (size_t i = 0; i < types.size(); ++i) {
        const CellType& t = lib.at(types[i]);
        std::string base = "g" + std::to_string(i);
        int c = n.add_cell(base, types[i]);
        for (const std::string& in : t.inputs) n.connect(c, in, pick(rng, pool), lib);
        int out = n.add_net(base);
        n.connect(c, "Y", out, lib);
        pool.push_back(out);
    }

    for (int c : ff_cells) n.connect(c, "D", pick(rng, pool), lib);
    int pos = static_cast<int>(std::min<size_t>(4, pool.size()));
    for (int i = 0; i < pos; ++i) n.mark_primary_output(pool[pool.size() - 1 - i]);

    n.ensure_valid(lib);
    return n;
}

} // namespace tromux::testsupport
