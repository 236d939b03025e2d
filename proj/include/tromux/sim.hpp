#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tromux/netlist.hpp"

namespace tromux {

struct SimOptions {
    /// FF instance -> initial state applied at every reset (default state is 0).
    std::vector<std::pair<std::string, uint8_t>> ff_preset;
    /// PI net -> constant; these PIs are excluded from random stimulus.
    std::vector<std::pair<std::string, uint8_t>> pin_const;
    /// Net -> value forced throughout evaluation (test hook, e.g. disarming a
    /// trojan trigger during benign-equivalence checks).
    std::vector<std::pair<std::string, uint8_t>> force_nets;
};

/**
 * Two-valued levelized cycle simulator. Per cycle: FF output nets take the
 * current state, stimulated PIs take their vector, combinational cells
 * evaluate in topological order, then every FF captures its D (gated by EN on
 * load-enable types). Reset state is all-zero unless preset.
 */
class SimEngine {
public:
    SimEngine(const Netlist& n, const CellLibrary& lib, const SimOptions& opt = {});

    void reset();
    /// Advance one cycle; `pi_values` follows data_pis() order. Returns net values.
    const std::vector<uint8_t>& step(const std::vector<uint8_t>& pi_values);
    const std::vector<uint8_t>& values() const { return values_; }

    /// Stimulated PIs: primary inputs minus clock nets and pin_const entries.
    const std::vector<int>& data_pis() const { return data_pis_; }
    const Netlist& netlist() const { return *n_; }

private:
    struct CellOp {
        int cell;
        std::vector<int> in_nets; // library input pin order
        int out_net = -1;
        uint64_t truth = 0;
    };
    struct FfOp {
        int cell;
        int d_net = -1;
        int en_net = -1; // -1 when always enabled
        std::vector<std::pair<int, bool>> out_nets; // (net, inverted)
        uint8_t state = 0;
        uint8_t reset_state = 0;
    };

    const Netlist* n_;
    std::vector<CellOp> comb_;
    std::vector<FfOp> ffs_;
    std::vector<int> data_pis_;
    std::vector<int8_t> forced_; // per net, -1 = free
    std::vector<uint8_t> values_;
};

std::vector<std::vector<uint8_t>> random_vectors(int cycles, int width, uint64_t seed);

struct SimTrace {
    std::vector<int> data_pis;
    std::vector<std::vector<uint8_t>> values; // [cycle][net]
};
SimTrace simulate(const Netlist& n, const CellLibrary& lib,
                  const std::vector<std::vector<uint8_t>>& pi_vectors,
                  const SimOptions& opt = {});

struct ToggleProfile {
    int cycles = 0;
    uint64_t seed = 0;
    std::vector<double> tpc; // per net id
};

/**
 * Toggle-per-cycle profile under uniform random stimulus. Cycles are processed
 * in fixed 1024-cycle blocks, each restarted from reset with a seed derived
 * from (seed, block); toggle counts are integer sums over blocks, so the
 * result is bit-identical however the blocks are scheduled. The parallel and
 * serial entry points therefore agree exactly.
 */
ToggleProfile toggle_profile(const Netlist& n, const CellLibrary& lib, int cycles, uint64_t seed,
                             const SimOptions& opt = {}, bool parallel = true);
ToggleProfile toggle_profile_serial(const Netlist& n, const CellLibrary& lib, int cycles,
                                    uint64_t seed, const SimOptions& opt = {});

std::string write_profile(const Netlist& n, const ToggleProfile& p);
ToggleProfile parse_profile(const Netlist& n, const std::string& text);

/// Low-controllability nets: tpc <= threshold (inclusive), ordered by
/// ascending tpc then name.
struct LcnSet {
    double threshold = 0.1;
    std::vector<int> nets;
};
LcnSet lcn_set(const Netlist& n, const ToggleProfile& p, double threshold = 0.1);

struct Counterexample {
    int cycle = 0;
    std::string po;
    std::vector<uint8_t> vector; // data PI values at the failing cycle
};

struct EquivalenceResult {
    bool equivalent = false;
    std::string note;
    std::optional<Counterexample> cex;
};

struct EquivSpec {
    bool exhaustive = false;
    int vectors = 10000; // random mode cycle count
    uint64_t seed = 1;
};

/**
 * Functional comparison of `a` (reference) and `b` (locked) under a key.
 * Key binding: chain FFs of `b` are preset to the key bits and the chain's
 * data/load inputs held at 0; unchained `tromux_key<i>` PIs are bound as
 * constants. Data PI and PO name sets must match. Exhaustive mode (max 20 data
 * PIs) holds each input vector for min(#FFs,16)+2 cycles from reset; random
 * mode streams fresh vectors for `vectors` cycles.
 */
EquivalenceResult equivalence_check(const Netlist& a, const Netlist& b, const CellLibrary& lib,
                                    const std::vector<uint8_t>& key_binding, const EquivSpec& spec);

} // namespace tromux
