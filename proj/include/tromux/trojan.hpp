#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tromux/layout.hpp"
#include "tromux/netlist.hpp"
#include "tromux/sim.hpp"
#include "tromux/timing.hpp"

namespace tromux {

enum class PayloadMode { leak, fault_xor, fault_mux, none };
const char* to_string(PayloadMode m);
PayloadMode parse_payload_mode(const std::string& s);

/**
 * A first-order ECO-style Trojan: a bench fragment plus binding policy.
 * The first `trigger_inputs` fragment inputs (declaration order) bind to the
 * lowest-toggle nets of the victim; the remaining inputs tap the payload
 * target nets. Payload modes:
 *   leak      fragment outputs become new primary outputs
 *   fault-xor fragment output XOR-corrupts each target FF's data input
 *   fault-mux fragment outputs (select, value) override each target FF's
 *             data input through a MUX2 (select=0 keeps the benign value)
 *   none      self-contained (e.g. a gated oscillator); no outputs exported
 */
struct TrojanSpec {
    std::string name;
    int trigger_inputs = 1;
    PayloadMode payload = PayloadMode::leak;
    std::vector<std::string> targets; // asset instances or their nets; empty = every asset
    Netlist fragment;
};

/// Text format: TROJAN <name> / TRIGGERS <n> / PAYLOAD <mode> / TARGETS any|names
/// then the fragment between BEGIN and END lines.
TrojanSpec parse_trojan_spec(const std::string& text, const CellLibrary& lib);

struct TrojanLocation {
    std::string instance;
    int row = 0;
    int site = 0;
};

struct InsertionReport {
    std::string trojan;
    uint64_t seed = 0;
    bool placed = false;
    int sites_used = 0;
    int placement_shortfall = 0; // open sites missing for the unplaced cells
    double wns_delta = 0.0;      // after - before; negative = degradation
    double tns_delta = 0.0;
    double wirelength_delta = 0.0;
    bool tns_threshold_exceeded = false; // |TNS after| > 20% of the clock period
    // (from, to) pairs: trigger entries map fragment pins to victim nets;
    // payload entries map tap pins to tapped nets, and for fault modes the
    // corrupting fragment output to each spliced FF instance
    std::vector<std::pair<std::string, std::string>> trigger_bindings;
    std::vector<std::pair<std::string, std::string>> payload_bindings;
    std::vector<TrojanLocation> locations;

    std::string to_json() const;
};

struct InsertionResult {
    std::optional<Netlist> netlist; // engaged only when the report says placed
    std::optional<PlacementGrid> grid;
    InsertionReport report;
};

/**
 * Attempt the insertion against a placed design. Trojan cells are placed
 * greedily into open sites nearest the centroid of the bound nets' placed
 * neighbors; any cell that does not fit counts its width into
 * placement_shortfall and fails the whole insertion (the inputs are never
 * modified). The attacker may not move benign cells. `seed` is recorded for
 * provenance; the procedure itself is deterministic.
 */
InsertionResult insert_trojan(const Netlist& n, const PlacementGrid& grid, const TrojanSpec& spec,
                              const ToggleProfile& profile, const CellLibrary& lib, uint64_t seed,
                              const StaOptions& sta = {});

/**
 * Co-simulates the design under the correct key and its bitwise complement
 * with identical stimulus and reports, per tapped net, in how many cycles the
 * observed values differ. A tap on a locked asset is key-dependent (useless
 * to an attacker without the key); a tap outside the locked cone reads the
 * same either way.
 */
std::string evaluate_payload_utility(const Netlist& design, const CellLibrary& lib,
                                     const std::vector<std::string>& tapped_nets,
                                     const std::vector<uint8_t>& key, bool key_known,
                                     int cycles = 64, uint64_t seed = 1);

} // namespace tromux
