#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tromux/cell_library.hpp"
#include "tromux/netlist.hpp"
#include "tromux/rng.hpp"
#include "tromux/variant.hpp"

namespace tromux {

/**
 * One locking action: the instance to transform, the structure configuration,
 * and the key bit that drives it. Configuration ids:
 *   gates, mux variant:  mux:{keep|transform}:{direct|swapped}
 *   gates, xor variant:  xor:{keep|transform}:{xor2|xnor2}
 *   FFs,  mux variant:   ffmux:{direct|swapped}
 *   FFs,  xor variant:   ffxor:<output-pin-lowercase>:{xor2|xnor2}
 * keep/transform says whether the original gate stays or becomes its library
 * complement; direct/swapped is the MUX input order encoding key polarity.
 */
struct PlanEntry {
    std::string instance;
    std::string config; // empty = drawn uniformly at apply time
    int key_index = -1; // filled in by apply_plan
};

struct LockingPlan {
    std::vector<PlanEntry> entries;
};

// plan file: one "instance config_id" line per entry, key indices positional
std::string write_plan(const LockingPlan& plan);
LockingPlan parse_plan(const std::string& text);

/// Configurations applicable to this instance under the variant, in the
/// uniform-choice order. Complement-less gates get only the keep half.
std::vector<std::string> legal_configs(const Netlist& n, const CellLibrary& lib, int cell,
                                       Variant variant);

/**
 * Insert the keyed structure for one instance with an explicit configuration,
 * wiring the structure's key input to key_net. Returns the correct key bit.
 * The locked instance is renamed after its new raw output net so instance
 * names keep matching first-output-net derivation on re-parse.
 */
int lock_cell_config(Netlist& n, const CellLibrary& lib, const std::string& instance,
                     const std::string& config, int key_net);

/// Lock one combinational gate: uniform configuration draw, a fresh
/// tromux_key<i> primary input as the key source. Returns the correct bit.
int lock_gate(Netlist& n, const CellLibrary& lib, const std::string& instance, Variant variant,
              Rng& rng);
/// Same for a flip-flop (output swap / output inversion structures).
int lock_ff(Netlist& n, const CellLibrary& lib, const std::string& instance, Variant variant,
            Rng& rng);

/**
 * Build the shift-register key chain: two new primary inputs
 * (tromux_key_data, tromux_key_load) and key_length load-enable FFs, FF i
 * named tromux_key<i> and driving net tromux_key<i>. load=1 shifts one bit
 * per cycle (bit k-1 enters first), load=0 holds indefinitely.
 */
void build_key_chain(Netlist& n, const CellLibrary& lib, int key_length);
/// Append FFs at the chain tail; existing bit indices are preserved.
void extend_key_chain(Netlist& n, const CellLibrary& lib, int additional);

struct ApplyResult {
    std::vector<uint8_t> key;  // key[i] = correct bit of the i-th new entry
    LockingPlan resolved_plan; // concrete config ids and key indices
};

/**
 * Lock every plan entry and then build (or extend) the key chain so all new
 * key nets are driven. Unspecified configs are drawn from a substream mixed
 * from (seed, key index), so one entry's draw never perturbs another's.
 * An empty plan is a no-op. The result key covers only this plan's bits.
 */
ApplyResult apply_plan(Netlist& n, const CellLibrary& lib, const LockingPlan& plan,
                       Variant variant, uint64_t seed);

// key file: "keylen=<k> seed=<s> variant=<v>" header plus one hex line,
// most significant nibble = highest key indices
std::string write_key_file(const std::vector<uint8_t>& key, uint64_t seed, Variant variant);
std::vector<uint8_t> parse_key_file(const std::string& text);

} // namespace tromux
