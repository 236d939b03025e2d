#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "tromux/cell_library.hpp"

namespace tromux {

enum class Origin { original, key_gate, key_chain_ff, trojan };

const char* to_string(Origin o);

struct SinkRef {
    int cell = -1;
    std::string pin;
    bool operator==(const SinkRef&) const = default;
};

struct Net {
    std::string name;
    int driver_cell = -1;     // -1 when driven by a primary input (or undriven)
    std::string driver_pin;
    bool is_primary_input = false;
    bool is_primary_output = false;
    std::string output_alias; // exported PO name when it differs from the net name
    std::vector<SinkRef> sinks;
};

struct CellInstance {
    std::string name;
    std::string type;
    std::vector<std::pair<std::string, int>> pins; // pin name -> net id
    bool locked = false;
    Origin origin = Origin::original;

    int pin_net(const std::string& pin) const;
    void set_pin(const std::string& pin, int net);
};

struct ValidationIssues {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/**
 * Flat gate-level netlist over a cell library. Nets and cells are stored in
 * creation order and addressed by dense ids; all traversals iterate those
 * vectors, so every derived result is deterministic for a given input.
 *
 * Clocking is implicit: FFs update once per global cycle. clock_nets can tag
 * nets as clock distribution for imported designs; cells driving them are
 * never locking candidates.
 */
class Netlist {
public:
    std::string name = "top";
    std::vector<CellInstance> cells;
    std::vector<Net> nets;
    std::vector<int> primary_inputs;  // net ids, declaration order
    std::vector<int> primary_outputs; // net ids, declaration order
    std::vector<int> clock_nets;
    std::vector<std::string> assets;  // FF instance names to protect

    // key-chain metadata, populated by locking (or restored from file comments);
    // key_chain[i] is the FF holding key bit i
    std::vector<std::string> key_chain;
    std::string key_data_pi;
    std::string key_load_pi;

    int add_net(const std::string& net_name);
    int add_cell(const std::string& cell_name, const std::string& type);
    int net_id(const std::string& net_name) const;   // -1 when absent
    int cell_id(const std::string& cell_name) const; // -1 when absent
    Net& net(int id) { return nets[id]; }
    const Net& net(int id) const { return nets[id]; }
    CellInstance& cell(int id) { return cells[id]; }
    const CellInstance& cell(int id) const { return cells[id]; }

    /// Connect a cell pin to a net, maintaining driver/sink bookkeeping.
    void connect(int cell, const std::string& pin, int net, const CellLibrary& lib);
    /// Detach a cell pin from its net (both directions).
    void disconnect(int cell, const std::string& pin, const CellLibrary& lib);

    void mark_primary_input(int net);
    void mark_primary_output(int net);

    /// Rename an instance, updating the index, asset and key-chain lists.
    /// Locking uses this to keep instance names equal to first output nets,
    /// which is what instance-nameless formats derive on re-parse.
    void rename_cell(const std::string& old_name, const std::string& new_name);

    /// Nets driven by the instance's output pins, in pin order.
    std::vector<int> fanout_nets(int cell) const;
    /// Same by name; throws ValidationError for an unknown instance.
    std::vector<int> fanout_nets(const std::string& instance) const;

    bool is_ff(int cell, const CellLibrary& lib) const;
    bool is_sequential(const CellLibrary& lib) const;

    /// Topological order of the combinational cells (FF outputs and PIs are
    /// sources). Throws ValidationError on a combinational cycle.
    std::vector<int> comb_topo_order(const CellLibrary& lib) const;

    /**
     * Structural checks: unique names, exactly one driver per net, cell pins
     * covering exactly the library pins, combinational acyclicity, asset names
     * resolving to FF instances. Dangling (sink-less, non-PO) nets are
     * warnings since locking intermediates transiently dangle.
     */
    ValidationIssues validate(const CellLibrary& lib) const;
    /// validate() and throw ValidationError on the first error.
    void ensure_valid(const CellLibrary& lib) const;

    /// Sum of cell widths, the placement demand in sites.
    long long total_cell_width(const CellLibrary& lib) const;

private:
    std::unordered_map<std::string, int> net_index_;
    std::unordered_map<std::string, int> cell_index_;
};

} // namespace tromux
