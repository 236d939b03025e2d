#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tromux/layout.hpp"
#include "tromux/locking.hpp"
#include "tromux/netlist.hpp"
#include "tromux/selection.hpp"
#include "tromux/sim.hpp"
#include "tromux/timing.hpp"
#include "tromux/variant.hpp"

namespace tromux {

struct FlowConfig {
    Variant variant = Variant::mux;
    bool balanced = true;
    double target_utilization = 0.5;
    double clock_period = 10.0;
    double alpha = 2.0;
    int tpc_cycles = 10000;
    uint64_t tpc_seed = 42;
    // stage-2 toggle data comes from the partially protected layout by
    // default; set to true to profile the baseline netlist instead
    bool tpc_from_baseline = false;
    uint64_t seed = 1;
    double lcn_threshold = 0.1;
    int path_limit = 8;
    double layer_factor = 2.0;
    int max_rounds = 32;
    double ms_fallback = -0.5;
};

// key=value text, one per line, # comments; unknown keys are errors
FlowConfig parse_flow_config(const std::string& text);
std::string write_flow_config(const FlowConfig& cfg);

struct FlowReport {
    std::string design;
    FlowConfig config;
    int grid_rows = 0;
    int grid_sites_per_row = 0;
    LayoutMetrics baseline;
    LayoutMetrics ppl;
    LayoutMetrics final_;
    int key_length_assets = 0;
    int key_length_stage2 = 0;
    int key_length_total = 0;
    double delta_open = 0.0; // (open_final - open_baseline) / open_baseline
    int stage2_rounds = 0;
    int selection_shortfall = 0; // budget the last round could not fill
    std::vector<std::pair<std::string, int>> locked_census; // original type -> count

    std::string to_json() const;
};
FlowReport parse_flow_report(const std::string& json_text);

struct HardenResult {
    Netlist locked;
    Netlist ppl; // checkpoint after stage 1 (equals the input when no assets)
    std::vector<uint8_t> key;
    LockingPlan plan; // resolved, assets first then stage-2 picks
    PlacementGrid grid_baseline;
    PlacementGrid grid_ppl;
    PlacementGrid grid_final;
    TimingReport timing_final;
    ToggleProfile profile_ppl; // stage-2 selection input (empty when unused)
    std::string selection_trace;
    FlowReport report;
};

/**
 * Two-stage hardening on a grid sized once from the input netlist:
 * baseline placement, stage 1 locking every asset FF plus re-placement
 * (the partially protected layout), then stage 2 repeating
 * profile / timing / budget / selection / locking rounds until the
 * key-length budget of the remaining open sites reaches zero or no
 * candidate is left. Deterministic for a given config.
 */
HardenResult harden(const Netlist& input, const std::vector<std::string>& assets,
                    const CellLibrary& lib, const FlowConfig& cfg, bool stage1_only = false);

/// Simulation bindings that hold the key chain at the given key: chain FFs
/// preset, data and load pins pinned to 0.
SimOptions correct_key_options(const Netlist& locked, const std::vector<uint8_t>& key);

} // namespace tromux
