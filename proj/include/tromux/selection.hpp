#pragma once

#include <map>
#include <string>
#include <vector>

#include "tromux/cell_library.hpp"
#include "tromux/netlist.hpp"
#include "tromux/sim.hpp"
#include "tromux/timing.hpp"
#include "tromux/variant.hpp"

namespace tromux {

/**
 * State threaded through scoring and selection: the toggle profile, the
 * timing report's paths with mutable tracked slacks (pessimistically lowered
 * as cells are picked), and the per-type locked census for balancing.
 */
struct ScoreContext {
    const ToggleProfile* profile = nullptr;
    double sigma = 0.0;        // per-pick slack penalty
    double ms_fallback = -0.5; // min-slack of nets no tracked path covers

    std::vector<double> path_slacks;           // tracked slack per path
    std::vector<std::vector<int>> path_nets;   // nets covered by each path
    std::vector<std::vector<int>> net_paths;   // net -> covering path ids
    std::map<std::string, int> locked_counts;  // original type -> locked count

    static ScoreContext build(const Netlist& n, const CellLibrary& lib,
                              const ToggleProfile& profile, const TimingReport& rep,
                              Variant variant);
};

/// Net-level priority: sigmoid(2 * min tracked slack) * 1/(TPC + 1e-3).
double net_score(const Netlist& n, int net, const ScoreContext& ctx);

/// Cell priority: sum of net_score over the cell's fanout nets.
double cell_score(const Netlist& n, int cell, const ScoreContext& ctx);

struct SelectionResult {
    std::vector<int> cells;  // picked instances, selection order
    std::string trace;       // "rank instance score" per pick
    bool balance_stopped = false; // ended early with all candidates filtered
};

/**
 * Iterative greedy selection: each round scores all remaining candidates
 * against the tracked slacks, picks the maximum (ties: lexicographic instance
 * name), then subtracts sigma once from every tracked path that covers any
 * fanout net of the pick. Candidates are unlocked, original-origin cells not
 * driving clock nets. In balanced mode a candidate whose pick would leave
 * |count(type)+1 - count(complement)| > 1 is skipped for that round only.
 * Score evaluation within a round is read-only and runs in parallel when
 * requested; results are identical either way.
 */
SelectionResult select_cells(const Netlist& n, const CellLibrary& lib, ScoreContext& ctx,
                             int key_budget, bool balanced, bool parallel = true);

} // namespace tromux
