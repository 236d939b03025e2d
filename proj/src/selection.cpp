#include "tromux/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tromux/util.hpp"

namespace tromux {

ScoreContext ScoreContext::build(const Netlist& n, const CellLibrary& lib,
                                 const ToggleProfile& profile, const TimingReport& rep,
                                 Variant variant) {
    ScoreContext ctx;
    ctx.profile = &profile;
    ctx.sigma = variant == Variant::mux ? lib.sigma_mux() : lib.sigma_xor();
    ctx.net_paths.assign(n.nets.size(), {});
    for (size_t p = 0; p < rep.paths.size(); ++p) {
        ctx.path_slacks.push_back(rep.paths[p].slack);
        ctx.path_nets.push_back(rep.paths[p].nets);
        for (int net : rep.paths[p].nets) ctx.net_paths[net].push_back(int(p));
    }
    for (const CellInstance& c : n.cells)
        if (c.locked && c.origin == Origin::original) ctx.locked_counts[c.type]++;
    return ctx;
}

double net_score(const Netlist& n, int net, const ScoreContext& ctx) {
    if (net < 0 || net >= int(n.nets.size())) throw ValidationError("net_score: unknown net");
    double ms = ctx.ms_fallback;
    bool covered = false;
    for (int p : ctx.net_paths[net]) {
        if (!covered || ctx.path_slacks[p] < ms) ms = ctx.path_slacks[p];
        covered = true;
    }
    double timing_term = 1.0 / (1.0 + std::exp(-2.0 * ms));
    double tpc_term = 1.0 / (ctx.profile->tpc[net] + 1e-3);
    return timing_term * tpc_term;
}

double cell_score(const Netlist& n, int cell, const ScoreContext& ctx) {
    double sum = 0.0;
    for (int net : n.fanout_nets(cell)) sum += net_score(n, net, ctx);
    return sum;
}

SelectionResult select_cells(const Netlist& n, const CellLibrary& lib, ScoreContext& ctx,
                             int key_budget, bool balanced, bool parallel) {
    if (key_budget < 0) throw ValidationError("key budget must be >= 0");
    SelectionResult res;
    if (key_budget == 0) return res;

    std::set<int> clock_drivers;
    for (int cn : n.clock_nets)
        if (n.net(cn).driver_cell >= 0) clock_drivers.insert(n.net(cn).driver_cell);

    std::vector<int> candidates;
    for (size_t ci = 0; ci < n.cells.size(); ++ci) {
        const CellInstance& c = n.cells[ci];
        if (c.locked || c.origin != Origin::original) continue;
        if (clock_drivers.count(int(ci))) continue;
        const CellType& t = lib.at(c.type);
        if (t.sequential || t.outputs.size() == 1) candidates.push_back(int(ci));
    }

    std::ostringstream trace;
    trace.precision(9);
    std::vector<char> taken(n.cells.size(), 0);

    for (int round = 0; round < key_budget; ++round) {
        std::vector<double> scores(candidates.size(), 0.0);
#pragma omp parallel for schedule(static) if (parallel)
        for (int i = 0; i < int(candidates.size()); ++i)
            scores[i] = cell_score(n, candidates[i], ctx);

        int pick = -1;
        double pick_score = 0.0;
        for (size_t i = 0; i < candidates.size(); ++i) {
            int ci = candidates[i];
            if (taken[ci]) continue;
            if (balanced) {
                const std::string& type = n.cell(ci).type;
                std::string comp = lib.complement_of(type);
                if (!comp.empty()) {
                    auto cnt = [&](const std::string& t) {
                        auto it = ctx.locked_counts.find(t);
                        return it == ctx.locked_counts.end() ? 0 : it->second;
                    };
                    if (std::abs(cnt(type) + 1 - cnt(comp)) > 1) continue;
                }
            }
            bool better = pick < 0 || scores[i] > pick_score ||
                          (scores[i] == pick_score && n.cell(ci).name < n.cell(pick).name);
            if (better) {
                pick = ci;
                pick_score = scores[i];
            }
        }
        if (pick < 0) {
            res.balance_stopped = true;
            break;
        }

        taken[pick] = 1;
        res.cells.push_back(pick);
        ctx.locked_counts[n.cell(pick).type]++;
        trace << (round + 1) << " " << n.cell(pick).name << " " << pick_score << "\n";

        // lower every tracked path touching the pick's fanout, once per path
        std::set<int> touched;
        for (int net : n.fanout_nets(pick))
            for (int p : ctx.net_paths[net]) touched.insert(p);
        for (int p : touched) ctx.path_slacks[p] -= ctx.sigma;

        candidates.erase(std::remove(candidates.begin(), candidates.end(), pick),
                         candidates.end());
        if (candidates.empty()) break;
    }
    res.trace = trace.str();
    return res;
}

} // namespace tromux
