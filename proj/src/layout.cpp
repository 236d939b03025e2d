#include "tromux/layout.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "tromux/util.hpp"

namespace tromux {

PlacementGrid::PlacementGrid(int rows, int sites_per_row) : rows_(rows), spr_(sites_per_row) {
    if (rows <= 0 || sites_per_row <= 0)
        throw ValidationError("grid dimensions must be positive");
    occ_.assign(size_t(rows) * sites_per_row, -1);
}

const Placement& PlacementGrid::location(const std::string& name) const {
    auto it = loc_.find(name);
    if (it == loc_.end()) throw ValidationError("instance not placed: " + name);
    return it->second;
}

bool PlacementGrid::span_free(int row, int site, int width) const {
    if (row < 0 || row >= rows_ || site < 0 || width <= 0 || site + width > spr_) return false;
    for (int s = site; s < site + width; ++s)
        if (occ_[size_t(row) * spr_ + s] >= 0) return false;
    return true;
}

void PlacementGrid::place_instance(const std::string& name, int row, int site, int width) {
    if (loc_.count(name)) throw ValidationError("instance already placed: " + name);
    if (!span_free(row, site, width))
        throw ValidationError("span not free for " + name + " at row " + std::to_string(row) +
                              " site " + std::to_string(site));
    int idx = int(names_.size());
    names_.push_back(name);
    for (int s = site; s < site + width; ++s) occ_[size_t(row) * spr_ + s] = idx;
    loc_[name] = {row, site, width};
    occupied_ += width;
}

void PlacementGrid::remove_instance(const std::string& name) {
    auto it = loc_.find(name);
    if (it == loc_.end()) throw ValidationError("instance not placed: " + name);
    const Placement& p = it->second;
    for (int s = p.site; s < p.site + p.width; ++s) occ_[size_t(p.row) * spr_ + s] = -1;
    occupied_ -= p.width;
    loc_.erase(it);
}

std::vector<std::pair<int, int>> PlacementGrid::free_intervals(int row) const {
    std::vector<std::pair<int, int>> out;
    int start = -1;
    for (int s = 0; s <= spr_; ++s) {
        bool open = s < spr_ && occ_[size_t(row) * spr_ + s] < 0;
        if (open && start < 0) start = s;
        if (!open && start >= 0) {
            out.push_back({start, s - start});
            start = -1;
        }
    }
    return out;
}

std::vector<std::string> PlacementGrid::placed_instances() const {
    std::vector<std::string> out;
    std::set<int> seen;
    for (int r = 0; r < rows_; ++r)
        for (int s = 0; s < spr_; ++s) {
            int idx = occ_[size_t(r) * spr_ + s];
            if (idx >= 0 && seen.insert(idx).second) out.push_back(names_[idx]);
        }
    return out;
}

PlacementGrid build_grid(const Netlist& n, const CellLibrary& lib, double target_utilization) {
    if (target_utilization <= 0.0 || target_utilization >= 1.0)
        throw ValidationError("target utilization must lie in (0, 1)");
    int total_width = n.total_cell_width(lib);
    if (total_width <= 0) throw ValidationError("netlist has no placeable cells");
    int total = int(std::ceil(double(total_width) / target_utilization));
    int best_r = 1;
    double best_gap = std::abs(1.0 - double(total));
    for (int r = 1; r <= total; ++r) {
        if (total % r != 0) continue;
        double gap = std::abs(double(r) - double(total) / r);
        if (gap < best_gap) {
            best_gap = gap;
            best_r = r;
        }
    }
    return PlacementGrid(best_r, total / best_r);
}

namespace {

// BFS over nets from the primary inputs; cells unreached from any PI
// (e.g. closed FF loops) are appended in index order.
std::vector<int> placement_order(const Netlist& n) {
    std::vector<int> order;
    std::vector<bool> visited(n.cells.size(), false);
    std::deque<int> queue(n.primary_inputs.begin(), n.primary_inputs.end());
    std::vector<bool> net_seen(n.nets.size(), false);
    for (int pi : n.primary_inputs) net_seen[pi] = true;
    while (!queue.empty()) {
        int net = queue.front();
        queue.pop_front();
        for (const auto& sink : n.net(net).sinks) {
            if (visited[sink.cell]) continue;
            visited[sink.cell] = true;
            order.push_back(sink.cell);
            for (const auto& [pin, out] : n.cell(sink.cell).pins) {
                if (out < 0) continue;
                if (n.net(out).driver_cell != sink.cell) continue;
                if (!net_seen[out]) {
                    net_seen[out] = true;
                    queue.push_back(out);
                }
            }
        }
    }
    for (size_t ci = 0; ci < n.cells.size(); ++ci)
        if (!visited[ci]) order.push_back(int(ci));
    return order;
}

} // namespace

namespace {

bool attempt_place(PlacementGrid& grid, const Netlist& n, const CellLibrary& lib,
                   const std::vector<int>& order, bool cost_driven) {
    // adjacency: other cells sharing any net with the given cell
    std::vector<std::vector<int>> neighbors;
    if (cost_driven) {
        neighbors.assign(n.cells.size(), {});
        for (const Net& net : n.nets) {
            std::vector<int> members;
            if (net.driver_cell >= 0) members.push_back(net.driver_cell);
            for (const auto& s : net.sinks) members.push_back(s.cell);
            std::sort(members.begin(), members.end());
            members.erase(std::unique(members.begin(), members.end()), members.end());
            for (int a : members)
                for (int b : members)
                    if (a != b) neighbors[a].push_back(b);
        }
    }

    for (int ci : order) {
        const CellInstance& c = n.cell(ci);
        int width = lib.at(c.type).width;

        int rmin = 0, rmax = 0, smin = 0, smax = 0;
        bool have_nb = false;
        if (cost_driven)
            for (int nb : neighbors[ci]) {
                if (!grid.has(n.cell(nb).name)) continue;
                const Placement& p = grid.location(n.cell(nb).name);
                if (!have_nb) {
                    rmin = rmax = p.row;
                    smin = smax = p.site;
                    have_nb = true;
                } else {
                    rmin = std::min(rmin, p.row);
                    rmax = std::max(rmax, p.row);
                    smin = std::min(smin, p.site);
                    smax = std::max(smax, p.site);
                }
            }

        int best_row = -1, best_site = -1;
        long best_cost = 0;
        for (int r = 0; r < grid.rows(); ++r) {
            for (const auto& [start, len] : grid.free_intervals(r)) {
                if (len < width) continue;
                int hi = start + len - width;
                int s;
                long cost;
                if (!have_nb) {
                    s = start;
                    cost = 0;
                } else {
                    // x-span cost is flat for s in [smin, smax] and grows
                    // linearly outside, so the lowest optimal site in the
                    // interval is the window clamp
                    if (hi < smin)
                        s = hi;
                    else if (start > smax)
                        s = start;
                    else
                        s = std::max(start, smin);
                    long xspan = std::max(smax, s) - std::min(smin, s);
                    long yspan = std::max(rmax, r) - std::min(rmin, r);
                    cost = xspan + yspan;
                }
                if (best_row < 0 || cost < best_cost) {
                    best_row = r;
                    best_site = s;
                    best_cost = cost;
                }
                if (!have_nb) break; // first fit: lowest row and site wins
            }
            if (!have_nb && best_row >= 0) break;
        }
        if (best_row < 0) return false;
        grid.place_instance(c.name, best_row, best_site, width);
    }
    return true;
}

} // namespace

PlacementGrid place(const PlacementGrid& shape, const Netlist& n, const CellLibrary& lib,
                    uint64_t seed) {
    (void)seed;
    int need = int(n.total_cell_width(lib)) - shape.total_sites();
    if (need > 0)
        throw InfeasibleError("placement failed: need " + std::to_string(need) + " more sites");

    PlacementGrid grid(shape.rows(), shape.sites_per_row());
    if (attempt_place(grid, n, lib, placement_order(n), true)) return grid;

    // tight grids can defeat the wirelength-driven order through
    // fragmentation; retry packing widest-first with plain first-fit
    std::vector<int> by_width = placement_order(n);
    std::stable_sort(by_width.begin(), by_width.end(), [&](int a, int b) {
        return lib.at(n.cell(a).type).width > lib.at(n.cell(b).type).width;
    });
    PlacementGrid packed(shape.rows(), shape.sites_per_row());
    if (attempt_place(packed, n, lib, by_width, false)) return packed;
    throw InfeasibleError("placement failed: free space too fragmented for the widest cells");
}

double estimated_wirelength(const PlacementGrid& grid, const Netlist& n) {
    double total = 0.0;
    for (const Net& net : n.nets) {
        std::vector<int> members;
        if (net.driver_cell >= 0) members.push_back(net.driver_cell);
        for (const auto& s : net.sinks) members.push_back(s.cell);
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        bool have = false;
        int rmin = 0, rmax = 0, smin = 0, smax = 0;
        for (int ci : members) {
            if (!grid.has(n.cell(ci).name)) continue;
            const Placement& p = grid.location(n.cell(ci).name);
            if (!have) {
                rmin = rmax = p.row;
                smin = smax = p.site;
                have = true;
            } else {
                rmin = std::min(rmin, p.row);
                rmax = std::max(rmax, p.row);
                smin = std::min(smin, p.site);
                smax = std::max(smax, p.site);
            }
        }
        if (have) total += double(smax - smin) + double(rmax - rmin);
    }
    return total;
}

LayoutMetrics metrics(const PlacementGrid& grid, const Netlist& n, const TimingReport& rep,
                      double layer_factor) {
    LayoutMetrics m;
    m.open_sites = grid.open_sites();
    m.utilization = double(grid.occupied_sites()) / double(grid.total_sites());
    m.estimated_wirelength = estimated_wirelength(grid, n);
    m.total_track_length = double(grid.total_sites()) * layer_factor;
    m.track_utilization =
        m.total_track_length > 0 ? m.estimated_wirelength / m.total_track_length : 0.0;
    m.wns = rep.wns;
    m.tns = rep.tns;
    return m;
}

double eq1_denominator(const CellLibrary& lib, Variant variant, double alpha) {
    if (alpha < 0) throw ValidationError("alpha must be non-negative");
    double ff = lib.smallest_ff_width();
    if (variant == Variant::mux) return lib.at("INV").width + lib.at("MUX2").width + ff + alpha;
    return lib.at("XOR2").width + ff + alpha;
}

int key_length(int open_sites, const CellLibrary& lib, Variant variant, double alpha) {
    if (open_sites <= 0) return 0;
    return int(std::floor(double(open_sites) / eq1_denominator(lib, variant, alpha)));
}

std::string write_grid(const PlacementGrid& grid) {
    std::ostringstream out;
    out << "GRID " << grid.rows() << " " << grid.sites_per_row() << "\n";
    for (const std::string& name : grid.placed_instances()) {
        const Placement& p = grid.location(name);
        out << "ROW " << p.row << " SITE " << p.site << " INSTANCE " << name << "\n";
    }
    return out.str();
}

PlacementGrid parse_grid(const std::string& text, const Netlist& n, const CellLibrary& lib) {
    std::istringstream in(text);
    std::string line;
    PlacementGrid grid;
    bool have_header = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto f = split_ws(line);
        if (f[0] == "GRID") {
            if (f.size() != 3) throw ValidationError("malformed GRID line: " + line);
            grid = PlacementGrid(std::stoi(f[1]), std::stoi(f[2]));
            have_header = true;
        } else if (f[0] == "ROW") {
            if (!have_header) throw ValidationError("grid dump missing GRID header");
            if (f.size() != 6 || f[2] != "SITE" || f[4] != "INSTANCE")
                throw ValidationError("malformed placement line: " + line);
            int ci = n.cell_id(f[5]);
            if (ci < 0) throw ValidationError("grid references unknown instance " + f[5]);
            int width = lib.at(n.cell(ci).type).width;
            grid.place_instance(f[5], std::stoi(f[1]), std::stoi(f[3]), width);
        } else {
            throw ValidationError("unrecognized grid line: " + line);
        }
    }
    if (!have_header) throw ValidationError("grid dump missing GRID header");
    return grid;
}

} // namespace tromux
