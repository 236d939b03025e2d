#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tromux/cell_library.hpp"
#include "tromux/netlist.hpp"
#include "tromux/timing.hpp"
#include "tromux/variant.hpp"

namespace tromux {

struct Placement {
    int row = 0;
    int site = 0;
    int width = 0;
};

// Rows of fixed-width sites. Every placed instance occupies a contiguous
// span of sites in a single row; sites not covered by any instance are open.
class PlacementGrid {
public:
    PlacementGrid() = default;
    PlacementGrid(int rows, int sites_per_row);

    int rows() const { return rows_; }
    int sites_per_row() const { return spr_; }
    int total_sites() const { return rows_ * spr_; }
    int occupied_sites() const { return occupied_; }
    int open_sites() const { return total_sites() - occupied_; }

    bool has(const std::string& name) const { return loc_.count(name) > 0; }
    const Placement& location(const std::string& name) const;
    bool span_free(int row, int site, int width) const;
    void place_instance(const std::string& name, int row, int site, int width);
    void remove_instance(const std::string& name);

    // maximal free spans of one row as (start_site, length), ascending
    std::vector<std::pair<int, int>> free_intervals(int row) const;
    // placed instance names ordered by (row, start site)
    std::vector<std::string> placed_instances() const;

private:
    int rows_ = 0;
    int spr_ = 0;
    int occupied_ = 0;
    std::vector<int> occ_; // flat row-major site map, -1 open, else name index
    std::vector<std::string> names_;
    std::unordered_map<std::string, Placement> loc_;
};

struct LayoutMetrics {
    double utilization = 0.0;
    int open_sites = 0;
    double estimated_wirelength = 0.0; // HPWL sum in (site, row) units
    double total_track_length = 0.0;
    double track_utilization = 0.0;
    double wns = 0.0;
    double tns = 0.0;
};

// Grid sized so total_sites = ceil(sum of widths / target utilization),
// factored into the rows x sites_per_row divisor pair nearest to square.
PlacementGrid build_grid(const Netlist& n, const CellLibrary& lib, double target_utilization);

// Deterministic connectivity-aware greedy placement: instances ordered by
// BFS from the primary inputs, each placed at the free span minimizing the
// half-perimeter bound of its already-placed neighbors plus itself
// (ties: lowest row, then lowest site); first-fit when no neighbor is
// placed yet. The seed is recorded by callers for provenance but the
// algorithm itself is deterministic and does not consume randomness.
PlacementGrid place(const PlacementGrid& shape, const Netlist& n, const CellLibrary& lib,
                    uint64_t seed);

LayoutMetrics metrics(const PlacementGrid& grid, const Netlist& n, const TimingReport& rep,
                      double layer_factor = 2.0);

// HPWL over connected placed instances of every net, in site/row units.
double estimated_wirelength(const PlacementGrid& grid, const Netlist& n);

double eq1_denominator(const CellLibrary& lib, Variant variant, double alpha);

// Key-bit budget that fits the open sites: floor(open / denominator), where
// the denominator is width(INV)+width(MUX2)+width(smallest FF)+alpha for the
// mux variant and width(XOR2)+width(smallest FF)+alpha for the xor variant.
int key_length(int open_sites, const CellLibrary& lib, Variant variant, double alpha);

// Text dump: "GRID rows sites_per_row" then one
// "ROW r SITE s INSTANCE name" line per instance, ordered by (row, site).
std::string write_grid(const PlacementGrid& grid);
PlacementGrid parse_grid(const std::string& text, const Netlist& n, const CellLibrary& lib);

} // namespace tromux
