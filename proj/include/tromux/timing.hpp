#pragma once

#include <string>
#include <vector>

#include "tromux/cell_library.hpp"
#include "tromux/netlist.hpp"

namespace tromux {

// One combinational path from a launch point to a capture point.
// nets lists every net along the path, startpoint first, endpoint last.
struct TimingPath {
    double delay = 0.0;
    double slack = 0.0;
    std::string startpoint; // PI net or driving FF instance
    std::string endpoint;   // PO net or capturing FF instance
    std::vector<int> nets;
};

struct TimingReport {
    double clock_period = 0.0;
    double wns = 0.0; // min slack over all reported paths, 0 if no paths
    double tns = 0.0; // sum of negative slacks over reported paths
    std::vector<TimingPath> paths; // sorted by ascending slack, ties by endpoint then start
};

struct StaOptions {
    double clock_period = 10.0;
    int path_limit = 8; // paths tracked per endpoint
};

// Static timing over the load-independent per-arc delay model. Delays
// accumulate along combinational arcs only; FF outputs and primary inputs
// launch at t=0, FF data/enable pins and primary outputs capture. The top
// path_limit paths per endpoint are enumerated exactly by a k-longest DP
// over nets (keeping the k longest partial paths per net dominates every
// endpoint's true top k because path suffixes extend net prefixes).
TimingReport run_sta(const Netlist& n, const CellLibrary& lib, const StaOptions& opt = {},
                     bool parallel = true);
TimingReport run_sta_serial(const Netlist& n, const CellLibrary& lib, const StaOptions& opt = {});

// Minimum slack over the report's paths that pass through the given net,
// or fallback when no tracked path covers it.
double min_slack_through(const TimingReport& rep, int net, double fallback = -0.5);

// Plain-text dump: one "slack delay startpoint endpoint net,net,..." line
// per path, then a "WNS=<w> TNS=<t>" trailer.
std::string write_timing_report(const Netlist& n, const TimingReport& rep);

} // namespace tromux
