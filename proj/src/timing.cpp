#include "tromux/timing.hpp"

#include <algorithm>
#include <sstream>

#include "tromux/util.hpp"

namespace tromux {

namespace {

// Partial path ending at a net: total delay plus a backpointer into the
// predecessor net's list for reconstruction.
struct Partial {
    double delay = 0.0;
    int prev_net = -1;
    int prev_rank = -1;
};

struct Endpoint {
    int net;
    std::string name;
};

} // namespace

TimingReport run_sta(const Netlist& n, const CellLibrary& lib, const StaOptions& opt,
                     bool parallel) {
    if (opt.path_limit <= 0) throw ValidationError("path_limit must be positive");
    TimingReport rep;
    rep.clock_period = opt.clock_period;

    // launch nets: primary inputs and FF outputs, each seeded with the
    // zero-length partial so direct PI->PO and FF->FF hops are reported
    std::vector<std::vector<Partial>> lists(n.nets.size());
    std::vector<std::string> launch_name(n.nets.size());
    for (int pi : n.primary_inputs) {
        lists[pi].push_back({});
        launch_name[pi] = n.net(pi).name;
    }
    for (size_t ci = 0; ci < n.cells.size(); ++ci) {
        const CellInstance& c = n.cells[ci];
        if (!lib.at(c.type).sequential) continue;
        for (const auto& [pin, net] : c.pins) {
            if (!lib.at(c.type).is_output(pin)) continue;
            if (net < 0) continue;
            lists[net].push_back({});
            launch_name[net] = c.name;
        }
    }

    // forward k-longest DP in topological order; each output net is filled
    // once by its unique driver, so the result is order-independent
    for (int ci : n.comb_topo_order(lib)) {
        const CellInstance& c = n.cell(ci);
        const CellType& t = lib.at(c.type);
        for (const auto& out_pin : t.outputs) {
            int out_net = c.pin_net(out_pin);
            std::vector<Partial>& dst = lists[out_net];
            for (const auto& in_pin : t.inputs) {
                int in_net = c.pin_net(in_pin);
                double d = t.arc_delay(in_pin, out_pin);
                if (d < 0) continue; // no timing arc for this pin pair
                const auto& src = lists[in_net];
                for (size_t r = 0; r < src.size(); ++r)
                    dst.push_back({src[r].delay + d, in_net, int(r)});
            }
            std::stable_sort(dst.begin(), dst.end(),
                             [](const Partial& a, const Partial& b) { return a.delay > b.delay; });
            if (int(dst.size()) > opt.path_limit) dst.resize(opt.path_limit);
        }
    }

    // capture points: primary outputs, then FF D and EN pins in cell order
    std::vector<Endpoint> endpoints;
    for (int po : n.primary_outputs) endpoints.push_back({po, n.net(po).name});
    for (size_t ci = 0; ci < n.cells.size(); ++ci) {
        const CellInstance& c = n.cells[ci];
        const CellType& t = lib.at(c.type);
        if (!t.sequential) continue;
        endpoints.push_back({c.pin_net("D"), c.name + "/D"});
        if (t.has_enable) endpoints.push_back({c.pin_net("EN"), c.name + "/EN"});
    }

    // per-endpoint reconstruction is independent once the DP is fixed
    std::vector<std::vector<TimingPath>> per_ep(endpoints.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int e = 0; e < int(endpoints.size()); ++e) {
        const Endpoint& ep = endpoints[e];
        const auto& src = lists[ep.net];
        for (size_t r = 0; r < src.size(); ++r) {
            TimingPath p;
            p.delay = src[r].delay;
            p.slack = opt.clock_period - p.delay;
            p.endpoint = ep.name;
            int net = ep.net;
            int rank = int(r);
            while (net >= 0) {
                p.nets.push_back(net);
                const Partial& part = lists[net][rank];
                int pn = part.prev_net;
                rank = part.prev_rank;
                net = pn;
            }
            std::reverse(p.nets.begin(), p.nets.end());
            p.startpoint = launch_name[p.nets.front()];
            per_ep[e].push_back(std::move(p));
        }
    }

    for (auto& v : per_ep)
        for (auto& p : v) rep.paths.push_back(std::move(p));

    std::sort(rep.paths.begin(), rep.paths.end(), [](const TimingPath& a, const TimingPath& b) {
        if (a.slack != b.slack) return a.slack < b.slack;
        if (a.endpoint != b.endpoint) return a.endpoint < b.endpoint;
        if (a.startpoint != b.startpoint) return a.startpoint < b.startpoint;
        return a.nets < b.nets;
    });

    rep.wns = rep.paths.empty() ? 0.0 : rep.paths.front().slack;
    rep.tns = 0.0;
    for (const auto& p : rep.paths) rep.tns += std::min(0.0, p.slack);
    return rep;
}

TimingReport run_sta_serial(const Netlist& n, const CellLibrary& lib, const StaOptions& opt) {
    return run_sta(n, lib, opt, false);
}

double min_slack_through(const TimingReport& rep, int net, double fallback) {
    bool covered = false;
    double ms = 0.0;
    for (const auto& p : rep.paths) {
        if (std::find(p.nets.begin(), p.nets.end(), net) == p.nets.end()) continue;
        if (!covered || p.slack < ms) ms = p.slack;
        covered = true;
    }
    return covered ? ms : fallback;
}

std::string write_timing_report(const Netlist& n, const TimingReport& rep) {
    std::ostringstream out;
    out.precision(9);
    for (const auto& p : rep.paths) {
        out << p.slack << " " << p.delay << " " << p.startpoint << " " << p.endpoint << " ";
        for (size_t i = 0; i < p.nets.size(); ++i) {
            if (i) out << ",";
            out << n.net(p.nets[i]).name;
        }
        out << "\n";
    }
    out << "WNS=" << rep.wns << " TNS=" << rep.tns << "\n";
    return out.str();
}

} // namespace tromux
