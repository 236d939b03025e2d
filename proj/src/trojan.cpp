#include "tromux/trojan.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tromux/flow.hpp"
#include "tromux/netlist_io.hpp"
#include "tromux/util.hpp"

namespace tromux {

using ordered_json = nlohmann::ordered_json;

const char* to_string(PayloadMode m) {
    switch (m) {
    case PayloadMode::leak: return "leak";
    case PayloadMode::fault_xor: return "fault-xor";
    case PayloadMode::fault_mux: return "fault-mux";
    case PayloadMode::none: return "none";
    }
    return "?";
}

PayloadMode parse_payload_mode(const std::string& s) {
    if (s == "leak") return PayloadMode::leak;
    if (s == "fault-xor") return PayloadMode::fault_xor;
    if (s == "fault-mux") return PayloadMode::fault_mux;
    if (s == "none") return PayloadMode::none;
    throw ValidationError("unknown payload mode: " + s);
}

TrojanSpec parse_trojan_spec(const std::string& text, const CellLibrary& lib) {
    TrojanSpec s;
    s.trigger_inputs = -1;
    std::istringstream in(text);
    std::string line, body;
    bool in_body = false, seen_body = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (in_body) {
            if (trim(line) == "END") {
                in_body = false;
                continue;
            }
            body += line;
            body += '\n';
            continue;
        }
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        const std::string where = "trojan spec line " + std::to_string(lineno) + ": ";
        if (tokens[0] == "TROJAN") {
            if (tokens.size() != 2) throw ValidationError(where + "expected TROJAN <name>");
            s.name = tokens[1];
        } else if (tokens[0] == "TRIGGERS") {
            if (tokens.size() != 2) throw ValidationError(where + "expected TRIGGERS <count>");
            try {
                s.trigger_inputs = std::stoi(tokens[1]);
            } catch (const std::exception&) {
                throw ValidationError(where + "bad trigger count");
            }
        } else if (tokens[0] == "PAYLOAD") {
            if (tokens.size() != 2) throw ValidationError(where + "expected PAYLOAD <mode>");
            s.payload = parse_payload_mode(tokens[1]);
        } else if (tokens[0] == "TARGETS") {
            if (tokens.size() == 2 && tokens[1] == "any")
                s.targets.clear();
            else
                s.targets.assign(tokens.begin() + 1, tokens.end());
        } else if (tokens[0] == "BEGIN") {
            if (seen_body) throw ValidationError(where + "duplicate fragment");
            in_body = seen_body = true;
        } else {
            throw ValidationError(where + "unknown directive " + tokens[0]);
        }
    }
    if (in_body) throw ValidationError("trojan spec: BEGIN without END");
    if (!seen_body) throw ValidationError("trojan spec: missing BEGIN/END fragment");
    if (s.name.empty()) throw ValidationError("trojan spec: missing TROJAN name");
    if (starts_with(s.name, kReservedPrefix))
        throw ValidationError("trojan name may not use the reserved prefix " + kReservedPrefix);
    for (char c : s.name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
            throw ValidationError("trojan name must be alphanumeric: " + s.name);
    if (s.trigger_inputs < 1) throw ValidationError("trojan spec: TRIGGERS must be >= 1");

    s.fragment = parse_bench(body, lib);
    s.fragment.ensure_valid(lib);
    int pis = int(s.fragment.primary_inputs.size());
    int pos = int(s.fragment.primary_outputs.size());
    if (pis < s.trigger_inputs)
        throw ValidationError("trojan spec: fragment has fewer inputs than TRIGGERS");
    switch (s.payload) {
    case PayloadMode::leak:
        if (pos < 1) throw ValidationError("leak payload needs at least one fragment output");
        break;
    case PayloadMode::fault_xor:
        if (pos < 1) throw ValidationError("fault-xor payload needs a fragment output");
        break;
    case PayloadMode::fault_mux:
        if (pos < 2)
            throw ValidationError("fault-mux payload needs (select, value) fragment outputs");
        break;
    case PayloadMode::none:
        if (pis != s.trigger_inputs)
            throw ValidationError("payload none leaves non-trigger fragment inputs unbound");
        break;
    }
    return s;
}

namespace {

bool is_key_pi_name(const std::string& nm) {
    const std::string prefix = kReservedPrefix + "key";
    if (!starts_with(nm, prefix)) return false;
    std::string rest = nm.substr(prefix.size());
    return !rest.empty() &&
           std::all_of(rest.begin(), rest.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

// nets an attacker would never pick as triggers: the key chain itself plus
// the chain's data/load inputs (all quiet by construction)
std::set<int> key_infrastructure_nets(const Netlist& n) {
    std::set<int> out;
    for (const auto& inst : n.key_chain)
        for (int net : n.fanout_nets(inst)) out.insert(net);
    if (!n.key_data_pi.empty()) {
        int d = n.net_id(n.key_data_pi);
        if (d >= 0) out.insert(d);
    }
    if (!n.key_load_pi.empty()) {
        int l = n.net_id(n.key_load_pi);
        if (l >= 0) out.insert(l);
    }
    for (int pi : n.primary_inputs)
        if (is_key_pi_name(n.net(pi).name)) out.insert(pi);
    return out;
}

struct ResolvedTargets {
    std::vector<int> tap_nets;    // observable asset nets, one per target
    std::vector<int> fault_cells; // the asset instances behind them
};

ResolvedTargets resolve_targets(const Netlist& n, const std::vector<std::string>& names) {
    ResolvedTargets r;
    std::set<int> seen;
    auto push = [&](int cell) {
        if (!seen.insert(cell).second)
            throw ValidationError("duplicate payload target: " + n.cell(cell).name);
        auto outs = n.fanout_nets(cell);
        if (outs.empty()) throw ValidationError("target has no output net: " + n.cell(cell).name);
        r.fault_cells.push_back(cell);
        r.tap_nets.push_back(outs[0]);
    };
    std::set<std::string> asset_set(n.assets.begin(), n.assets.end());
    if (names.empty()) {
        for (const auto& a : n.assets) push(n.cell_id(a));
    } else {
        for (const auto& nm : names) {
            int ci = n.cell_id(nm);
            if (ci < 0) {
                int net = n.net_id(nm);
                if (net >= 0) ci = n.net(net).driver_cell;
            }
            if (ci < 0 || !asset_set.count(n.cell(ci).name))
                throw ValidationError("payload target is not an asset: " + nm);
            push(ci);
        }
    }
    if (r.fault_cells.empty()) throw ValidationError("no asset nets present");
    return r;
}

} // namespace

InsertionResult insert_trojan(const Netlist& n, const PlacementGrid& grid, const TrojanSpec& spec,
                              const ToggleProfile& profile, const CellLibrary& lib, uint64_t seed,
                              const StaOptions& sta) {
    InsertionResult res;
    InsertionReport& rep = res.report;
    rep.trojan = spec.name;
    rep.seed = seed;

    if (profile.tpc.size() != n.nets.size())
        throw ValidationError("toggle profile does not match the netlist");
    const Netlist& frag = spec.fragment;
    ResolvedTargets targets = resolve_targets(n, spec.targets);

    // trigger nets: lowest TPC outside the key infrastructure and clocks
    std::set<int> excluded = key_infrastructure_nets(n);
    for (int c : n.clock_nets) excluded.insert(c);
    std::vector<int> candidates;
    for (int i = 0; i < int(n.nets.size()); ++i)
        if (!excluded.count(i)) candidates.push_back(i);
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        if (profile.tpc[a] != profile.tpc[b]) return profile.tpc[a] < profile.tpc[b];
        return n.net(a).name < n.net(b).name;
    });
    if (int(candidates.size()) < spec.trigger_inputs)
        throw ValidationError("not enough nets to bind the trigger inputs");
    std::vector<int> trigger_nets(candidates.begin(), candidates.begin() + spec.trigger_inputs);

    // merge the fragment under the name prefix
    Netlist m = n;
    const std::string prefix = spec.name + "_";
    std::vector<int> net_map(frag.nets.size(), -1);
    for (size_t i = 0; i < frag.primary_inputs.size(); ++i) {
        int fnet = frag.primary_inputs[i];
        const std::string& fname = frag.net(fnet).name;
        int bound;
        if (int(i) < spec.trigger_inputs) {
            bound = trigger_nets[i];
            rep.trigger_bindings.push_back({fname, n.net(bound).name});
        } else {
            int j = int(i) - spec.trigger_inputs;
            bound = targets.tap_nets[j % targets.tap_nets.size()];
            rep.payload_bindings.push_back({fname, n.net(bound).name});
        }
        net_map[fnet] = bound;
    }
    for (size_t fi = 0; fi < frag.nets.size(); ++fi) {
        if (net_map[fi] >= 0) continue;
        std::string nm = prefix + frag.net(fi).name;
        if (m.net_id(nm) >= 0) throw ValidationError("trojan net name collides: " + nm);
        net_map[fi] = m.add_net(nm);
    }
    int first_new_cell = int(m.cells.size());
    for (const auto& fc : frag.cells) {
        std::string cn = prefix + fc.name;
        if (m.cell_id(cn) >= 0) throw ValidationError("trojan instance name collides: " + cn);
        int id = m.add_cell(cn, fc.type);
        m.cell(id).origin = Origin::trojan;
        for (const auto& [pin, fnet] : fc.pins) m.connect(id, pin, net_map[fnet], lib);
    }

    // payload hookup
    std::vector<int> fout;
    for (int po : frag.primary_outputs) {
        if (frag.net(po).is_primary_input)
            throw ValidationError("fragment output must be fragment-driven");
        fout.push_back(net_map[po]);
    }
    if (spec.payload == PayloadMode::leak) {
        for (int net : fout) m.mark_primary_output(net);
    } else if (spec.payload == PayloadMode::fault_xor || spec.payload == PayloadMode::fault_mux) {
        const CellType& xt = lib.at("XOR2");
        const CellType& mt = lib.at("MUX2");
        for (size_t j = 0; j < targets.fault_cells.size(); ++j) {
            int a = targets.fault_cells[j];
            const CellType& at = lib.at(m.cell(a).type);
            const std::string dpin = at.inputs[0];
            int d_old = m.cell(a).pin_net(dpin);
            std::string inj_name = prefix + "inj" + std::to_string(j);
            if (m.net_id(inj_name) >= 0 || m.cell_id(inj_name) >= 0)
                throw ValidationError("trojan splice name collides: " + inj_name);
            int inj = m.add_net(inj_name);
            m.disconnect(a, dpin, lib);
            if (spec.payload == PayloadMode::fault_xor) {
                int src = fout[j % fout.size()];
                int g = m.add_cell(inj_name, xt.name);
                m.cell(g).origin = Origin::trojan;
                m.connect(g, xt.inputs[0], d_old, lib);
                m.connect(g, xt.inputs[1], src, lib);
                m.connect(g, xt.outputs[0], inj, lib);
                rep.payload_bindings.push_back({m.net(src).name, m.cell(a).name});
            } else {
                int g = m.add_cell(inj_name, mt.name);
                m.cell(g).origin = Origin::trojan;
                m.connect(g, mt.inputs[0], d_old, lib);   // select=0 keeps the benign value
                m.connect(g, mt.inputs[1], fout[1], lib);
                m.connect(g, mt.inputs[2], fout[0], lib);
                m.connect(g, mt.outputs[0], inj, lib);
                rep.payload_bindings.push_back({m.net(fout[1]).name, m.cell(a).name});
            }
            m.connect(a, dpin, inj, lib);
        }
    }
    m.ensure_valid(lib);

    // centroid of everything the trojan touches, from the victim placement
    std::set<std::string> anchors;
    auto add_net_anchors = [&](int net) {
        const Net& nd = n.net(net);
        if (nd.driver_cell >= 0) anchors.insert(n.cell(nd.driver_cell).name);
        for (const auto& s : nd.sinks) anchors.insert(n.cell(s.cell).name);
    };
    for (int t : trigger_nets) add_net_anchors(t);
    for (int t : targets.tap_nets) add_net_anchors(t);
    for (int c : targets.fault_cells) anchors.insert(n.cell(c).name);
    double cr = 0, cs = 0;
    int cnt = 0;
    for (const auto& a : anchors) {
        if (!grid.has(a)) continue;
        const Placement& p = grid.location(a);
        cr += p.row;
        cs += p.site + (p.width - 1) / 2.0;
        ++cnt;
    }
    if (cnt) {
        cr /= cnt;
        cs /= cnt;
    } else {
        cr = (grid.rows() - 1) / 2.0;
        cs = (grid.sites_per_row() - 1) / 2.0;
    }

    // greedy nearest-centroid placement of the new cells, benign cells fixed
    PlacementGrid g2 = grid;
    int shortfall = 0, used = 0;
    for (int ci = first_new_cell; ci < int(m.cells.size()); ++ci) {
        const CellInstance& c = m.cell(ci);
        int w = lib.at(c.type).width;
        bool found = false;
        double best_cost = 0;
        int best_r = 0, best_s = 0;
        for (int r = 0; r < g2.rows(); ++r) {
            for (const auto& [start, len] : g2.free_intervals(r)) {
                if (len < w) continue;
                int smin = start, smax = start + len - w;
                int s = int(std::llround(cs - (w - 1) / 2.0));
                s = std::max(smin, std::min(smax, s));
                double cost = std::abs(r - cr) + std::abs(s + (w - 1) / 2.0 - cs);
                if (!found || cost < best_cost) {
                    found = true;
                    best_cost = cost;
                    best_r = r;
                    best_s = s;
                }
            }
        }
        if (!found) {
            shortfall += w;
            continue;
        }
        g2.place_instance(c.name, best_r, best_s, w);
        rep.locations.push_back({c.name, best_r, best_s});
        used += w;
    }
    rep.sites_used = used;
    rep.placement_shortfall = shortfall;
    rep.placed = shortfall == 0;
    if (!rep.placed) {
        rep.locations.clear();
        return res; // inputs untouched; the report carries the shortfall
    }

    TimingReport before = run_sta(n, lib, sta);
    TimingReport after = run_sta(m, lib, sta);
    rep.wns_delta = after.wns - before.wns;
    rep.tns_delta = after.tns - before.tns;
    rep.wirelength_delta = estimated_wirelength(g2, m) - estimated_wirelength(grid, n);
    rep.tns_threshold_exceeded = std::abs(after.tns) > 0.2 * sta.clock_period;
    res.netlist = std::move(m);
    res.grid = std::move(g2);
    return res;
}

std::string InsertionReport::to_json() const {
    ordered_json j;
    j["trojan"] = trojan;
    j["outcome"] = placed ? "placed" : "failed";
    j["seed"] = seed;
    j["sites_used"] = sites_used;
    j["violations"]["placement_shortfall"] = placement_shortfall;
    j["violations"]["wns_delta"] = wns_delta;
    j["violations"]["tns_delta"] = tns_delta;
    j["violations"]["wirelength_delta"] = wirelength_delta;
    j["violations"]["tns_threshold_exceeded"] = tns_threshold_exceeded;
    auto bind_list = [](const std::vector<std::pair<std::string, std::string>>& v) {
        ordered_json arr = ordered_json::array();
        for (const auto& [from, to] : v) {
            ordered_json e;
            e["from"] = from;
            e["to"] = to;
            arr.push_back(e);
        }
        return arr;
    };
    j["trigger_bindings"] = bind_list(trigger_bindings);
    j["payload_bindings"] = bind_list(payload_bindings);
    ordered_json locs = ordered_json::array();
    for (const auto& l : locations) {
        ordered_json e;
        e["instance"] = l.instance;
        e["row"] = l.row;
        e["site"] = l.site;
        locs.push_back(e);
    }
    j["locations"] = locs;
    return j.dump(2) + "\n";
}

std::string evaluate_payload_utility(const Netlist& design, const CellLibrary& lib,
                                     const std::vector<std::string>& tapped_nets,
                                     const std::vector<uint8_t>& key, bool key_known,
                                     int cycles, uint64_t seed) {
    if (tapped_nets.empty()) throw ValidationError("no tapped nets given");
    for (const auto& t : tapped_nets)
        if (design.net_id(t) < 0) throw ValidationError("unknown tapped net: " + t);
    if (key.empty())
        return "no locking: tapped values are the plain asset values, useful without any key";
    if (key_known) return "key known: tapped values decode directly against the correct key";

    SimOptions right = correct_key_options(design, key);
    std::vector<uint8_t> flipped(key);
    for (auto& b : flipped) b ^= 1;
    SimOptions wrong = correct_key_options(design, flipped);
    int width = int(SimEngine(design, lib, right).data_pis().size());
    auto vecs = random_vectors(cycles, width, seed);
    SimTrace ta = simulate(design, lib, vecs, right);
    SimTrace tb = simulate(design, lib, vecs, wrong);

    std::ostringstream out;
    out << "key unknown: ";
    bool dependent = false;
    for (size_t i = 0; i < tapped_nets.size(); ++i) {
        int id = design.net_id(tapped_nets[i]);
        int diff = 0;
        for (int c = 0; c < cycles; ++c) diff += ta.values[c][id] != tb.values[c][id] ? 1 : 0;
        if (i) out << "; ";
        out << tapped_nets[i] << " differs in " << diff << "/" << cycles
            << " cycles across key polarities";
        dependent = dependent || diff > 0;
    }
    out << (dependent ? " (observation is key-dependent)" : " (observation is key-independent)");
    return out.str();
}

} // namespace tromux
