#include "tromux/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tromux/rng.hpp"
#include "tromux/util.hpp"

namespace tromux {

SimEngine::SimEngine(const Netlist& n, const CellLibrary& lib, const SimOptions& opt) : n_(&n) {
    values_.assign(n.nets.size(), 0);
    forced_.assign(n.nets.size(), -1);

    for (const auto& [net, v] : opt.force_nets) {
        int id = n.net_id(net);
        if (id < 0) throw ValidationError("force_nets: unknown net " + net);
        forced_[id] = int8_t(v);
    }

    std::set<int> excluded(n.clock_nets.begin(), n.clock_nets.end());
    for (const auto& [net, v] : opt.pin_const) {
        int id = n.net_id(net);
        if (id < 0) throw ValidationError("pin_const: unknown net " + net);
        if (!n.net(id).is_primary_input)
            throw ValidationError("pin_const: " + net + " is not a primary input");
        if (forced_[id] < 0) forced_[id] = int8_t(v);
        excluded.insert(id);
    }
    for (int pi : n.primary_inputs)
        if (!excluded.count(pi)) data_pis_.push_back(pi);

    for (int ci : n.comb_topo_order(lib)) {
        const CellInstance& c = n.cell(ci);
        const CellType& t = lib.at(c.type);
        CellOp op;
        op.cell = ci;
        op.truth = t.truth;
        for (const auto& pin : t.inputs) op.in_nets.push_back(c.pin_net(pin));
        op.out_net = c.pin_net(t.outputs[0]);
        comb_.push_back(std::move(op));
    }

    for (size_t ci = 0; ci < n.cells.size(); ++ci) {
        const CellInstance& c = n.cells[ci];
        const CellType& t = lib.at(c.type);
        if (!t.sequential) continue;
        FfOp op;
        op.cell = int(ci);
        op.d_net = c.pin_net("D");
        if (t.has_enable) op.en_net = c.pin_net("EN");
        for (size_t oi = 0; oi < t.outputs.size(); ++oi)
            op.out_nets.push_back({c.pin_net(t.outputs[oi]), t.output_inverted[oi]});
        ffs_.push_back(std::move(op));
    }

    for (const auto& [inst, v] : opt.ff_preset) {
        int ci = n.cell_id(inst);
        if (ci < 0) throw ValidationError("ff_preset: unknown instance " + inst);
        bool found = false;
        for (auto& ff : ffs_)
            if (ff.cell == ci) {
                ff.reset_state = v;
                found = true;
            }
        if (!found) throw ValidationError("ff_preset: " + inst + " is not an FF");
    }

    reset();
}

void SimEngine::reset() {
    for (auto& ff : ffs_) ff.state = ff.reset_state;
}

const std::vector<uint8_t>& SimEngine::step(const std::vector<uint8_t>& pi_values) {
    for (size_t i = 0; i < values_.size(); ++i)
        if (forced_[i] >= 0) values_[i] = uint8_t(forced_[i]);

    for (const auto& ff : ffs_)
        for (const auto& [net, inverted] : ff.out_nets)
            if (forced_[net] < 0) values_[net] = inverted ? !ff.state : ff.state;

    for (size_t i = 0; i < data_pis_.size(); ++i)
        values_[data_pis_[i]] = pi_values[i];

    for (const auto& op : comb_) {
        if (forced_[op.out_net] >= 0) continue;
        uint64_t idx = 0;
        for (size_t i = 0; i < op.in_nets.size(); ++i)
            if (values_[op.in_nets[i]]) idx |= uint64_t(1) << i;
        values_[op.out_net] = uint8_t((op.truth >> idx) & 1);
    }

    for (auto& ff : ffs_) {
        bool enabled = ff.en_net < 0 || values_[ff.en_net];
        if (enabled) ff.state = values_[ff.d_net];
    }
    return values_;
}

std::vector<std::vector<uint8_t>> random_vectors(int cycles, int width, uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<uint8_t>> out(cycles, std::vector<uint8_t>(width));
    for (auto& v : out)
        for (auto& b : v) b = rng.coin() ? 1 : 0;
    return out;
}

SimTrace simulate(const Netlist& n, const CellLibrary& lib,
                  const std::vector<std::vector<uint8_t>>& pi_vectors, const SimOptions& opt) {
    SimEngine eng(n, lib, opt);
    SimTrace trace;
    trace.data_pis = eng.data_pis();
    for (const auto& v : pi_vectors) {
        if (v.size() != eng.data_pis().size())
            throw ValidationError("stimulus width does not match data PI count");
        trace.values.push_back(eng.step(v));
    }
    return trace;
}

namespace {
constexpr int kProfileBlock = 1024;
}

ToggleProfile toggle_profile(const Netlist& n, const CellLibrary& lib, int cycles, uint64_t seed,
                             const SimOptions& opt, bool parallel) {
    if (cycles <= 0) throw ValidationError("toggle_profile: cycles must be positive");
    int blocks = (cycles + kProfileBlock - 1) / kProfileBlock;
    std::vector<std::vector<uint32_t>> counts(blocks);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int b = 0; b < blocks; ++b) {
        int len = std::min(kProfileBlock, cycles - b * kProfileBlock);
        SimEngine eng(n, lib, opt);
        Rng rng(Rng::mix(seed, uint64_t(b)));
        std::vector<uint32_t> local(n.nets.size(), 0);
        std::vector<uint8_t> pi(eng.data_pis().size());
        std::vector<uint8_t> prev;
        for (int t = 0; t <= len; ++t) {
            for (auto& bit : pi) bit = rng.coin() ? 1 : 0;
            const auto& vals = eng.step(pi);
            if (t > 0)
                for (size_t i = 0; i < vals.size(); ++i) local[i] += vals[i] != prev[i];
            prev = vals;
        }
        counts[b] = std::move(local);
    }

    ToggleProfile p;
    p.cycles = cycles;
    p.seed = seed;
    p.tpc.assign(n.nets.size(), 0.0);
    std::vector<uint64_t> total(n.nets.size(), 0);
    for (const auto& local : counts)
        for (size_t i = 0; i < local.size(); ++i) total[i] += local[i];
    for (size_t i = 0; i < total.size(); ++i) p.tpc[i] = double(total[i]) / double(cycles);
    return p;
}

ToggleProfile toggle_profile_serial(const Netlist& n, const CellLibrary& lib, int cycles,
                                    uint64_t seed, const SimOptions& opt) {
    return toggle_profile(n, lib, cycles, seed, opt, false);
}

std::string write_profile(const Netlist& n, const ToggleProfile& p) {
    if (p.tpc.size() > n.nets.size())
        throw ValidationError("profile has more nets than the netlist");
    std::ostringstream out;
    out << "# cycles=" << p.cycles << " seed=" << p.seed << "\n";
    out.precision(9);
    // ids are append-only, so a profile measured on an earlier snapshot of a
    // since-grown netlist writes its measured prefix under the right names
    for (size_t i = 0; i < p.tpc.size(); ++i) out << n.nets[i].name << " " << p.tpc[i] << "\n";
    return out.str();
}

ToggleProfile parse_profile(const Netlist& n, const std::string& text) {
    ToggleProfile p;
    p.tpc.assign(n.nets.size(), 0.0);
    std::vector<bool> seen(n.nets.size(), false);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            for (const auto& f : split_ws(line.substr(1))) {
                if (starts_with(f, "cycles=")) p.cycles = std::stoi(f.substr(7));
                if (starts_with(f, "seed=")) p.seed = std::stoull(f.substr(5));
            }
            continue;
        }
        auto fields = split_ws(line);
        if (fields.size() != 2) throw ValidationError("profile line malformed: " + line);
        int id = n.net_id(fields[0]);
        if (id < 0) throw ValidationError("profile references unknown net " + fields[0]);
        p.tpc[id] = std::stod(fields[1]);
        seen[id] = true;
    }
    for (size_t i = 0; i < seen.size(); ++i)
        if (!seen[i]) throw ValidationError("profile missing net " + n.nets[i].name);
    return p;
}

LcnSet lcn_set(const Netlist& n, const ToggleProfile& p, double threshold) {
    LcnSet s;
    s.threshold = threshold;
    for (size_t i = 0; i < n.nets.size(); ++i)
        if (p.tpc[i] <= threshold) s.nets.push_back(int(i));
    std::sort(s.nets.begin(), s.nets.end(), [&](int a, int b) {
        if (p.tpc[a] != p.tpc[b]) return p.tpc[a] < p.tpc[b];
        return n.nets[a].name < n.nets[b].name;
    });
    return s;
}

namespace {

// Exported PO names (alias when present), used for interface matching.
std::vector<std::pair<std::string, int>> po_names(const Netlist& n) {
    std::vector<std::pair<std::string, int>> out;
    for (int po : n.primary_outputs) {
        const Net& net = n.net(po);
        out.push_back({net.output_alias.empty() ? net.name : net.output_alias, po});
    }
    std::sort(out.begin(), out.end());
    return out;
}

int ff_count(const Netlist& n, const CellLibrary& lib) {
    int k = 0;
    for (size_t i = 0; i < n.cells.size(); ++i)
        if (lib.at(n.cells[i].type).sequential) ++k;
    return k;
}

} // namespace

EquivalenceResult equivalence_check(const Netlist& a, const Netlist& b, const CellLibrary& lib,
                                    const std::vector<uint8_t>& key_binding,
                                    const EquivSpec& spec) {
    EquivalenceResult res;

    // bind the key on b: chain FFs preset, chain pins held, loose key PIs forced
    SimOptions ob;
    std::set<std::string> key_pins;
    for (size_t i = 0; i < b.key_chain.size(); ++i) {
        if (i >= key_binding.size())
            throw ValidationError("key binding shorter than the key chain");
        ob.ff_preset.push_back({b.key_chain[i], key_binding[i]});
    }
    if (!b.key_data_pi.empty()) {
        ob.pin_const.push_back({b.key_data_pi, 0});
        ob.pin_const.push_back({b.key_load_pi, 0});
        key_pins.insert(b.key_data_pi);
        key_pins.insert(b.key_load_pi);
    }
    for (int pi : b.primary_inputs) {
        const std::string& nm = b.net(pi).name;
        if (starts_with(nm, kReservedPrefix + "key") && !key_pins.count(nm)) {
            size_t idx_at = (kReservedPrefix + "key").size();
            std::string idx = nm.substr(idx_at);
            if (!idx.empty() && std::all_of(idx.begin(), idx.end(), ::isdigit)) {
                size_t i = std::stoul(idx);
                if (i >= key_binding.size())
                    throw ValidationError("key binding misses PI " + nm);
                ob.pin_const.push_back({nm, key_binding[i]});
                key_pins.insert(nm);
            }
        }
    }

    SimEngine ea(a, lib, {});
    SimEngine eb(b, lib, ob);

    // interface matching on data PIs and exported PO names
    std::vector<std::string> pa, pb;
    for (int pi : ea.data_pis()) pa.push_back(a.net(pi).name);
    for (int pi : eb.data_pis()) pb.push_back(b.net(pi).name);
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    if (pa != pb) throw ValidationError("equivalence: data PI names differ");
    auto poa = po_names(a), pob = po_names(b);
    {
        std::vector<std::string> na, nb;
        for (auto& [nm, id] : poa) na.push_back(nm);
        for (auto& [nm, id] : pob) nb.push_back(nm);
        if (na != nb) throw ValidationError("equivalence: PO names differ");
    }

    // map b's stimulus order to a's
    std::vector<int> b_order(eb.data_pis().size());
    for (size_t i = 0; i < eb.data_pis().size(); ++i) {
        const std::string& nm = b.net(eb.data_pis()[i]).name;
        int found = -1;
        for (size_t j = 0; j < ea.data_pis().size(); ++j)
            if (a.net(ea.data_pis()[j]).name == nm) found = int(j);
        b_order[i] = found;
    }

    int n_pis = int(ea.data_pis().size());
    auto run_vector = [&](const std::vector<uint8_t>& va, int cycles,
                          bool reset) -> std::optional<Counterexample> {
        if (reset) {
            ea.reset();
            eb.reset();
        }
        std::vector<uint8_t> vb(va.size());
        for (size_t i = 0; i < vb.size(); ++i) vb[i] = va[b_order[i]];
        for (int t = 0; t < cycles; ++t) {
            const auto& ra = ea.step(va);
            const auto& rb = eb.step(vb);
            for (size_t k = 0; k < poa.size(); ++k) {
                if (ra[poa[k].second] != rb[pob[k].second]) {
                    Counterexample cex;
                    cex.cycle = t;
                    cex.po = poa[k].first;
                    cex.vector = va;
                    return cex;
                }
            }
        }
        return std::nullopt;
    };

    if (spec.exhaustive) {
        if (n_pis > 20) throw ValidationError("exhaustive equivalence requires <= 20 data PIs");
        int hold = std::min(std::max(ff_count(a, lib), ff_count(b, lib)), 16) + 2;
        uint64_t total = uint64_t(1) << n_pis;
        for (uint64_t v = 0; v < total; ++v) {
            std::vector<uint8_t> va(n_pis);
            for (int i = 0; i < n_pis; ++i) va[i] = uint8_t((v >> i) & 1);
            if (auto cex = run_vector(va, hold, true)) {
                res.cex = *cex;
                res.note = "mismatch at PO " + cex->po;
                return res;
            }
        }
        res.equivalent = true;
        res.note = "exhaustive over " + std::to_string(total) + " vectors";
        return res;
    }

    ea.reset();
    eb.reset();
    Rng rng(spec.seed);
    std::vector<uint8_t> va(n_pis);
    for (int t = 0; t < spec.vectors; ++t) {
        for (auto& bit : va) bit = rng.coin() ? 1 : 0;
        if (auto cex = run_vector(va, 1, false)) {
            cex->cycle = t;
            res.cex = *cex;
            res.note = "mismatch at PO " + cex->po;
            return res;
        }
    }
    res.equivalent = true;
    res.note = std::to_string(spec.vectors) + "-vector co-simulation";
    return res;
}

} // namespace tromux
