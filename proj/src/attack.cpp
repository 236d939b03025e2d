#include "tromux/attack.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tromux/rng.hpp"
#include "tromux/util.hpp"

namespace tromux {

using ordered_json = nlohmann::ordered_json;

std::string write_prediction(const Prediction& p) {
    std::ostringstream out;
    out << "keylen=" << p.bits.size() << "\n";
    for (char c : p.bits) out << c << "\n";
    return out.str();
}

Prediction parse_prediction(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Prediction p;
    bool have_header = false;
    size_t keylen = 0;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "prediction line " + std::to_string(lineno) + ": ";
        if (!have_header) {
            if (!starts_with(line, "keylen="))
                throw ValidationError(where + "expected keylen=<k> header");
            try {
                keylen = std::stoul(line.substr(7));
            } catch (const std::exception&) {
                throw ValidationError(where + "bad keylen value");
            }
            have_header = true;
            continue;
        }
        if (line.size() != 1 || (line[0] != '0' && line[0] != '1' && line[0] != 'X' &&
                                 line[0] != 'x'))
            throw ValidationError(where + "expected one of 0, 1, X");
        p.bits += line[0] == 'x' ? 'X' : line[0];
    }
    if (!have_header) throw ValidationError("prediction: missing keylen header");
    if (p.bits.size() != keylen)
        throw ValidationError("prediction: keylen says " + std::to_string(keylen) + " but " +
                              std::to_string(p.bits.size()) + " bits follow");
    return p;
}

AttackScore score(const Prediction& pred, const std::vector<uint8_t>& true_key) {
    if (pred.bits.size() != true_key.size())
        throw ValidationError("prediction length " + std::to_string(pred.bits.size()) +
                              " does not match key length " + std::to_string(true_key.size()));
    AttackScore s;
    s.k_total = int(true_key.size());
    for (size_t i = 0; i < true_key.size(); ++i) {
        char c = pred.bits[i];
        if (c == 'X')
            ++s.k_x;
        else if ((c == '1') == (true_key[i] != 0))
            ++s.k_correct;
    }
    if (s.k_total > 0) {
        s.ac = 100.0 * s.k_correct / s.k_total;
        s.pc = 100.0 * (s.k_correct + s.k_x) / s.k_total;
    }
    if (s.k_x < s.k_total) {
        s.kpa = 100.0 * s.k_correct / (s.k_total - s.k_x);
        s.kpa_defined = true;
    }
    return s;
}

std::string AttackScore::to_json() const {
    ordered_json j;
    j["ac"] = ac;
    j["pc"] = pc;
    if (kpa_defined)
        j["kpa"] = kpa;
    else
        j["kpa"] = "NA";
    j["k_correct"] = k_correct;
    j["k_x"] = k_x;
    j["k_total"] = k_total;
    return j.dump(2) + "\n";
}

Prediction random_guess(int key_length, uint64_t seed) {
    if (key_length < 0) throw ValidationError("negative key length");
    Rng r(seed);
    Prediction p;
    p.bits.reserve(key_length);
    for (int i = 0; i < key_length; ++i) p.bits += r.coin() ? '1' : '0';
    return p;
}

PairCensus census_plan_originals(const Netlist& original, const CellLibrary& lib,
                                 const LockingPlan& plan) {
    PairCensus c;
    for (const auto& e : plan.entries) {
        int ci = original.cell_id(e.instance);
        if (ci < 0) throw ValidationError("plan instance not in netlist: " + e.instance);
        const CellType& t = lib.at(original.cell(ci).type);
        if (t.sequential) continue;
        c.add(t.name);
    }
    return c;
}

namespace {

long parse_key_index(const std::string& name) {
    const std::string prefix = kReservedPrefix + "key";
    if (!starts_with(name, prefix)) return -1;
    std::string rest = name.substr(prefix.size());
    if (rest.empty() ||
        !std::all_of(rest.begin(), rest.end(),
                     [](unsigned char c) { return std::isdigit(c); }))
        return -1;
    try {
        return std::stol(rest);
    } catch (const std::exception&) {
        return -1;
    }
}

bool is_inv_type(const CellType& t) {
    return !t.sequential && t.inputs.size() == 1 && t.outputs.size() == 1 &&
           t.eval({0}) && !t.eval({1});
}

bool is_mux_truth(const CellType& t) {
    if (t.sequential || t.inputs.size() != 3 || t.outputs.size() != 1) return false;
    for (uint8_t a : {0, 1})
        for (uint8_t b : {0, 1}) {
            if (t.eval({a, b, 0}) != (a != 0)) return false;
            if (t.eval({a, b, 1}) != (b != 0)) return false;
        }
    return true;
}

// XOR-like: 2-input where flipping either input always flips the output;
// sets xnor for the inverted polarity
bool is_xorish(const CellType& t, bool& xnor) {
    if (t.sequential || t.inputs.size() != 2 || t.outputs.size() != 1) return false;
    bool v00 = t.eval({0, 0});
    if (t.eval({0, 1}) == v00 || t.eval({1, 0}) == v00 || t.eval({1, 1}) != v00) return false;
    xnor = v00;
    return true;
}

/// true when `x` is driven by an inverter whose input is `y`
bool net_is_inv_of(const Netlist& n, const CellLibrary& lib, int x, int y) {
    int drv = n.net(x).driver_cell;
    if (drv < 0) return false;
    const CellInstance& c = n.cell(drv);
    const CellType& t = lib.at(c.type);
    if (!is_inv_type(t)) return false;
    return c.pin_net(t.inputs[0]) == y;
}

struct Localized {
    // 'm' gate behind a mux, 'x' gate behind a keygate, 'f' FF lock or
    // ambiguous structure (undeciphered), 'n' nothing found
    char kind = 'n';
    std::string present;
    bool swapped = false;
    bool kg_xnor = false;
};

Localized decode_bit(const Netlist& n, const CellLibrary& lib, int key_net) {
    Localized out;
    auto merge = [&](const Localized& cur) {
        if (out.kind == 'n') {
            out = cur;
            return;
        }
        if (out.kind != cur.kind || out.present != cur.present ||
            out.swapped != cur.swapped || out.kg_xnor != cur.kg_xnor)
            out.kind = 'f'; // conflicting sightings stay undeciphered
    };
    for (const SinkRef& s : n.net(key_net).sinks) {
        const CellInstance& c = n.cell(s.cell);
        const CellType& t = lib.at(c.type);
        if (t.sequential) continue; // the next chain FF
        Localized cur;
        bool xnor = false;
        if (is_mux_truth(t) && s.pin == t.inputs[2]) {
            int a = c.pin_net(t.inputs[0]);
            int b = c.pin_net(t.inputs[1]);
            bool a_inv_b = net_is_inv_of(n, lib, a, b);
            bool b_inv_a = net_is_inv_of(n, lib, b, a);
            if (a_inv_b == b_inv_a) {
                cur.kind = 'f'; // no inverter side: FF lock (or ambiguous loop)
            } else {
                int raw = a_inv_b ? b : a;
                int drv = n.net(raw).driver_cell;
                if (drv < 0 || lib.at(n.cell(drv).type).sequential) {
                    cur.kind = 'f';
                } else {
                    cur.kind = 'm';
                    cur.present = n.cell(drv).type;
                    cur.swapped = a_inv_b;
                }
            }
        } else if (is_xorish(t, xnor)) {
            const std::string& other = s.pin == t.inputs[0] ? t.inputs[1] : t.inputs[0];
            int raw = c.pin_net(other);
            int drv = n.net(raw).driver_cell;
            if (drv < 0 || lib.at(n.cell(drv).type).sequential) {
                cur.kind = 'f'; // keygate on an FF output
            } else {
                cur.kind = 'x';
                cur.present = n.cell(drv).type;
                cur.kg_xnor = xnor;
            }
        } else {
            continue; // key net reused by something that is not a key structure
        }
        merge(cur);
    }
    return out;
}

/// key net per bit index; -1 for indices with no visible net
std::vector<int> locate_key_nets(const Netlist& n, const CellLibrary& lib) {
    std::map<long, int> by_idx;
    for (size_t i = 0; i < n.key_chain.size(); ++i) {
        auto outs = n.fanout_nets(n.key_chain[i]);
        if (!outs.empty()) by_idx[long(i)] = outs[0];
    }
    for (int pi : n.primary_inputs) {
        long idx = parse_key_index(n.net(pi).name);
        if (idx >= 0 && !by_idx.count(idx)) by_idx[idx] = pi;
    }
    if (by_idx.empty()) {
        // stripped metadata: take the FFs gated by one shared enable PI and
        // order them by following the D chain from its external entry point
        for (int pi : n.primary_inputs) {
            const Net& load = n.net(pi);
            if (load.sinks.empty()) continue;
            std::vector<int> ffs;
            bool all_en = true;
            for (const SinkRef& s : load.sinks) {
                const CellType& t = lib.at(n.cell(s.cell).type);
                if (t.sequential && t.has_enable && t.inputs.size() >= 2 &&
                    s.pin == t.inputs[1])
                    ffs.push_back(s.cell);
                else
                    all_en = false;
            }
            if (!all_en || ffs.empty()) continue;
            std::map<int, int> by_d_net; // D net -> FF
            for (int f : ffs)
                by_d_net[n.cell(f).pin_net(lib.at(n.cell(f).type).inputs[0])] = f;
            std::map<int, int> out_net; // FF -> first output net
            for (int f : ffs) out_net[f] = n.fanout_nets(f)[0];
            int head = -1;
            for (int f : ffs) {
                int d = n.cell(f).pin_net(lib.at(n.cell(f).type).inputs[0]);
                bool fed_by_chain = false;
                for (int g : ffs) fed_by_chain = fed_by_chain || out_net[g] == d;
                if (!fed_by_chain) {
                    if (head >= 0) {
                        head = -1; // two heads: not a chain
                        break;
                    }
                    head = f;
                }
            }
            if (head < 0) continue;
            long idx = 0;
            int cur = head;
            std::set<int> seen;
            while (cur >= 0 && seen.insert(cur).second) {
                by_idx[idx++] = out_net[cur];
                auto it = by_d_net.find(out_net[cur]);
                cur = it == by_d_net.end() ? -1 : it->second;
            }
            if (!by_idx.empty()) break;
        }
    }
    if (by_idx.empty()) return {};
    long k = by_idx.rbegin()->first + 1;
    std::vector<int> nets(k, -1);
    for (const auto& [idx, net] : by_idx) nets[idx] = net;
    return nets;
}

Prediction predict_with_census(const CellLibrary& lib, const std::vector<Localized>& decoded,
                               const PairCensus& census) {
    Prediction p;
    p.bits.assign(decoded.size(), 'X');
    for (size_t i = 0; i < decoded.size(); ++i) {
        const Localized& L = decoded[i];
        if (L.kind != 'm' && L.kind != 'x') continue;
        const std::string comp = lib.at(L.present).complement;
        int transform;
        if (comp.empty()) {
            transform = 0; // no complement in the library: the gate was kept
        } else {
            long mine = census.count(L.present);
            long theirs = census.count(comp);
            if (mine == theirs) continue; // tie stays X
            transform = mine > theirs ? 0 : 1;
        }
        int bit = L.kind == 'm' ? (int(L.swapped) ^ transform)
                                : (transform ^ int(L.kg_xnor));
        p.bits[i] = bit ? '1' : '0';
    }
    return p;
}

std::vector<Localized> decode_all(const Netlist& n, const CellLibrary& lib) {
    std::vector<int> nets = locate_key_nets(n, lib);
    if (nets.empty()) throw ValidationError("no locked structures found");
    std::vector<Localized> decoded(nets.size());
    bool any = false;
    for (size_t i = 0; i < nets.size(); ++i) {
        if (nets[i] < 0) continue;
        decoded[i] = decode_bit(n, lib, nets[i]);
        any = any || decoded[i].kind != 'n';
    }
    if (!any) throw ValidationError("no locked structures found");
    return decoded;
}

} // namespace

Prediction imbalance_attack(const Netlist& locked, const CellLibrary& lib) {
    auto decoded = decode_all(locked, lib);
    PairCensus census;
    for (const Localized& L : decoded)
        if (L.kind == 'm' || L.kind == 'x') census.add(L.present);
    return predict_with_census(lib, decoded, census);
}

Prediction imbalance_attack(const Netlist& locked, const CellLibrary& lib,
                            const PairCensus& census) {
    return predict_with_census(lib, decode_all(locked, lib), census);
}

} // namespace tromux
