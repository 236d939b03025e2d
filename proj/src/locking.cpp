#include "tromux/locking.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "tromux/util.hpp"

namespace tromux {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// instance name for a structure driving net `preferred`: reuse the net name
// when free (keeps bench-style naming), otherwise fall back
std::string structure_name(const Netlist& n, const std::string& preferred,
                           const std::string& fallback) {
    return n.cell_id(preferred) < 0 ? preferred : fallback;
}

// base for generated names: tromux_key<i> -> tromux_kg<i>, anything else
// keeps its own name as the suffix
std::string base_for_key_net(const std::string& key_net_name) {
    const std::string prefix = kReservedPrefix + "key";
    if (starts_with(key_net_name, prefix)) {
        std::string idx = key_net_name.substr(prefix.size());
        if (!idx.empty() && std::all_of(idx.begin(), idx.end(), ::isdigit))
            return kReservedPrefix + "kg" + idx;
    }
    return kReservedPrefix + "kg_" + key_net_name;
}

void check_lockable(const Netlist& n, int ci) {
    const CellInstance& c = n.cell(ci);
    if (c.locked || c.origin != Origin::original)
        throw ValidationError("instance already locked or synthetic: " + c.name);
}

// the FF's used output pins (driving a net with sinks or a primary output);
// falls back to the first output when none is observed anywhere
std::vector<std::string> used_outputs(const Netlist& n, const CellLibrary& lib, int ci) {
    const CellInstance& c = n.cell(ci);
    const CellType& t = lib.at(c.type);
    std::vector<std::string> used;
    for (const auto& pin : t.outputs) {
        int net = c.pin_net(pin);
        if (net < 0) continue;
        if (!n.net(net).sinks.empty() || n.net(net).is_primary_output) used.push_back(pin);
    }
    if (used.empty()) used.push_back(t.outputs[0]);
    return used;
}

// sequential type with Q and QN outputs matching this FF's input interface
const CellType* two_output_equivalent(const CellLibrary& lib, const CellType& t) {
    const CellType* best = nullptr;
    for (const CellType& cand : lib.types()) {
        if (!cand.sequential || cand.outputs.size() != 2) continue;
        if (cand.inputs != t.inputs || cand.has_enable != t.has_enable) continue;
        if (cand.output_inverted != std::vector<bool>{false, true}) continue;
        if (!best || cand.name < best->name) best = &cand;
    }
    return best;
}

struct MuxWiring {
    int a;
    int b;
};

int add_mux(Netlist& n, const CellLibrary& lib, const std::string& name, const MuxWiring& w,
            int key_net, int out_net) {
    int mi = n.add_cell(name, "MUX2");
    n.cell(mi).origin = Origin::key_gate;
    n.cell(mi).locked = true;
    n.connect(mi, "A", w.a, lib);
    n.connect(mi, "B", w.b, lib);
    n.connect(mi, "S", key_net, lib);
    n.connect(mi, "Y", out_net, lib);
    return mi;
}

int lock_gate_config(Netlist& n, const CellLibrary& lib, int ci, const std::string& config,
                     int key_net) {
    auto parts = split_on(config, ':');
    const std::string& variant_tag = parts[0];
    bool transform = parts[1] == "transform";
    if (parts[1] != "keep" && parts[1] != "transform")
        throw ValidationError("bad config mode: " + config);

    CellInstance& c = n.cell(ci);
    const CellType& t = lib.at(c.type);
    if (t.sequential) throw ValidationError("FF passed to gate transform: " + c.name);
    if (t.outputs.size() != 1)
        throw ValidationError("gate locking requires a single-output cell: " + c.name);
    std::string comp = lib.complement_of(c.type);
    if (transform && comp.empty())
        throw ValidationError("transform config on complement-less type " + c.type + ": " +
                              c.name);

    std::string out_pin = t.outputs[0];
    int y = c.pin_net(out_pin);
    std::string base = base_for_key_net(n.net(key_net).name);

    n.disconnect(ci, out_pin, lib);
    int raw = n.add_net(base + "_raw");
    n.connect(ci, out_pin, raw, lib);
    if (transform) c.type = comp;
    c.locked = true;
    n.rename_cell(c.name, base + "_raw");

    if (variant_tag == "mux") {
        bool swapped = parts[2] == "swapped";
        if (parts[2] != "direct" && parts[2] != "swapped")
            throw ValidationError("bad mux order in config: " + config);
        int inv_net = n.add_net(base + "_inv");
        int inv = n.add_cell(base + "_inv", "INV");
        n.cell(inv).origin = Origin::key_gate;
        n.cell(inv).locked = true;
        n.connect(inv, "A", raw, lib);
        n.connect(inv, "Y", inv_net, lib);
        MuxWiring w = swapped ? MuxWiring{inv_net, raw} : MuxWiring{raw, inv_net};
        add_mux(n, lib, structure_name(n, n.net(y).name, base + "_mux"), w, key_net, y);
        return int(swapped) ^ int(transform);
    }
    if (variant_tag == "xor") {
        const std::string& kg_type = parts[2] == "xor2"    ? "XOR2"
                                     : parts[2] == "xnor2" ? "XNOR2"
                                                           : "";
        if (kg_type.empty()) throw ValidationError("bad key-gate in config: " + config);
        int kg = n.add_cell(structure_name(n, n.net(y).name, base + "_kg"), kg_type);
        n.cell(kg).origin = Origin::key_gate;
        n.cell(kg).locked = true;
        n.connect(kg, "A", raw, lib);
        n.connect(kg, "B", key_net, lib);
        n.connect(kg, "Y", y, lib);
        return int(transform) ^ int(kg_type == "XNOR2");
    }
    throw ValidationError("unknown config variant: " + config);
}

int lock_ff_mux(Netlist& n, const CellLibrary& lib, int ci, bool swapped, int key_net) {
    CellInstance& c = n.cell(ci);
    const CellType* t = &lib.at(c.type);
    std::string base = base_for_key_net(n.net(key_net).name);

    if (t->outputs.size() == 1) {
        // single-output FF: switch to the 2-output equivalent so both state
        // polarities exist, then select between them
        const CellType* t2 = two_output_equivalent(lib, *t);
        if (!t2)
            throw ValidationError("no 2-output FF equivalent in library for type " + c.type);
        std::string orig_pin = t->outputs[0];
        bool orig_inverted = t->output_inverted[0];
        int y = c.pin_net(orig_pin);

        std::vector<std::pair<std::string, int>> input_nets;
        for (const auto& pin : t->inputs) input_nets.push_back({pin, c.pin_net(pin)});
        for (const auto& [pin, net] : std::vector<std::pair<std::string, int>>(c.pins))
            if (net >= 0) n.disconnect(ci, pin, lib);
        c.type = t2->name;
        c.pins.clear();
        for (const auto& [pin, net] : input_nets) n.connect(ci, pin, net, lib);

        int raw_true = n.add_net(base + "_raw");
        int raw_inv = n.add_net(base + "_rawn");
        std::string pin_true = t2->output_inverted[0] ? t2->outputs[1] : t2->outputs[0];
        std::string pin_inv = t2->output_inverted[0] ? t2->outputs[0] : t2->outputs[1];
        n.connect(ci, t2->outputs[0], t2->outputs[0] == pin_true ? raw_true : raw_inv, lib);
        n.connect(ci, t2->outputs[1], t2->outputs[1] == pin_true ? raw_true : raw_inv, lib);

        int orig_raw = orig_inverted ? raw_inv : raw_true;
        int other_raw = orig_inverted ? raw_true : raw_inv;
        c.locked = true;
        n.rename_cell(c.name, n.net(c.pin_net(t2->outputs[0])).name);
        MuxWiring w = swapped ? MuxWiring{other_raw, orig_raw} : MuxWiring{orig_raw, other_raw};
        add_mux(n, lib, structure_name(n, n.net(y).name, base + "_mux"), w, key_net, y);
        return int(swapped);
    }

    if (t->outputs.size() != 2)
        throw ValidationError("mux FF locking supports 1- or 2-output FFs: " + c.name);
    std::string p0 = t->outputs[0], p1 = t->outputs[1];
    int y0 = c.pin_net(p0), y1 = c.pin_net(p1);
    n.disconnect(ci, p0, lib);
    n.disconnect(ci, p1, lib);
    int raw0 = n.add_net(base + "_raw");
    int raw1 = n.add_net(base + "_rawn");
    n.connect(ci, p0, raw0, lib);
    n.connect(ci, p1, raw1, lib);
    c.locked = true;
    n.rename_cell(c.name, base + "_raw");

    MuxWiring w0 = swapped ? MuxWiring{raw1, raw0} : MuxWiring{raw0, raw1};
    MuxWiring w1 = swapped ? MuxWiring{raw0, raw1} : MuxWiring{raw1, raw0};
    add_mux(n, lib, structure_name(n, n.net(y0).name, base + "_mux"), w0, key_net, y0);
    add_mux(n, lib, structure_name(n, n.net(y1).name, base + "_muxn"), w1, key_net, y1);
    return int(swapped);
}

int lock_ff_xor(Netlist& n, const CellLibrary& lib, int ci, const std::string& pin_lower,
                const std::string& kg_part, int key_net) {
    CellInstance& c = n.cell(ci);
    const CellType& t = lib.at(c.type);
    std::string pin;
    for (const auto& p : t.outputs)
        if (lower(p) == pin_lower) pin = p;
    if (pin.empty())
        throw ValidationError("config names output " + pin_lower + " absent on " + c.type);
    const std::string kg_type = kg_part == "xor2" ? "XOR2" : kg_part == "xnor2" ? "XNOR2" : "";
    if (kg_type.empty()) throw ValidationError("bad key-gate in ffxor config");

    std::string base = base_for_key_net(n.net(key_net).name);
    int y = c.pin_net(pin);
    n.disconnect(ci, pin, lib);
    bool first = pin == t.outputs[0];
    int raw = n.add_net(base + (first ? "_raw" : "_rawn"));
    n.connect(ci, pin, raw, lib);
    c.locked = true;
    if (first) n.rename_cell(c.name, base + "_raw");

    int kg = n.add_cell(structure_name(n, n.net(y).name, base + "_kg"), kg_type);
    n.cell(kg).origin = Origin::key_gate;
    n.cell(kg).locked = true;
    n.connect(kg, "A", raw, lib);
    n.connect(kg, "B", key_net, lib);
    n.connect(kg, "Y", y, lib);
    return int(kg_type == "XNOR2");
}

// FF type used for the key chain: smallest load-enable single-output FF
const CellType& chain_ff_type(const CellLibrary& lib) {
    const CellType* best = nullptr;
    for (const CellType& t : lib.types()) {
        if (!t.sequential || !t.has_enable) continue;
        if (t.outputs.size() != 1 || t.output_inverted[0]) continue;
        if (!best || t.width < best->width || (t.width == best->width && t.name < best->name))
            best = &t;
    }
    if (!best) throw ValidationError("library lacks a load-enable FF for the key chain");
    return *best;
}

int next_key_index(const Netlist& n) {
    const std::string prefix = kReservedPrefix + "key";
    int next = 0;
    for (const Net& net : n.nets) {
        if (!starts_with(net.name, prefix)) continue;
        std::string idx = net.name.substr(prefix.size());
        if (idx.empty() || !std::all_of(idx.begin(), idx.end(), ::isdigit)) continue;
        next = std::max(next, std::stoi(idx) + 1);
    }
    return next;
}

} // namespace

std::string write_plan(const LockingPlan& plan) {
    std::ostringstream out;
    for (const auto& e : plan.entries) out << e.instance << " " << e.config << "\n";
    return out.str();
}

LockingPlan parse_plan(const std::string& text) {
    LockingPlan plan;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto f = split_ws(line);
        if (f.size() == 1)
            plan.entries.push_back({f[0], "", -1});
        else if (f.size() == 2)
            plan.entries.push_back({f[0], f[1], -1});
        else
            throw ValidationError("malformed plan line: " + line);
    }
    return plan;
}

std::vector<std::string> legal_configs(const Netlist& n, const CellLibrary& lib, int cell,
                                       Variant variant) {
    const CellInstance& c = n.cell(cell);
    const CellType& t = lib.at(c.type);
    std::vector<std::string> out;
    if (t.sequential) {
        if (variant == Variant::mux) return {"ffmux:direct", "ffmux:swapped"};
        for (const auto& pin : used_outputs(n, lib, cell)) {
            out.push_back("ffxor:" + lower(pin) + ":xor2");
            out.push_back("ffxor:" + lower(pin) + ":xnor2");
        }
        return out;
    }
    if (t.outputs.size() != 1) return {};
    bool has_comp = !lib.complement_of(c.type).empty();
    if (variant == Variant::mux) {
        out = {"mux:keep:direct", "mux:keep:swapped"};
        if (has_comp) {
            out.push_back("mux:transform:direct");
            out.push_back("mux:transform:swapped");
        }
    } else {
        out = {"xor:keep:xor2", "xor:keep:xnor2"};
        if (has_comp) {
            out.push_back("xor:transform:xor2");
            out.push_back("xor:transform:xnor2");
        }
    }
    return out;
}

int lock_cell_config(Netlist& n, const CellLibrary& lib, const std::string& instance,
                     const std::string& config, int key_net) {
    int ci = n.cell_id(instance);
    if (ci < 0) throw ValidationError("unknown instance: " + instance);
    check_lockable(n, ci);
    auto parts = split_on(config, ':');
    if (parts.size() < 2) throw ValidationError("malformed config id: " + config);
    if (parts[0] == "mux" || parts[0] == "xor") {
        if (parts.size() != 3) throw ValidationError("malformed config id: " + config);
        return lock_gate_config(n, lib, ci, config, key_net);
    }
    const CellType& t = lib.at(n.cell(ci).type);
    if (!t.sequential) throw ValidationError("FF config on combinational instance " + instance);
    if (parts[0] == "ffmux") {
        if (parts[1] != "direct" && parts[1] != "swapped")
            throw ValidationError("malformed config id: " + config);
        return lock_ff_mux(n, lib, ci, parts[1] == "swapped", key_net);
    }
    if (parts[0] == "ffxor") {
        if (parts.size() != 3) throw ValidationError("malformed config id: " + config);
        return lock_ff_xor(n, lib, ci, parts[1], parts[2], key_net);
    }
    throw ValidationError("unknown config id: " + config);
}

namespace {

int lock_single(Netlist& n, const CellLibrary& lib, const std::string& instance, Variant variant,
                Rng& rng, bool expect_ff) {
    int ci = n.cell_id(instance);
    if (ci < 0) throw ValidationError("unknown instance: " + instance);
    const CellType& t = lib.at(n.cell(ci).type);
    if (t.sequential != expect_ff)
        throw ValidationError(expect_ff ? "not an FF: " + instance
                                        : "FF passed to gate transform: " + instance);
    check_lockable(n, ci);
    auto configs = legal_configs(n, lib, ci, variant);
    if (configs.empty()) throw ValidationError("no applicable configurations for " + instance);
    std::string config = configs[rng.below(configs.size())];

    int idx = next_key_index(n);
    int key_net = n.add_net(kReservedPrefix + "key" + std::to_string(idx));
    n.mark_primary_input(key_net);
    return lock_cell_config(n, lib, instance, config, key_net);
}

} // namespace

int lock_gate(Netlist& n, const CellLibrary& lib, const std::string& instance, Variant variant,
              Rng& rng) {
    return lock_single(n, lib, instance, variant, rng, false);
}

int lock_ff(Netlist& n, const CellLibrary& lib, const std::string& instance, Variant variant,
            Rng& rng) {
    return lock_single(n, lib, instance, variant, rng, true);
}

void build_key_chain(Netlist& n, const CellLibrary& lib, int key_length) {
    if (key_length < 1) throw ValidationError("key chain length must be >= 1");
    if (!n.key_chain.empty()) throw ValidationError("key chain already present");
    const std::string data_name = kReservedPrefix + "key_data";
    const std::string load_name = kReservedPrefix + "key_load";
    if (n.net_id(data_name) >= 0 || n.net_id(load_name) >= 0)
        throw ValidationError("reserved key-chain pin names already in use");
    int data = n.add_net(data_name);
    int load = n.add_net(load_name);
    n.mark_primary_input(data);
    n.mark_primary_input(load);
    n.key_data_pi = data_name;
    n.key_load_pi = load_name;
    extend_key_chain(n, lib, key_length);
}

void extend_key_chain(Netlist& n, const CellLibrary& lib, int additional) {
    if (additional < 1) throw ValidationError("chain extension must add >= 1 FF");
    if (n.key_chain.empty() && n.key_data_pi.empty()) {
        build_key_chain(n, lib, additional);
        return;
    }
    const CellType& ff = chain_ff_type(lib);
    int from = int(n.key_chain.size());
    for (int i = from; i < from + additional; ++i) {
        std::string key_name = kReservedPrefix + "key" + std::to_string(i);
        int q = n.net_id(key_name);
        if (q < 0)
            q = n.add_net(key_name);
        else if (n.net(q).driver_cell >= 0 || n.net(q).is_primary_input)
            throw ValidationError("key net already driven: " + key_name);
        int d = i == 0 ? n.net_id(n.key_data_pi)
                       : n.net_id(kReservedPrefix + "key" + std::to_string(i - 1));
        int ci = n.add_cell(key_name, ff.name);
        n.cell(ci).origin = Origin::key_chain_ff;
        n.cell(ci).locked = true;
        n.connect(ci, "D", d, lib);
        n.connect(ci, "EN", n.net_id(n.key_load_pi), lib);
        n.connect(ci, ff.outputs[0], q, lib);
        n.key_chain.push_back(key_name);
    }
}

ApplyResult apply_plan(Netlist& n, const CellLibrary& lib, const LockingPlan& plan,
                       Variant variant, uint64_t seed) {
    ApplyResult res;
    if (plan.entries.empty()) return res;

    std::vector<std::string> seen;
    for (const auto& e : plan.entries) {
        if (std::find(seen.begin(), seen.end(), e.instance) != seen.end())
            throw ValidationError("instance appears twice in plan: " + e.instance);
        seen.push_back(e.instance);
    }

    int base = int(n.key_chain.size());
    for (size_t pos = 0; pos < plan.entries.size(); ++pos) {
        const PlanEntry& e = plan.entries[pos];
        int idx = base + int(pos);
        int ci = n.cell_id(e.instance);
        if (ci < 0) throw ValidationError("plan references unknown instance: " + e.instance);
        std::string config = e.config;
        if (config.empty()) {
            auto configs = legal_configs(n, lib, ci, variant);
            if (configs.empty())
                throw ValidationError("no applicable configurations for " + e.instance);
            Rng sub(Rng::mix(seed, uint64_t(idx)));
            config = configs[sub.below(configs.size())];
        }
        int key_net = n.add_net(kReservedPrefix + "key" + std::to_string(idx));
        int bit = lock_cell_config(n, lib, e.instance, config, key_net);
        res.key.push_back(uint8_t(bit));
        res.resolved_plan.entries.push_back({e.instance, config, idx});
    }
    extend_key_chain(n, lib, int(plan.entries.size()));
    n.ensure_valid(lib);
    return res;
}

std::string write_key_file(const std::vector<uint8_t>& key, uint64_t seed, Variant variant) {
    std::ostringstream out;
    out << "keylen=" << key.size() << " seed=" << seed << " variant=" << to_string(variant)
        << "\n";
    int nibbles = int((key.size() + 3) / 4);
    for (int j = nibbles - 1; j >= 0; --j) {
        int v = 0;
        for (int b = 0; b < 4; ++b) {
            size_t i = size_t(j) * 4 + b;
            if (i < key.size() && key[i]) v |= 1 << b;
        }
        out << "0123456789abcdef"[v];
    }
    out << "\n";
    return out.str();
}

std::vector<uint8_t> parse_key_file(const std::string& text) {
    std::istringstream in(text);
    std::string header, hex;
    if (!std::getline(in, header)) throw ValidationError("empty key file");
    size_t keylen = std::string::npos;
    for (const auto& f : split_ws(header))
        if (starts_with(f, "keylen=")) keylen = std::stoul(f.substr(7));
    if (keylen == std::string::npos) throw ValidationError("key file header missing keylen=");
    std::getline(in, hex);
    hex = trim(hex);
    std::vector<uint8_t> key(keylen, 0);
    size_t nibbles = hex.size();
    for (size_t j = 0; j < nibbles; ++j) {
        char c = char(std::tolower((unsigned char)hex[nibbles - 1 - j]));
        int v = c >= '0' && c <= '9'   ? c - '0'
                : c >= 'a' && c <= 'f' ? c - 'a' + 10
                                       : -1;
        if (v < 0) throw ValidationError("bad hex digit in key file");
        for (int b = 0; b < 4; ++b) {
            size_t i = j * 4 + b;
            if (i < keylen)
                key[i] = uint8_t((v >> b) & 1);
            else if ((v >> b) & 1)
                throw ValidationError("key value wider than keylen");
        }
    }
    if (nibbles * 4 < keylen) throw ValidationError("key value shorter than keylen");
    return key;
}

} // namespace tromux
