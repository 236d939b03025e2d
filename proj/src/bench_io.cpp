#include <sstream>

#include "tromux/netlist_io.hpp"
#include "tromux/util.hpp"

namespace tromux {

namespace {

// bench keyword <-> library type translation for the classic names
const std::pair<const char*, const char*> kBenchTypes[] = {
    {"NOT", "INV"},   {"AND", "AND2"},   {"NAND", "NAND2"},   {"OR", "OR2"},
    {"NOR", "NOR2"},  {"XOR", "XOR2"},   {"XNOR", "XNOR2"},   {"MUX", "MUX2"},
    {"DFF", "DFF"},   {"DFFN", "DFF_QN"}, {"DFF2", "DFF_2OUT"}, {"DFFE", "DFF_LE"},
    {"DFFE2", "DFF_LE_2OUT"},
};

std::string keyword_to_type(const std::string& kw, const CellLibrary& lib) {
    for (const auto& [k, t] : kBenchTypes)
        if (kw == k && lib.has(t)) return t;
    if (lib.has(kw)) return kw; // fallback: library type names are keywords too
    return "";
}

std::string type_to_keyword(const std::string& type) {
    for (const auto& [k, t] : kBenchTypes)
        if (type == t) return k;
    return type;
}

int get_or_add_net(Netlist& n, const std::string& name) {
    int id = n.net_id(name);
    return id >= 0 ? id : n.add_net(name);
}

// Bench carries no instance names; instances are named after their first
// output net, which is unique (one driver per net) and survives round trips.
std::string driver_name_of(const Netlist& n, const std::string& net_name) {
    int id = n.net_id(net_name);
    if (id < 0 || n.net(id).driver_cell < 0)
        throw ValidationError("metadata comment references undriven net " + net_name);
    return n.cell(n.net(id).driver_cell).name;
}

std::string output_net_of(const Netlist& n, const CellLibrary& lib, const std::string& inst) {
    int ci = n.cell_id(inst);
    const CellType& t = lib.at(n.cell(ci).type);
    return n.net(n.cell(ci).pin_net(t.outputs[0])).name;
}

} // namespace

Netlist parse_bench(const std::string& text, const CellLibrary& lib) {
    Netlist n;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<std::string> chain_nets, keygate_nets, asset_nets;
    bool saw_name = false;

    while (std::getline(in, line)) {
        ++lineno;
        auto fail = [&](const std::string& m) {
            throw ValidationError("bench line " + std::to_string(lineno) + ": " + m);
        };
        std::string raw = trim(line);
        if (raw.empty()) continue;
        if (raw[0] == '#') {
            // magic metadata comments survive the round trip (net-addressed,
            // since bench has no instance names)
            std::string body = trim(raw.substr(1));
            if (!saw_name && !starts_with(body, "tromux ")) {
                // the customary leading name comment; only a single token can
                // serve as a module name downstream
                auto f = split_ws(body);
                if (f.size() == 1) n.name = f[0];
                saw_name = true;
            }
            if (starts_with(body, "tromux keychain-nets:")) {
                for (auto& f : split_ws(body.substr(21))) chain_nets.push_back(f);
            } else if (starts_with(body, "tromux keypins:")) {
                auto f = split_ws(body.substr(15));
                if (f.size() != 2) fail("keypins comment needs two names");
                n.key_data_pi = f[0];
                n.key_load_pi = f[1];
            } else if (starts_with(body, "tromux keygate-nets:")) {
                for (auto& f : split_ws(body.substr(20))) keygate_nets.push_back(f);
            } else if (starts_with(body, "tromux assets:")) {
                for (auto& f : split_ws(body.substr(14))) asset_nets.push_back(f);
            }
            continue;
        }

        auto strip_comment = raw.find('#');
        if (strip_comment != std::string::npos) raw = trim(raw.substr(0, strip_comment));

        if (starts_with(raw, "INPUT(")) {
            auto close = raw.find(')');
            if (close == std::string::npos) fail("missing ')'");
            std::string name = trim(raw.substr(6, close - 6));
            if (name.empty()) fail("empty INPUT name");
            n.mark_primary_input(get_or_add_net(n, name));
            continue;
        }
        if (starts_with(raw, "OUTPUT(")) {
            auto close = raw.find(')');
            if (close == std::string::npos) fail("missing ')'");
            std::string name = trim(raw.substr(7, close - 7));
            if (name.empty()) fail("empty OUTPUT name");
            n.mark_primary_output(get_or_add_net(n, name));
            continue;
        }

        auto eq = raw.find('=');
        if (eq == std::string::npos) fail("expected 'out = GATE(in, ...)'");
        std::string lhs = trim(raw.substr(0, eq));
        std::string rhs = trim(raw.substr(eq + 1));
        auto open = rhs.find('(');
        auto close = rhs.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            fail("malformed gate expression");
        std::string kw = trim(rhs.substr(0, open));
        std::string type = keyword_to_type(kw, lib);
        if (type.empty()) fail("unknown gate type " + kw);
        const CellType& t = lib.at(type);

        std::vector<std::string> outs = split_on(lhs, ',');
        std::vector<std::string> ins;
        std::string args = trim(rhs.substr(open + 1, close - open - 1));
        if (!args.empty())
            for (auto& a : split_on(args, ','))
                ins.push_back(a);

        if (ins.size() != t.inputs.size())
            fail(kw + " takes " + std::to_string(t.inputs.size()) + " inputs, got " +
                 std::to_string(ins.size()));
        if (outs.size() != t.outputs.size())
            fail(kw + " drives " + std::to_string(t.outputs.size()) + " outputs, got " +
                 std::to_string(outs.size()));

        int ci = n.add_cell(outs[0], type);
        for (size_t i = 0; i < ins.size(); ++i)
            n.connect(ci, t.inputs[i], get_or_add_net(n, ins[i]), lib);
        for (size_t i = 0; i < outs.size(); ++i)
            n.connect(ci, t.outputs[i], get_or_add_net(n, outs[i]), lib);
    }

    if (n.primary_outputs.empty()) throw ValidationError("no outputs declared");
    for (const Net& net : n.nets)
        if (net.driver_cell < 0 && !net.is_primary_input)
            throw ValidationError("undriven net " + net.name);

    for (const std::string& net : chain_nets) {
        std::string inst = driver_name_of(n, net);
        n.key_chain.push_back(inst);
        n.cell(n.cell_id(inst)).origin = Origin::key_chain_ff;
    }
    for (const std::string& net : keygate_nets) {
        std::string inst = driver_name_of(n, net);
        n.cell(n.cell_id(inst)).origin = Origin::key_gate;
    }
    for (const std::string& net : asset_nets) n.assets.push_back(driver_name_of(n, net));
    return n;
}

std::string write_bench(const Netlist& n, const CellLibrary& lib) {
    std::ostringstream out;
    out << "# " << n.name << "\n";
    if (!n.key_chain.empty()) {
        out << "# tromux keychain-nets:";
        for (const auto& ff : n.key_chain) out << " " << output_net_of(n, lib, ff);
        out << "\n";
    }
    if (!n.key_data_pi.empty())
        out << "# tromux keypins: " << n.key_data_pi << " " << n.key_load_pi << "\n";
    bool any_kg = false;
    for (const CellInstance& c : n.cells) any_kg |= c.origin == Origin::key_gate;
    if (any_kg) {
        out << "# tromux keygate-nets:";
        for (const CellInstance& c : n.cells)
            if (c.origin == Origin::key_gate) out << " " << output_net_of(n, lib, c.name);
        out << "\n";
    }
    if (!n.assets.empty()) {
        out << "# tromux assets:";
        for (const auto& a : n.assets) out << " " << output_net_of(n, lib, a);
        out << "\n";
    }
    for (int pi : n.primary_inputs) out << "INPUT(" << n.net(pi).name << ")\n";
    for (int po : n.primary_outputs) out << "OUTPUT(" << n.net(po).name << ")\n";
    for (const CellInstance& c : n.cells) {
        const CellType& t = lib.at(c.type);
        std::string outs;
        for (size_t i = 0; i < t.outputs.size(); ++i) {
            if (i) outs += ", ";
            outs += n.net(c.pin_net(t.outputs[i])).name;
        }
        out << outs << " = " << type_to_keyword(c.type) << "(";
        for (size_t i = 0; i < t.inputs.size(); ++i) {
            if (i) out << ", ";
            out << n.net(c.pin_net(t.inputs[i])).name;
        }
        out << ")\n";
    }
    return out.str();
}

std::vector<std::string> parse_assets(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

} // namespace tromux
