#include "tromux/netlist.hpp"

#include <algorithm>
#include <deque>

#include "tromux/util.hpp"

namespace tromux {

const char* to_string(Origin o) {
    switch (o) {
        case Origin::original: return "original";
        case Origin::key_gate: return "key_gate";
        case Origin::key_chain_ff: return "key_chain_ff";
        case Origin::trojan: return "trojan";
    }
    return "?";
}

int CellInstance::pin_net(const std::string& pin) const {
    for (const auto& [p, n] : pins)
        if (p == pin) return n;
    return -1;
}

void CellInstance::set_pin(const std::string& pin, int net) {
    for (auto& [p, n] : pins) {
        if (p == pin) {
            n = net;
            return;
        }
    }
    pins.push_back({pin, net});
}

int Netlist::add_net(const std::string& net_name) {
    if (net_index_.count(net_name))
        throw ValidationError("name collision: net " + net_name + " already exists");
    int id = int(nets.size());
    Net n;
    n.name = net_name;
    nets.push_back(std::move(n));
    net_index_[net_name] = id;
    return id;
}

int Netlist::add_cell(const std::string& cell_name, const std::string& type) {
    if (cell_index_.count(cell_name))
        throw ValidationError("name collision: instance " + cell_name + " already exists");
    int id = int(cells.size());
    CellInstance c;
    c.name = cell_name;
    c.type = type;
    cells.push_back(std::move(c));
    cell_index_[cell_name] = id;
    return id;
}

int Netlist::net_id(const std::string& net_name) const {
    auto it = net_index_.find(net_name);
    return it == net_index_.end() ? -1 : it->second;
}

int Netlist::cell_id(const std::string& cell_name) const {
    auto it = cell_index_.find(cell_name);
    return it == cell_index_.end() ? -1 : it->second;
}

void Netlist::connect(int cell, const std::string& pin, int net, const CellLibrary& lib) {
    CellInstance& c = cells[cell];
    const CellType& t = lib.at(c.type);
    if (c.pin_net(pin) != -1)
        throw ValidationError("instance " + c.name + ": pin " + pin + " already connected");
    if (t.is_output(pin)) {
        if (nets[net].driver_cell != -1 || nets[net].is_primary_input)
            throw ValidationError("net " + nets[net].name + " already has a driver");
        nets[net].driver_cell = cell;
        nets[net].driver_pin = pin;
    } else if (t.is_input(pin)) {
        nets[net].sinks.push_back({cell, pin});
    } else {
        throw ValidationError("instance " + c.name + ": type " + c.type + " has no pin " + pin);
    }
    c.set_pin(pin, net);
}

void Netlist::disconnect(int cell, const std::string& pin, const CellLibrary& lib) {
    CellInstance& c = cells[cell];
    int net = c.pin_net(pin);
    if (net < 0) throw ValidationError("instance " + c.name + ": pin " + pin + " not connected");
    const CellType& t = lib.at(c.type);
    Net& n = nets[net];
    if (t.is_output(pin)) {
        n.driver_cell = -1;
        n.driver_pin.clear();
    } else {
        SinkRef ref{cell, pin};
        n.sinks.erase(std::remove(n.sinks.begin(), n.sinks.end(), ref), n.sinks.end());
    }
    c.pins.erase(std::remove_if(c.pins.begin(), c.pins.end(),
                                [&](const auto& pn) { return pn.first == pin; }),
                 c.pins.end());
}

void Netlist::mark_primary_input(int net) {
    Net& n = nets[net];
    if (n.driver_cell != -1)
        throw ValidationError("net " + n.name + " is cell-driven, cannot be a primary input");
    if (!n.is_primary_input) {
        n.is_primary_input = true;
        primary_inputs.push_back(net);
    }
}

void Netlist::mark_primary_output(int net) {
    Net& n = nets[net];
    if (!n.is_primary_output) {
        n.is_primary_output = true;
        primary_outputs.push_back(net);
    }
}

void Netlist::rename_cell(const std::string& old_name, const std::string& new_name) {
    // copy both: callers may pass cells[id].name itself as old_name
    std::string from = old_name, to = new_name;
    if (from == to) return;
    auto it = cell_index_.find(from);
    if (it == cell_index_.end()) throw ValidationError("rename: unknown instance " + from);
    if (cell_index_.count(to))
        throw ValidationError("rename: instance name already in use: " + to);
    int id = it->second;
    cell_index_.erase(it);
    cell_index_[to] = id;
    cells[id].name = to;
    for (auto& a : assets)
        if (a == from) a = to;
    for (auto& k : key_chain)
        if (k == from) k = to;
}

std::vector<int> Netlist::fanout_nets(int cell) const {
    std::vector<int> out;
    const CellInstance& c = cells[cell];
    for (const auto& [pin, net] : c.pins)
        if (nets[net].driver_cell == cell && nets[net].driver_pin == pin) out.push_back(net);
    return out;
}

std::vector<int> Netlist::fanout_nets(const std::string& instance) const {
    int id = cell_id(instance);
    if (id < 0) throw ValidationError("unknown instance: " + instance);
    return fanout_nets(id);
}

bool Netlist::is_ff(int cell, const CellLibrary& lib) const {
    return lib.at(cells[cell].type).sequential;
}

bool Netlist::is_sequential(const CellLibrary& lib) const {
    for (size_t i = 0; i < cells.size(); ++i)
        if (lib.at(cells[i].type).sequential) return true;
    return false;
}

std::vector<int> Netlist::comb_topo_order(const CellLibrary& lib) const {
    // Kahn's algorithm over combinational cells; a cell is ready once all its
    // input nets are resolved (PI, FF output, or already-ordered comb cell).
    std::vector<int> indeg(cells.size(), 0);
    std::vector<std::vector<int>> consumers(nets.size());
    std::vector<int> order;
    std::deque<int> ready;

    for (size_t ci = 0; ci < cells.size(); ++ci) {
        if (lib.at(cells[ci].type).sequential) continue;
        const CellType& t = lib.at(cells[ci].type);
        int pending = 0;
        for (const auto& [pin, net] : cells[ci].pins) {
            if (!t.is_input(pin)) continue;
            const Net& n = nets[net];
            bool resolved = n.driver_cell < 0 || lib.at(cells[n.driver_cell].type).sequential;
            if (!resolved) {
                ++pending;
                consumers[net].push_back(int(ci));
            }
        }
        indeg[ci] = pending;
        if (pending == 0) ready.push_back(int(ci));
    }

    size_t comb_count = 0;
    for (size_t ci = 0; ci < cells.size(); ++ci)
        if (!lib.at(cells[ci].type).sequential) ++comb_count;

    while (!ready.empty()) {
        int ci = ready.front();
        ready.pop_front();
        order.push_back(ci);
        for (int net : fanout_nets(ci))
            for (int consumer : consumers[net])
                if (--indeg[consumer] == 0) ready.push_back(consumer);
    }
    if (order.size() != comb_count) {
        // name one cell stuck on the cycle for the error message
        std::string culprit;
        for (size_t ci = 0; ci < cells.size(); ++ci)
            if (!lib.at(cells[ci].type).sequential && indeg[ci] > 0) {
                culprit = cells[ci].name;
                break;
            }
        throw ValidationError("combinational cycle detected (through instance " + culprit + ")");
    }
    return order;
}

ValidationIssues Netlist::validate(const CellLibrary& lib) const {
    ValidationIssues issues;
    auto err = [&](const std::string& m) { issues.errors.push_back(m); };
    auto warn = [&](const std::string& m) { issues.warnings.push_back(m); };

    for (size_t ni = 0; ni < nets.size(); ++ni) {
        const Net& n = nets[ni];
        if (net_id(n.name) != int(ni)) err("net index broken for " + n.name);
        if (n.is_primary_input && n.driver_cell != -1)
            err("net " + n.name + " is a primary input but cell-driven");
        if (!n.is_primary_input && n.driver_cell == -1)
            err("net " + n.name + " has no driver");
        if (n.driver_cell != -1) {
            const CellInstance& d = cells[n.driver_cell];
            if (d.pin_net(n.driver_pin) != int(ni))
                err("net " + n.name + ": driver pin bookkeeping broken");
        }
        if (n.sinks.empty() && !n.is_primary_output)
            warn("net " + n.name + " dangles (no sinks, not an output)");
        for (const SinkRef& s : n.sinks) {
            if (s.cell < 0 || s.cell >= int(cells.size()) ||
                cells[s.cell].pin_net(s.pin) != int(ni))
                err("net " + n.name + ": sink bookkeeping broken");
        }
    }

    for (size_t ci = 0; ci < cells.size(); ++ci) {
        const CellInstance& c = cells[ci];
        if (cell_id(c.name) != int(ci)) err("cell index broken for " + c.name);
        const CellType* t = lib.find(c.type);
        if (!t) {
            err("instance " + c.name + ": unknown type " + c.type);
            continue;
        }
        size_t want = t->inputs.size() + t->outputs.size();
        if (c.pins.size() != want) {
            err("instance " + c.name + ": expected " + std::to_string(want) + " pins, has " +
                std::to_string(c.pins.size()));
            continue;
        }
        for (const auto& [pin, net] : c.pins) {
            if (!t->is_input(pin) && !t->is_output(pin))
                err("instance " + c.name + ": pin " + pin + " not in type " + c.type);
            if (net < 0 || net >= int(nets.size()))
                err("instance " + c.name + ": pin " + pin + " connects to missing net");
        }
    }

    for (const std::string& a : assets) {
        int ci = cell_id(a);
        if (ci < 0)
            err("asset " + a + " does not name an instance");
        else if (!lib.find(cells[ci].type) || !lib.at(cells[ci].type).sequential)
            err("asset " + a + " is not an FF instance");
    }

    for (const std::string& ff : key_chain) {
        int ci = cell_id(ff);
        if (ci < 0)
            err("key chain names missing instance " + ff);
        else if (cells[ci].origin != Origin::key_chain_ff)
            err("key chain instance " + ff + " lacks the key_chain_ff origin");
    }

    if (issues.ok()) {
        try {
            comb_topo_order(lib);
        } catch (const Error& e) {
            err(e.what());
        }
    }
    return issues;
}

void Netlist::ensure_valid(const CellLibrary& lib) const {
    ValidationIssues issues = validate(lib);
    if (!issues.ok()) throw ValidationError("netlist " + name + ": " + issues.errors.front());
}

long long Netlist::total_cell_width(const CellLibrary& lib) const {
    long long sum = 0;
    for (const CellInstance& c : cells) sum += lib.at(c.type).width;
    return sum;
}

} // namespace tromux
