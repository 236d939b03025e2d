#include "tromux/cell_library.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tromux/util.hpp"

namespace tromux {

bool CellType::is_input(const std::string& pin) const {
    return std::find(inputs.begin(), inputs.end(), pin) != inputs.end();
}

bool CellType::is_output(const std::string& pin) const {
    return std::find(outputs.begin(), outputs.end(), pin) != outputs.end();
}

double CellType::arc_delay(const std::string& in, const std::string& out) const {
    for (const auto& [arc, d] : delays)
        if (arc.first == in && arc.second == out) return d;
    return -1.0;
}

double CellType::worst_arc() const {
    double w = 0.0;
    for (const auto& [arc, d] : delays) w = std::max(w, d);
    return w;
}

bool CellType::eval(const std::vector<uint8_t>& vals) const {
    uint64_t idx = 0;
    for (size_t i = 0; i < vals.size(); ++i)
        if (vals[i]) idx |= uint64_t(1) << i;
    return (truth >> idx) & 1;
}

const CellType* CellLibrary::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &types_[it->second];
}

const CellType& CellLibrary::at(const std::string& name) const {
    const CellType* t = find(name);
    if (!t) throw ValidationError("unknown cell type: " + name);
    return *t;
}

std::string CellLibrary::complement_of(const std::string& name) const {
    return at(name).complement;
}

int CellLibrary::smallest_ff_width() const {
    int w = -1;
    for (const auto& t : types_)
        if (t.sequential && (w < 0 || t.width < w)) w = t.width;
    if (w < 0) throw ValidationError("library has no FF type");
    return w;
}

void CellLibrary::add(CellType t) {
    if (index_.count(t.name)) throw ValidationError("duplicate cell type: " + t.name);
    index_[t.name] = int(types_.size());
    types_.push_back(std::move(t));
}

namespace {

uint64_t builtin_truth(const std::string& fn, size_t n_inputs, const std::string& cell) {
    auto need = [&](size_t n) {
        if (n_inputs != n)
            throw ValidationError("cell " + cell + ": function " + fn + " needs " +
                                  std::to_string(n) + " inputs");
    };
    if (fn == "INV") { need(1); return 0b01; }
    if (fn == "BUF") { need(1); return 0b10; }
    if (fn == "AND") { need(2); return 0b1000; }
    if (fn == "NAND") { need(2); return 0b0111; }
    if (fn == "OR") { need(2); return 0b1110; }
    if (fn == "NOR") { need(2); return 0b0001; }
    if (fn == "XOR") { need(2); return 0b0110; }
    if (fn == "XNOR") { need(2); return 0b1001; }
    if (fn == "MUX") {
        // inputs A,B,S in declared order; S=0 selects A, S=1 selects B
        need(3);
        uint64_t tt = 0;
        for (int i = 0; i < 8; ++i) {
            int a = i & 1, b = (i >> 1) & 1, s = (i >> 2) & 1;
            if (s ? b : a) tt |= uint64_t(1) << i;
        }
        return tt;
    }
    throw ValidationError("cell " + cell + ": unknown function " + fn);
}

} // namespace

CellLibrary CellLibrary::parse(const std::string& text) {
    CellLibrary lib;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        auto fields = split_ws(line);
        if (fields[0] != "CELL" || fields.size() < 2)
            throw ValidationError("library line " + std::to_string(lineno) +
                                  ": expected 'CELL <name> key=value ...'");
        CellType t;
        t.name = fields[1];
        std::string function;
        for (size_t i = 2; i < fields.size(); ++i) {
            const std::string& f = fields[i];
            auto eq = f.find('=');
            if (eq == std::string::npos)
                throw ValidationError("library line " + std::to_string(lineno) +
                                      ": malformed field '" + f + "'");
            std::string key = f.substr(0, eq), val = f.substr(eq + 1);
            if (key == "width") {
                t.width = std::stoi(val);
            } else if (key == "function") {
                function = val;
            } else if (key == "complement") {
                t.complement = val;
            } else if (key == "pins") {
                auto arrow = val.find("->");
                if (arrow == std::string::npos)
                    throw ValidationError("library line " + std::to_string(lineno) +
                                          ": pins must be 'in,..->out,..'");
                for (auto& p : split_on(val.substr(0, arrow), ','))
                    if (!p.empty()) t.inputs.push_back(p);
                for (auto& p : split_on(val.substr(arrow + 2), ','))
                    if (!p.empty()) t.outputs.push_back(p);
            } else if (starts_with(key, "delay(")) {
                auto arrow = key.find("->");
                auto close = key.find(')');
                if (arrow == std::string::npos || close == std::string::npos)
                    throw ValidationError("library line " + std::to_string(lineno) +
                                          ": malformed delay field '" + f + "'");
                std::string from = key.substr(6, arrow - 6);
                std::string to = key.substr(arrow + 2, close - arrow - 2);
                double d = std::stod(val);
                if (d < 0)
                    throw ValidationError("cell " + t.name + ": negative delay on " + from +
                                          "->" + to);
                t.delays.push_back({{from, to}, d});
            } else {
                throw ValidationError("library line " + std::to_string(lineno) +
                                      ": unknown field '" + key + "'");
            }
        }
        if (t.outputs.empty())
            throw ValidationError("cell " + t.name + ": no output pins");

        if (function == "DFF" || function == "DFFE") {
            t.sequential = true;
            t.has_enable = function == "DFFE";
            for (const auto& o : t.outputs) {
                if (o != "Q" && o != "QN")
                    throw ValidationError("cell " + t.name + ": FF outputs must be Q or QN");
                t.output_inverted.push_back(o == "QN");
            }
            std::vector<std::string> want = t.has_enable
                                                ? std::vector<std::string>{"D", "EN"}
                                                : std::vector<std::string>{"D"};
            if (t.inputs != want)
                throw ValidationError("cell " + t.name + ": FF inputs must be " +
                                      (t.has_enable ? "D,EN" : "D"));
        } else {
            if (t.outputs.size() != 1)
                throw ValidationError("cell " + t.name +
                                      ": combinational cells have a single output");
            if (t.inputs.size() > 6)
                throw ValidationError("cell " + t.name + ": more than 6 inputs unsupported");
            if (starts_with(function, "TABLE:")) {
                std::string bits = function.substr(6);
                if (bits.size() != (size_t(1) << t.inputs.size()))
                    throw ValidationError("cell " + t.name + ": TABLE needs 2^inputs bits");
                // bits written msb-first for readability: bits[0] is the value at
                // the all-ones input valuation
                for (size_t i = 0; i < bits.size(); ++i) {
                    if (bits[i] != '0' && bits[i] != '1')
                        throw ValidationError("cell " + t.name + ": bad TABLE digit");
                    if (bits[i] == '1') t.truth |= uint64_t(1) << (bits.size() - 1 - i);
                }
            } else {
                t.truth = builtin_truth(function, t.inputs.size(), t.name);
            }
        }
        lib.add(std::move(t));
    }
    lib.validate_semantics();
    return lib;
}

CellLibrary CellLibrary::load(const std::string& path) {
    return parse(read_text_file(path));
}

void CellLibrary::validate_semantics() {
    for (const auto& t : types_) {
        if (t.width <= 0) throw ValidationError("cell " + t.name + ": width must be positive");
        for (const auto& [arc, d] : t.delays) {
            (void)d;
            if (!t.is_input(arc.first) || !t.is_output(arc.second))
                throw ValidationError("cell " + t.name + ": delay arc " + arc.first + "->" +
                                      arc.second + " does not match pins");
        }
        if (!t.complement.empty()) {
            const CellType* c = find(t.complement);
            if (!c)
                throw ValidationError("cell " + t.name + ": complement " + t.complement +
                                      " not in library");
            if (c->complement != t.name)
                throw ValidationError("complement pairing not symmetric: " + t.name + " / " +
                                      t.complement);
            if (t.sequential || c->sequential)
                throw ValidationError("cell " + t.name + ": FFs cannot form complement pairs");
            if (c->inputs != t.inputs || c->outputs != t.outputs)
                throw ValidationError("complement pair " + t.name + "/" + t.complement +
                                      " must share pin names");
            // transforms swap a gate for its complement in place, so the pair has
            // to be area and timing neutral
            if (c->width != t.width)
                throw ValidationError("complement pair " + t.name + "/" + t.complement +
                                      " must share one width");
            if (c->delays != t.delays)
                throw ValidationError("complement pair " + t.name + "/" + t.complement +
                                      " must share arc delays");
            // pointwise negation over the full truth table
            uint64_t n = uint64_t(1) << t.inputs.size();
            for (uint64_t i = 0; i < n; ++i)
                if (((t.truth >> i) & 1) == ((c->truth >> i) & 1))
                    throw ValidationError("complement pair " + t.name + "/" + t.complement +
                                          " is not a pointwise negation");
        }
    }
    for (const char* req : {"INV", "MUX2", "XOR2", "XNOR2"})
        if (!has(req)) throw ValidationError(std::string("library is missing ") + req);
    smallest_ff_width(); // throws when no FF type exists
    sigma_mux_ = at("INV").worst_arc() + at("MUX2").worst_arc();
    sigma_xor_ = at("XOR2").worst_arc();
}

std::string CellLibrary::to_text() const {
    std::ostringstream out;
    for (const auto& t : types_) {
        out << "CELL " << t.name << " width=" << t.width;
        if (t.sequential) {
            out << " function=" << (t.has_enable ? "DFFE" : "DFF");
        } else {
            // re-emit as a table; parse() accepts it unambiguously
            std::string bits;
            uint64_t n = uint64_t(1) << t.inputs.size();
            for (uint64_t i = 0; i < n; ++i)
                bits += ((t.truth >> (n - 1 - i)) & 1) ? '1' : '0';
            out << " function=TABLE:" << bits;
        }
        if (!t.complement.empty()) out << " complement=" << t.complement;
        out << " pins=";
        for (size_t i = 0; i < t.inputs.size(); ++i) out << (i ? "," : "") << t.inputs[i];
        out << "->";
        for (size_t i = 0; i < t.outputs.size(); ++i) out << (i ? "," : "") << t.outputs[i];
        for (const auto& [arc, d] : t.delays)
            out << " delay(" << arc.first << "->" << arc.second << ")=" << d;
        out << "\n";
    }
    return out.str();
}

const char* CellLibrary::default_library_text() {
    return
        "# reference cell library: unit arc delays, INV at 0.5\n"
        "CELL INV      width=1 function=INV pins=A->Y delay(A->Y)=0.5\n"
        "CELL AND2     width=2 function=AND  complement=NAND2 pins=A,B->Y delay(A->Y)=1.0 delay(B->Y)=1.0\n"
        "CELL NAND2    width=2 function=NAND complement=AND2  pins=A,B->Y delay(A->Y)=1.0 delay(B->Y)=1.0\n"
        "CELL OR2      width=2 function=OR   complement=NOR2  pins=A,B->Y delay(A->Y)=1.0 delay(B->Y)=1.0\n"
        "CELL NOR2     width=2 function=NOR  complement=OR2   pins=A,B->Y delay(A->Y)=1.0 delay(B->Y)=1.0\n"
        "CELL XOR2     width=3 function=XOR  complement=XNOR2 pins=A,B->Y delay(A->Y)=1.0 delay(B->Y)=1.0\n"
        "CELL XNOR2    width=3 function=XNOR complement=XOR2  pins=A,B->Y delay(A->Y)=1.0 delay(B->Y)=1.0\n"
        "CELL MUX2     width=3 function=MUX pins=A,B,S->Y delay(A->Y)=1.0 delay(B->Y)=1.0 delay(S->Y)=1.0\n"
        "CELL DFF      width=4 function=DFF  pins=D->Q\n"
        "CELL DFF_QN   width=4 function=DFF  pins=D->QN\n"
        "CELL DFF_2OUT width=4 function=DFF  pins=D->Q,QN\n"
        "CELL DFF_LE   width=4 function=DFFE pins=D,EN->Q\n"
        "CELL DFF_LE_2OUT width=4 function=DFFE pins=D,EN->Q,QN\n";
}

const CellLibrary& CellLibrary::default_library() {
    static CellLibrary lib = parse(default_library_text());
    return lib;
}

} // namespace tromux
