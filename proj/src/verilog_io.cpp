#include <cctype>
#include <map>
#include <sstream>

#include "tromux/netlist_io.hpp"
#include "tromux/util.hpp"

namespace tromux {

namespace {

struct Token {
    std::string text;
    int line;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> toks;
    int line = 1;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
            i += 2;
            while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/')) {
                if (text[i] == '\n') ++line;
                ++i;
            }
            i += 2;
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
                   c == '\\') {
            size_t b = i;
            if (c == '\\') { // escaped identifier: up to whitespace
                ++i;
                while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            } else {
                while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                                           text[i] == '_' || text[i] == '$'))
                    ++i;
            }
            toks.push_back({text.substr(b, i - b), line});
        } else {
            toks.push_back({std::string(1, c), line});
            ++i;
        }
    }
    return toks;
}

struct Parser {
    const std::vector<Token>& toks;
    size_t pos = 0;
    const CellLibrary& lib;
    Netlist n;
    std::map<std::string, char> declared; // name -> 'i' | 'o' | 'w'
    std::vector<std::string> output_ports;
    std::vector<std::pair<std::string, std::string>> aliases; // output port -> source net

    Parser(const std::vector<Token>& t, const CellLibrary& l) : toks(t), lib(l) {}

    [[noreturn]] void fail(const std::string& m) {
        int line = pos < toks.size() ? toks[pos].line : (toks.empty() ? 0 : toks.back().line);
        throw ValidationError("verilog line " + std::to_string(line) + ": " + m);
    }
    bool at_end() const { return pos >= toks.size(); }
    const std::string& peek() {
        if (at_end()) fail("unexpected end of file");
        return toks[pos].text;
    }
    std::string take() {
        std::string t = peek();
        ++pos;
        return t;
    }
    void expect(const std::string& t) {
        if (take() != t) {
            --pos;
            fail("expected '" + t + "', got '" + peek() + "'");
        }
    }

    int use_net(const std::string& name) {
        int id = n.net_id(name);
        if (id >= 0) return id;
        if (!declared.count(name)) fail("undeclared net " + name);
        return n.add_net(name);
    }

    void parse_decl(char kind) {
        while (true) {
            std::string name = take();
            if (name == "[") fail("unsupported construct: vector declarations");
            // a wire redeclaration must not downgrade an output port
            if (kind != 'w' || !declared.count(name)) declared[name] = kind;
            // nets exist from their declaration on, so net ids follow the
            // declaration order and round trips keep a stable ordering
            if (kind == 'i') n.mark_primary_input(use_net_decl(name));
            if (kind == 'w') use_net_decl(name);
            if (kind == 'o') output_ports.push_back(name);
            std::string sep = take();
            if (sep == ";") return;
            if (sep != ",") fail("expected ',' or ';' in declaration");
        }
    }

    int use_net_decl(const std::string& name) {
        int id = n.net_id(name);
        return id >= 0 ? id : n.add_net(name);
    }

    void parse_instance(const std::string& type) {
        const CellType& t = lib.at(type);
        std::string inst = take();
        int ci = n.add_cell(inst, type);
        expect("(");
        while (true) {
            expect(".");
            std::string pin = take();
            expect("(");
            std::string net = take();
            expect(")");
            n.connect(ci, pin, use_net(net), lib);
            std::string sep = take();
            if (sep == ")") break;
            if (sep != ",") fail("expected ',' or ')' in port connections");
        }
        expect(";");
        (void)t;
    }

    void run() {
        expect("module");
        n.name = take();
        expect("(");
        if (peek() != ")") {
            while (true) {
                take(); // port order is re-derived from the direction decls
                std::string sep = take();
                if (sep == ")") break;
                if (sep != ",") fail("expected ',' or ')' in port list");
            }
        } else {
            take();
        }
        expect(";");

        while (peek() != "endmodule") {
            std::string kw = take();
            if (kw == "input") {
                parse_decl('i');
            } else if (kw == "output") {
                parse_decl('o');
            } else if (kw == "wire") {
                parse_decl('w');
            } else if (kw == "assign") {
                std::string lhs = take();
                expect("=");
                std::string rhs = take();
                expect(";");
                if (!declared.count(lhs) || declared[lhs] != 'o')
                    fail("assign target " + lhs + " must be an output port");
                aliases.push_back({lhs, rhs});
            } else if (lib.has(kw)) {
                parse_instance(kw);
            } else {
                fail("unsupported construct '" + kw + "'");
            }
        }
        take(); // endmodule

        for (const std::string& po : output_ports) {
            int id = n.net_id(po);
            if (id >= 0) {
                n.mark_primary_output(id);
                continue;
            }
            bool found = false;
            for (const auto& [port, src] : aliases) {
                if (port != po) continue;
                int s = n.net_id(src);
                if (s < 0) fail("assign source " + src + " never driven");
                n.net(s).output_alias = po;
                n.mark_primary_output(s);
                found = true;
                break;
            }
            if (!found) fail("output port " + po + " is never driven");
        }
    }
};

} // namespace

Netlist parse_structural_verilog(const std::string& text, const CellLibrary& lib) {
    auto toks = tokenize(text);
    Parser p(toks, lib);
    p.run();
    Netlist n = std::move(p.n);

    if (n.primary_outputs.empty()) throw ValidationError("no outputs declared");
    for (const Net& net : n.nets)
        if (net.driver_cell < 0 && !net.is_primary_input)
            throw ValidationError("undriven net " + net.name);

    // metadata comments, same net-addressed convention as the bench dialect
    std::istringstream in(text);
    std::string line;
    auto driver_of = [&](const std::string& net) {
        int id = n.net_id(net);
        if (id < 0 || n.net(id).driver_cell < 0)
            throw ValidationError("metadata comment references undriven net " + net);
        return n.net(id).driver_cell;
    };
    while (std::getline(in, line)) {
        auto at = line.find("// tromux ");
        if (at == std::string::npos) continue;
        std::string body = trim(line.substr(at + 10));
        if (starts_with(body, "keychain-nets:")) {
            for (auto& f : split_ws(body.substr(14))) {
                int ci = driver_of(f);
                n.key_chain.push_back(n.cell(ci).name);
                n.cell(ci).origin = Origin::key_chain_ff;
            }
        } else if (starts_with(body, "keypins:")) {
            auto f = split_ws(body.substr(8));
            if (f.size() == 2) {
                n.key_data_pi = f[0];
                n.key_load_pi = f[1];
            }
        } else if (starts_with(body, "keygate-nets:")) {
            for (auto& f : split_ws(body.substr(13)))
                n.cell(driver_of(f)).origin = Origin::key_gate;
        } else if (starts_with(body, "assets:")) {
            for (auto& f : split_ws(body.substr(7))) n.assets.push_back(n.cell(driver_of(f)).name);
        }
    }
    return n;
}

std::string write_verilog(const Netlist& n, const CellLibrary& lib) {
    std::ostringstream out;

    auto first_output_net = [&](const std::string& inst) {
        int ci = n.cell_id(inst);
        const CellType& t = lib.at(n.cell(ci).type);
        return n.net(n.cell(ci).pin_net(t.outputs[0])).name;
    };
    if (!n.key_chain.empty()) {
        out << "// tromux keychain-nets:";
        for (const auto& ff : n.key_chain) out << " " << first_output_net(ff);
        out << "\n";
    }
    if (!n.key_data_pi.empty())
        out << "// tromux keypins: " << n.key_data_pi << " " << n.key_load_pi << "\n";
    bool any_kg = false;
    for (const CellInstance& c : n.cells) any_kg |= c.origin == Origin::key_gate;
    if (any_kg) {
        out << "// tromux keygate-nets:";
        for (const CellInstance& c : n.cells)
            if (c.origin == Origin::key_gate) out << " " << first_output_net(c.name);
        out << "\n";
    }
    if (!n.assets.empty()) {
        out << "// tromux assets:";
        for (const auto& a : n.assets) out << " " << first_output_net(a);
        out << "\n";
    }

    // exported output names; a net that is both PI and PO needs an alias since
    // a port cannot have both directions
    std::vector<std::pair<int, std::string>> po_exports;
    for (int po : n.primary_outputs) {
        const Net& net = n.net(po);
        std::string exported = net.output_alias;
        if (exported.empty() && net.is_primary_input)
            exported = kReservedPrefix + "out_" + net.name;
        po_exports.push_back({po, exported});
    }

    out << "module " << n.name << " (";
    bool first = true;
    for (int pi : n.primary_inputs) {
        out << (first ? "" : ", ") << n.net(pi).name;
        first = false;
    }
    for (const auto& [po, exported] : po_exports) {
        out << (first ? "" : ", ") << (exported.empty() ? n.net(po).name : exported);
        first = false;
    }
    out << ");\n";

    for (int pi : n.primary_inputs) out << "  input " << n.net(pi).name << ";\n";
    for (const auto& [po, exported] : po_exports)
        out << "  output " << (exported.empty() ? n.net(po).name : exported) << ";\n";

    // every non-input net gets a wire declaration, output ports included,
    // so a re-parse recreates the nets in this exact order
    for (const Net& net : n.nets)
        if (!net.is_primary_input) out << "  wire " << net.name << ";\n";

    for (const CellInstance& c : n.cells) {
        const CellType& t = lib.at(c.type);
        out << "  " << c.type << " " << c.name << " (";
        bool f = true;
        for (const auto& pin : t.inputs) {
            out << (f ? "" : ", ") << "." << pin << "(" << n.net(c.pin_net(pin)).name << ")";
            f = false;
        }
        for (const auto& pin : t.outputs) {
            out << (f ? "" : ", ") << "." << pin << "(" << n.net(c.pin_net(pin)).name << ")";
            f = false;
        }
        out << ");\n";
    }

    for (const auto& [po, exported] : po_exports)
        if (!exported.empty())
            out << "  assign " << exported << " = " << n.net(po).name << ";\n";

    out << "endmodule\n";
    return out.str();
}

} // namespace tromux
