#include <doctest.h>

#include <filesystem>

#include "support/fixtures.hpp"
#include "tromux/locking.hpp"
#include "tromux/netlist_io.hpp"
#include "tromux/util.hpp"

using namespace tromux;
using namespace tromux::testsupport;

namespace {

const char* kSmall =
    "INPUT(a)\n"
    "INPUT(b)\n"
    "OUTPUT(y)\n"
    "q = DFF(y)\n"
    "n1 = AND(a, b)\n"
    "y = XOR(n1, q)\n";

} // namespace

TEST_CASE("bench parse builds the expected graph") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = parse_bench(kSmall, lib);
    CHECK(n.primary_inputs.size() == 2);
    CHECK(n.primary_outputs.size() == 1);
    CHECK(n.cells.size() == 3);
    // instances take their first output net's name
    CHECK(n.cell_id("q") >= 0);
    CHECK(n.cell(n.cell_id("q")).type == "DFF");
    CHECK(n.cell(n.cell_id("n1")).type == "AND2");
    CHECK(n.cell(n.cell_id("y")).type == "XOR2");
    n.ensure_valid(lib);
}

TEST_CASE("bench write/parse round trip is textually stable") {
    const CellLibrary& lib = CellLibrary::default_library();
    FixtureSpec spec;
    spec.seed = 11;
    Netlist n = random_netlist(spec, lib);
    std::string once = write_bench(n, lib);
    Netlist again = parse_bench(once, lib);
    CHECK(write_bench(again, lib) == once);
    CHECK(again.cells.size() == n.cells.size());
    CHECK(again.nets.size() == n.nets.size());
}

TEST_CASE("bench metadata comments restore key chain, gates and assets") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = parse_bench(kSmall, lib);
    n.assets = {"q"};
    LockingPlan plan;
    plan.entries.push_back({"q", "", -1});
    plan.entries.push_back({"n1", "", -1});
    apply_plan(n, lib, plan, Variant::mux, 5);

    std::string text = write_bench(n, lib);
    Netlist again = parse_bench(text, lib);
    CHECK(again.key_chain == n.key_chain);
    CHECK(again.key_data_pi == "tromux_key_data");
    CHECK(again.key_load_pi == "tromux_key_load");
    CHECK(again.assets == n.assets);
    int kg = 0, kc = 0;
    for (const auto& c : again.cells) {
        kg += c.origin == Origin::key_gate;
        kc += c.origin == Origin::key_chain_ff;
    }
    CHECK(kg >= 2);
    CHECK(kc == 2);
    CHECK(write_bench(again, lib) == text);
}

TEST_CASE("bench parse errors carry line numbers and causes") {
    const CellLibrary& lib = CellLibrary::default_library();
    CHECK_THROWS_WITH_AS(parse_bench("", lib), "no outputs declared", ValidationError);
    CHECK_THROWS_WITH_AS(parse_bench("INPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n", lib),
                         "undriven net a", ValidationError);
    CHECK_THROWS_AS(parse_bench("INPUT(a\n", lib), ValidationError);
    CHECK_THROWS_AS(parse_bench("OUTPUT(y)\ny = FROB(a)\n", lib), ValidationError);
    CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a)\n", lib), ValidationError);
    CHECK_THROWS_AS(
        parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\ny = NOT(a)\n", lib),
        ValidationError); // double driver
    try {
        parse_bench("INPUT(a)\nOUTPUT(y)\nbroken line\ny = NOT(a)\n", lib);
        FAIL("expected throw");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("verilog round trip preserves structure and metadata") {
    const CellLibrary& lib = CellLibrary::default_library();
    FixtureSpec spec;
    spec.seed = 12;
    spec.ffs = 6;
    Netlist n = random_netlist(spec, lib);
    n.assets = pick_assets(n, lib, 2);
    LockingPlan plan;
    plan.entries.push_back({n.assets[0], "", -1});
    apply_plan(n, lib, plan, Variant::xor_, 9);

    std::string text = write_verilog(n, lib);
    Netlist again = parse_structural_verilog(text, lib);
    CHECK(again.cells.size() == n.cells.size());
    CHECK(again.nets.size() == n.nets.size());
    CHECK(again.key_chain == n.key_chain);
    CHECK(again.assets == n.assets);
    CHECK(write_verilog(again, lib) == text);
    again.ensure_valid(lib);
}

TEST_CASE("verilog output alias keeps PI-driven outputs legal") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n;
    int a = n.add_net("a");
    n.mark_primary_input(a);
    n.mark_primary_output(a); // same net both directions
    int g = n.add_cell("g", "INV");
    int y = n.add_net("y");
    n.connect(g, "A", a, lib);
    n.connect(g, "Y", y, lib);
    n.mark_primary_output(y);

    std::string text = write_verilog(n, lib);
    Netlist again = parse_structural_verilog(text, lib);
    CHECK(again.primary_outputs.size() == 2);
    CHECK(write_verilog(again, lib) == text);
}

TEST_CASE("verilog rejects unsupported constructs with location") {
    const CellLibrary& lib = CellLibrary::default_library();
    const char* always =
        "module top(a, y);\ninput a;\noutput y;\nalways @(posedge a) y <= a;\nendmodule\n";
    try {
        parse_structural_verilog(always, lib);
        FAIL("expected throw");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("unsupported construct") != std::string::npos);
        CHECK(msg.find("line") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_structural_verilog(
                        "module top(a, y);\ninput a;\noutput y;\nwire [3:0] v;\nendmodule\n", lib),
                    ValidationError);
}

TEST_CASE("format detection by extension") {
    const CellLibrary& lib = CellLibrary::default_library();
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "tromux_io_test";
    fs::create_directories(dir);
    Netlist n = parse_bench(kSmall, lib);
    write_text_file((dir / "t.bench").string(), write_netlist(n, lib, NetlistFormat::bench));
    write_text_file((dir / "t.v").string(), write_netlist(n, lib, NetlistFormat::verilog));
    Netlist nb = read_netlist_file((dir / "t.bench").string(), lib);
    Netlist nv = read_netlist_file((dir / "t.v").string(), lib);
    CHECK(nb.cells.size() == n.cells.size());
    CHECK(nv.cells.size() == n.cells.size());
    CHECK_THROWS_AS(read_netlist_file((dir / "t.xyz").string(), lib), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("asset list file parsing") {
    parse_assets("");
    auto a = parse_assets("# comment\nff1\n ff2 \n\nff3 # trailing\n");
    CHECK(a == std::vector<std::string>{"ff1", "ff2", "ff3"});
}
