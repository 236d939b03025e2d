#include <doctest.h>

#include "support/fixtures.hpp"
#include "tromux/netlist.hpp"
#include "tromux/util.hpp"

using namespace tromux;
using namespace tromux::testsupport;

namespace {

// a -> AND2 -> y, plus a DFF closing a loop through the gate
Netlist tiny(const CellLibrary& lib) {
    Netlist n;
    int a = n.add_net("a");
    n.mark_primary_input(a);
    int y = n.add_net("y");
    int q = n.add_net("q");
    int g = n.add_cell("g1", "AND2");
    n.connect(g, "A", a, lib);
    n.connect(g, "B", q, lib);
    n.connect(g, "Y", y, lib);
    int f = n.add_cell("f1", "DFF");
    n.connect(f, "D", y, lib);
    n.connect(f, "Q", q, lib);
    n.mark_primary_output(y);
    return n;
}

} // namespace

TEST_CASE("connect and disconnect maintain both directions") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = tiny(lib);
    int g = n.cell_id("g1");
    int a = n.net_id("a");
    CHECK(n.cell(g).pin_net("A") == a);
    CHECK(n.net(a).sinks == std::vector<SinkRef>{{g, "A"}});
    int y = n.net_id("y");
    CHECK(n.net(y).driver_cell == g);
    CHECK(n.net(y).driver_pin == "Y");

    n.disconnect(g, "A", lib);
    CHECK(n.cell(g).pin_net("A") == -1);
    CHECK(n.net(a).sinks.empty());
    n.connect(g, "A", a, lib);
    CHECK(n.validate(lib).ok());
}

TEST_CASE("fanout_nets lists driven nets in connection order") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n;
    int d = n.add_net("d");
    n.mark_primary_input(d);
    int f = n.add_cell("f", "DFF_2OUT");
    int q = n.add_net("q");
    int qn = n.add_net("qn");
    n.connect(f, "QN", qn, lib);
    n.connect(f, "Q", q, lib);
    n.connect(f, "D", d, lib);
    n.mark_primary_output(q);
    n.mark_primary_output(qn);
    CHECK(n.fanout_nets(f) == std::vector<int>{qn, q});
    CHECK(n.fanout_nets("f") == std::vector<int>{qn, q});
    CHECK_THROWS_AS(n.fanout_nets("ghost"), ValidationError);
}

TEST_CASE("validate catches structural breakage") {
    const CellLibrary& lib = CellLibrary::default_library();

    SUBCASE("two drivers on one net") {
        Netlist n = tiny(lib);
        int g2 = n.add_cell("g2", "INV");
        n.connect(g2, "A", n.net_id("a"), lib);
        CHECK_THROWS_AS(n.connect(g2, "Y", n.net_id("y"), lib), ValidationError);
    }
    SUBCASE("unconnected pin") {
        Netlist n = tiny(lib);
        n.disconnect(n.cell_id("g1"), "B", lib);
        CHECK_FALSE(n.validate(lib).ok());
    }
    SUBCASE("unknown type") {
        Netlist n = tiny(lib);
        n.cells[0].type = "GHOST";
        CHECK_FALSE(n.validate(lib).ok());
    }
    SUBCASE("asset must name an FF instance") {
        Netlist n = tiny(lib);
        n.assets = {"f1"};
        CHECK(n.validate(lib).ok());
        n.assets = {"g1"};
        CHECK_FALSE(n.validate(lib).ok());
        n.assets = {"nobody"};
        CHECK_FALSE(n.validate(lib).ok());
    }
    SUBCASE("driven but sink-less net is only a warning") {
        Netlist n = tiny(lib);
        int g = n.add_cell("g2", "INV");
        n.connect(g, "A", n.net_id("a"), lib);
        n.connect(g, "Y", n.add_net("loose"), lib);
        ValidationIssues v = n.validate(lib);
        CHECK(v.ok());
        CHECK_FALSE(v.warnings.empty());
    }
    SUBCASE("undriven net is an error") {
        Netlist n = tiny(lib);
        int g2 = n.add_cell("g2", "OR2");
        n.connect(g2, "A", n.add_net("floating"), lib);
        n.connect(g2, "B", n.net_id("a"), lib);
        n.connect(g2, "Y", n.add_net("z"), lib);
        n.mark_primary_output(n.net_id("z"));
        CHECK_FALSE(n.validate(lib).ok());
    }
    SUBCASE("combinational cycle") {
        Netlist n;
        int a = n.add_net("a");
        n.mark_primary_input(a);
        int x = n.add_net("x");
        int y = n.add_net("y");
        int g1 = n.add_cell("g1", "AND2");
        int g2 = n.add_cell("g2", "AND2");
        n.connect(g1, "A", a, lib);
        n.connect(g1, "B", y, lib);
        n.connect(g1, "Y", x, lib);
        n.connect(g2, "A", a, lib);
        n.connect(g2, "B", x, lib);
        n.connect(g2, "Y", y, lib);
        n.mark_primary_output(y);
        CHECK_THROWS_AS(n.comb_topo_order(lib), ValidationError);
        CHECK_FALSE(n.validate(lib).ok());
    }
}

TEST_CASE("comb_topo_order puts drivers before sinks") {
    const CellLibrary& lib = CellLibrary::default_library();
    FixtureSpec spec;
    spec.seed = 3;
    Netlist n = random_netlist(spec, lib);
    std::vector<int> order = n.comb_topo_order(lib);
    std::vector<int> pos(n.cells.size(), -1);
    for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = int(i);
    for (int c : order)
        for (const auto& [pin, net] : n.cells[c].pins) {
            if (!lib.at(n.cells[c].type).is_input(pin)) continue;
            int drv = n.net(net).driver_cell;
            if (drv >= 0 && !lib.at(n.cells[drv].type).sequential)
                CHECK(pos[drv] < pos[c]);
        }
}

TEST_CASE("rename_cell updates indices, assets and chain") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = tiny(lib);
    n.assets = {"f1"};
    n.key_chain = {"f1"};
    n.rename_cell("f1", "f1_raw");
    CHECK(n.cell_id("f1") == -1);
    CHECK(n.cell_id("f1_raw") >= 0);
    CHECK(n.assets == std::vector<std::string>{"f1_raw"});
    CHECK(n.key_chain == std::vector<std::string>{"f1_raw"});
    CHECK_THROWS_AS(n.rename_cell("ghost", "x"), ValidationError);
    CHECK_THROWS_AS(n.rename_cell("f1_raw", "g1"), ValidationError); // name taken
}

TEST_CASE("total_cell_width sums library widths") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = tiny(lib);
    CHECK(n.total_cell_width(lib) == 2 + 4); // AND2 + DFF
}

TEST_CASE("is_ff and is_sequential") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = tiny(lib);
    CHECK(n.is_ff(n.cell_id("f1"), lib));
    CHECK_FALSE(n.is_ff(n.cell_id("g1"), lib));
    CHECK(n.is_sequential(lib));
}
