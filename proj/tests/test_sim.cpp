#include <doctest.h>

#include "support/fixtures.hpp"
#include "tromux/netlist_io.hpp"
#include "tromux/sim.hpp"
#include "tromux/util.hpp"

using namespace tromux;
using namespace tromux::testsupport;

namespace {

Netlist from_bench(const std::string& text) {
    return parse_bench(text, CellLibrary::default_library());
}

} // namespace

TEST_CASE("combinational evaluation matches hand truth table") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = from_bench(
        "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\n"
        "n1 = AND(a, b)\n"
        "n2 = MUX(n1, b, c)\n"
        "y = XNOR(n2, a)\n");
    // hold each input combination one cycle; design is purely combinational
    std::vector<std::vector<uint8_t>> vecs;
    for (int v = 0; v < 8; ++v)
        vecs.push_back({uint8_t(v & 1), uint8_t((v >> 1) & 1), uint8_t((v >> 2) & 1)});
    SimTrace tr = simulate(n, lib, vecs);
    int y = n.net_id("y");
    for (int v = 0; v < 8; ++v) {
        int a = v & 1, b = (v >> 1) & 1, c = (v >> 2) & 1;
        int n1 = a & b;
        int n2 = c ? b : n1;
        CHECK(int(tr.values[v][y]) == (n2 == a ? 1 : 0));
    }
}

TEST_CASE("flip-flop flavors: inversion, two outputs, load enable") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = from_bench(
        "INPUT(d)\nINPUT(en)\nOUTPUT(q)\nOUTPUT(qn)\nOUTPUT(e)\n"
        "q, qn = DFF2(d)\n"
        "e = DFFE(d, en)\n");
    // cycles: (d,en) = (1,0), (1,1), (0,0)
    SimTrace tr = simulate(n, lib, {{1, 0}, {1, 1}, {0, 0}});
    int q = n.net_id("q"), qn = n.net_id("qn"), e = n.net_id("e");
    // cycle 0 shows reset state
    CHECK(tr.values[0][q] == 0);
    CHECK(tr.values[0][qn] == 1);
    CHECK(tr.values[0][e] == 0);
    // d=1 captured by DFF2 but not by the disabled DFFE
    CHECK(tr.values[1][q] == 1);
    CHECK(tr.values[1][qn] == 0);
    CHECK(tr.values[1][e] == 0);
    // en was 1 in cycle 1, so the DFFE captured d=1; DFF2 captured d=1 again
    CHECK(tr.values[2][q] == 1);
    CHECK(tr.values[2][e] == 1);
}

TEST_CASE("ff_preset, pin_const and force_nets") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = from_bench(
        "INPUT(a)\nINPUT(k)\nOUTPUT(y)\n"
        "q = DFF(q)\n"
        "n1 = AND(a, k)\n"
        "y = OR(n1, q)\n");
    SimOptions opt;
    opt.ff_preset = {{"q", 1}};
    opt.pin_const = {{"k", 1}};
    SimEngine eng(n, lib, opt);
    CHECK(eng.data_pis().size() == 1); // k is pinned, a remains
    const auto& v1 = eng.step({0});
    CHECK(v1[n.net_id("q")] == 1); // preset survives reset
    CHECK(v1[n.net_id("k")] == 1);
    CHECK(v1[n.net_id("y")] == 1);

    SimOptions forced;
    forced.force_nets = {{"n1", 1}};
    SimTrace tr = simulate(n, lib, {{0, 0}}, forced);
    CHECK(tr.values[0][n.net_id("n1")] == 1); // held despite a=k=0
    CHECK(tr.values[0][n.net_id("y")] == 1);
}

TEST_CASE("random_vectors shape and determinism") {
    auto a = random_vectors(16, 3, 9);
    auto b = random_vectors(16, 3, 9);
    auto c = random_vectors(16, 3, 10);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 16);
    for (const auto& v : a) {
        CHECK(v.size() == 3);
        for (uint8_t bit : v) CHECK(bit <= 1);
    }
}

TEST_CASE("toggle profile: free-running bit toggles exactly once per cycle") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = from_bench("INPUT(a)\nOUTPUT(q)\nq = DFF(nq)\nnq = NOT(q)\na2 = AND(a, q)\nOUTPUT(a2)\n");
    ToggleProfile p = toggle_profile(n, lib, 10000, 42);
    CHECK(p.tpc[n.net_id("q")] == 1.0);
    CHECK(p.tpc[n.net_id("nq")] == 1.0);
    CHECK(p.cycles == 10000);
    CHECK(p.seed == 42);
}

TEST_CASE("toggle profile: xor of random inputs sits near one half") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = from_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = XOR(a, b)\n");
    ToggleProfile p = toggle_profile(n, lib, 10000, 42);
    CHECK(p.tpc[n.net_id("y")] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(p.tpc[n.net_id("a")] == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("toggle profile: serial and parallel agree bit-exactly") {
    const CellLibrary& lib = CellLibrary::default_library();
    FixtureSpec spec;
    spec.seed = 21;
    Netlist n = random_netlist(spec, lib);
    ToggleProfile s = toggle_profile_serial(n, lib, 3000, 5);
    ToggleProfile p = toggle_profile(n, lib, 3000, 5);
    CHECK(s.tpc == p.tpc); // exact equality, not approximate
    CHECK_THROWS_AS(toggle_profile(n, lib, 0, 5), ValidationError);
}

TEST_CASE("profile file round trip and snapshot prefix") {
    const CellLibrary& lib = CellLibrary::default_library();
    FixtureSpec spec;
    spec.seed = 22;
    spec.gates = 20;
    Netlist n = random_netlist(spec, lib);
    ToggleProfile p = toggle_profile(n, lib, 2048, 7);
    std::string text = write_profile(n, p);
    ToggleProfile q = parse_profile(n, text);
    CHECK(q.cycles == p.cycles);
    CHECK(q.seed == p.seed);
    for (size_t i = 0; i < p.tpc.size(); ++i)
        CHECK(q.tpc[i] == doctest::Approx(p.tpc[i]).epsilon(1e-7));

    // a profile taken on a snapshot still writes against the grown netlist
    Netlist grown = n;
    int extra = grown.add_cell("late", "INV");
    grown.connect(extra, "A", grown.primary_inputs[0], lib);
    grown.connect(extra, "Y", grown.add_net("late"), lib);
    std::string prefix = write_profile(grown, p);
    CHECK(prefix == text);

    ToggleProfile big = toggle_profile(grown, lib, 1024, 7);
    CHECK_THROWS_AS(write_profile(n, big), ValidationError);
    CHECK_THROWS_AS(parse_profile(n, "pi0 0.5\n"), ValidationError);  // missing nets
    CHECK_THROWS_AS(parse_profile(n, text + "ghost 1\n"), ValidationError);
}

TEST_CASE("lcn threshold is inclusive and ordering is ascending") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist n = from_bench(
        "INPUT(a)\nINPUT(b)\nOUTPUT(y)\nn1 = AND(a, b)\nn2 = OR(a, b)\ny = AND(n1, n2)\n");
    ToggleProfile p;
    p.cycles = 100;
    p.tpc.assign(n.nets.size(), 0.0);
    p.tpc[n.net_id("a")] = 0.3;
    p.tpc[n.net_id("b")] = 0.1; // exactly at the threshold: included
    p.tpc[n.net_id("n1")] = 0.05;
    p.tpc[n.net_id("n2")] = 0.100001;
    p.tpc[n.net_id("y")] = 0.02;
    LcnSet s = lcn_set(n, p, 0.1);
    CHECK(s.nets == std::vector<int>{n.net_id("y"), n.net_id("n1"), n.net_id("b")});
    CHECK(s.threshold == 0.1);
}

TEST_CASE("equivalence check plain designs") {
    const CellLibrary& lib = CellLibrary::default_library();
    Netlist a = from_bench("INPUT(x)\nINPUT(s)\nOUTPUT(y)\nq = DFF(x)\ny = AND(q, s)\n");
    Netlist b = from_bench("INPUT(x)\nINPUT(s)\nOUTPUT(y)\nq = DFF(x)\ny = AND(s, q)\n");
    EquivSpec ex;
    ex.exhaustive = true;
    CHECK(equivalence_check(a, b, lib, {}, ex).equivalent);
    EquivSpec rnd;
    rnd.vectors = 500;
    CHECK(equivalence_check(a, b, lib, {}, rnd).equivalent);

    Netlist c = from_bench("INPUT(x)\nINPUT(s)\nOUTPUT(y)\nq = DFF(x)\ny = OR(q, s)\n");
    EquivalenceResult r = equivalence_check(a, c, lib, {}, ex);
    CHECK_FALSE(r.equivalent);
    REQUIRE(r.cex.has_value());
    CHECK(r.cex->po == "y");
    CHECK(r.cex->vector.size() == 2);

    Netlist d = from_bench("INPUT(x)\nOUTPUT(y)\ny = NOT(x)\n");
    CHECK_THROWS_AS(equivalence_check(a, d, lib, {}, ex), ValidationError);
}
