#include <doctest.h>

#include <map>
#include <set>

#include "support/fixtures.hpp"
#include "tromux/flow.hpp"
#include "tromux/netlist_io.hpp"
#include "tromux/util.hpp"

using namespace tromux;
using namespace tromux::testsupport;

namespace {

const CellLibrary& lib() { return CellLibrary::default_library(); }

FlowConfig quick_config() {
    FlowConfig cfg;
    cfg.tpc_cycles = 2048;
    return cfg;
}

} // namespace

TEST_CASE("flow config file round trip") {
    FlowConfig cfg;
    cfg.variant = Variant::xor_;
    cfg.balanced = false;
    cfg.target_utilization = 0.42;
    cfg.clock_period = 7.25;
    cfg.alpha = 1.5;
    cfg.tpc_cycles = 512;
    cfg.tpc_seed = 77;
    cfg.tpc_from_baseline = true;
    cfg.seed = 1234;
    cfg.lcn_threshold = 0.05;
    cfg.path_limit = 4;
    cfg.layer_factor = 3.0;
    cfg.max_rounds = 9;
    cfg.ms_fallback = -0.25;

    std::string text = write_flow_config(cfg);
    FlowConfig back = parse_flow_config(text);
    CHECK(write_flow_config(back) == text);
    CHECK(back.variant == Variant::xor_);
    CHECK_FALSE(back.balanced);
    CHECK(back.target_utilization == doctest::Approx(0.42));
    CHECK(back.clock_period == doctest::Approx(7.25));
    CHECK(back.alpha == doctest::Approx(1.5));
    CHECK(back.tpc_cycles == 512);
    CHECK(back.tpc_seed == 77);
    CHECK(back.tpc_from_baseline);
    CHECK(back.seed == 1234);
    CHECK(back.lcn_threshold == doctest::Approx(0.05));
    CHECK(back.path_limit == 4);
    CHECK(back.layer_factor == doctest::Approx(3.0));
    CHECK(back.max_rounds == 9);
    CHECK(back.ms_fallback == doctest::Approx(-0.25));

    SUBCASE("defaults survive an empty file") {
        FlowConfig d = parse_flow_config("# nothing but comments\n\n");
        CHECK(write_flow_config(d) == write_flow_config(FlowConfig{}));
        CHECK(d.variant == Variant::mux);
        CHECK(d.balanced);
        CHECK(d.tpc_cycles == 10000);
        CHECK(d.tpc_seed == 42);
        CHECK(d.alpha == doctest::Approx(2.0));
    }
    SUBCASE("comments and spacing are tolerated") {
        FlowConfig c = parse_flow_config("  seed = 5  # five\nvariant=xor\n");
        CHECK(c.seed == 5);
        CHECK(c.variant == Variant::xor_);
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_flow_config("sigma=3\n"), ValidationError);
    }
    SUBCASE("bad values name the line") {
        CHECK_THROWS_WITH_AS(parse_flow_config("seed=1\nalpha=twelve\n"),
                             "config line 2: bad value for alpha", ValidationError);
        CHECK_THROWS_AS(parse_flow_config("just words\n"), ValidationError);
    }
}

TEST_CASE("flow report JSON round trip") {
    FlowReport r;
    r.design = "fx";
    r.config.variant = Variant::xor_;
    r.config.balanced = false;
    r.config.clock_period = 8.0;
    r.config.alpha = 1.0;
    r.config.target_utilization = 0.6;
    r.config.seed = 3;
    r.grid_rows = 12;
    r.grid_sites_per_row = 13;
    r.baseline.utilization = 0.5;
    r.baseline.open_sites = 78;
    r.baseline.estimated_wirelength = 44.0;
    r.baseline.total_track_length = 312.0;
    r.baseline.track_utilization = 44.0 / 312.0;
    r.baseline.wns = 2.5;
    r.baseline.tns = 0.0;
    r.ppl = r.baseline;
    r.ppl.open_sites = 60;
    r.final_ = r.ppl;
    r.final_.open_sites = 9;
    r.final_.wns = -0.25;
    r.final_.tns = -1.5;
    r.key_length_assets = 4;
    r.key_length_stage2 = 5;
    r.key_length_total = 9;
    r.delta_open = (9.0 - 78.0) / 78.0;
    r.stage2_rounds = 2;
    r.selection_shortfall = 1;
    r.locked_census = {{"AND2", 3}, {"DFF", 4}, {"NAND2", 2}};

    std::string json = r.to_json();
    FlowReport back = parse_flow_report(json);
    CHECK(back.design == r.design);
    CHECK(back.config.variant == Variant::xor_);
    CHECK_FALSE(back.config.balanced);
    CHECK(back.config.clock_period == doctest::Approx(8.0));
    CHECK(back.grid_rows == 12);
    CHECK(back.grid_sites_per_row == 13);
    CHECK(back.baseline.open_sites == 78);
    CHECK(back.ppl.open_sites == 60);
    CHECK(back.final_.open_sites == 9);
    CHECK(back.final_.tns == doctest::Approx(-1.5));
    CHECK(back.key_length_assets == 4);
    CHECK(back.key_length_stage2 == 5);
    CHECK(back.key_length_total == 9);
    CHECK(back.delta_open == doctest::Approx(r.delta_open));
    CHECK(back.stage2_rounds == 2);
    CHECK(back.selection_shortfall == 1);
    CHECK(back.locked_census == r.locked_census);
    CHECK(back.to_json() == json); // fixpoint

    SUBCASE("invalid input") {
        CHECK_THROWS_AS(parse_flow_report("not json at all"), ValidationError);
        CHECK_THROWS_AS(parse_flow_report("{\"design\": \"x\"}"), ValidationError);
    }
}

TEST_CASE("correct_key_options binds the chain and loose key inputs") {
    Netlist n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n", lib());
    LockingPlan plan;
    plan.entries.push_back({"y", "", -1});
    ApplyResult res = apply_plan(n, lib(), plan, Variant::mux, 2);
    // one extra unchained key input
    int kn = n.add_net("tromux_key1");
    n.mark_primary_input(kn);

    SimOptions opt = correct_key_options(n, {res.key[0], 1});
    REQUIRE(opt.ff_preset.size() == 1);
    CHECK(opt.ff_preset[0].first == "tromux_key0");
    CHECK(opt.ff_preset[0].second == res.key[0]);
    std::map<std::string, uint8_t> pins(opt.pin_const.begin(), opt.pin_const.end());
    CHECK(pins.at("tromux_key_data") == 0);
    CHECK(pins.at("tromux_key_load") == 0);
    CHECK(pins.at("tromux_key1") == 1);

    CHECK_THROWS_AS(correct_key_options(n, {}), ValidationError);          // shorter than chain
    CHECK_THROWS_AS(correct_key_options(n, {res.key[0]}), ValidationError); // misses the loose PI
}

TEST_CASE("harden runs both stages and keeps the function under the key") {
    FixtureSpec spec;
    spec.seed = 910;
    spec.gates = 60;
    spec.ffs = 6;
    spec.pis = 6;
    spec.pos = 5;
    Netlist input = random_netlist(spec, lib());
    std::vector<std::string> assets = pick_assets(input, lib(), 3);
    FlowConfig cfg = quick_config();

    HardenResult R = harden(input, assets, lib(), cfg);

    SUBCASE("key accounting") {
        CHECK(R.report.key_length_assets == 3);
        CHECK(R.report.key_length_total ==
              R.report.key_length_assets + R.report.key_length_stage2);
        CHECK(int(R.key.size()) == R.report.key_length_total);
        CHECK(R.locked.key_chain.size() == R.key.size());
        CHECK(R.report.key_length_stage2 > 0);
        CHECK(R.report.stage2_rounds > 0);
        CHECK_FALSE(R.selection_trace.empty());
    }
    SUBCASE("plan lists assets first, fully resolved") {
        REQUIRE(R.plan.entries.size() == R.key.size());
        for (size_t i = 0; i < assets.size(); ++i)
            CHECK(R.plan.entries[i].instance == assets[i]);
        for (size_t i = 0; i < R.plan.entries.size(); ++i) {
            CHECK(R.plan.entries[i].key_index == int(i));
            CHECK_FALSE(R.plan.entries[i].config.empty());
        }
    }
    SUBCASE("open sites shrink; delta_open records the relative change") {
        CHECK(R.report.final_.open_sites < R.report.baseline.open_sites);
        CHECK(R.report.ppl.open_sites < R.report.baseline.open_sites);
        CHECK(R.report.delta_open ==
              doctest::Approx(double(R.report.final_.open_sites -
                                     R.report.baseline.open_sites) /
                              double(R.report.baseline.open_sites)));
        CHECK(R.report.delta_open < 0.0);
        // the loop only stops once the budget of the remaining sites is spent
        if (R.report.selection_shortfall == 0 && R.report.stage2_rounds < cfg.max_rounds)
            CHECK(key_length(R.report.final_.open_sites, lib(), cfg.variant, cfg.alpha) <= 0);
    }
    SUBCASE("locked netlist stays equivalent under the returned key") {
        EquivSpec s;
        s.vectors = 2000;
        CHECK(equivalence_check(input, R.locked, lib(), R.key, s).equivalent);
        std::vector<uint8_t> wrong = R.key;
        wrong[0] ^= 1;
        CHECK_FALSE(equivalence_check(input, R.locked, lib(), wrong, s).equivalent);
    }
    SUBCASE("census accounts for every locked structure by pre-lock type") {
        int total = 0;
        std::string prev;
        for (const auto& [type, count] : R.report.locked_census) {
            CHECK(count > 0);
            CHECK(prev < type); // alphabetical, no duplicates
            prev = type;
            total += count;
            CHECK_NOTHROW(lib().at(type));
        }
        CHECK(total == R.report.key_length_total);
    }
    SUBCASE("determinism") {
        HardenResult R2 = harden(input, assets, lib(), cfg);
        CHECK(R2.key == R.key);
        CHECK(R2.report.to_json() == R.report.to_json());
        CHECK(write_netlist(R2.locked, lib(), NetlistFormat::bench) ==
              write_netlist(R.locked, lib(), NetlistFormat::bench));
        CHECK(write_grid(R2.grid_final) == write_grid(R.grid_final));
        CHECK(R2.selection_trace == R.selection_trace);
    }
}

TEST_CASE("stage1_only stops at the partially protected layout") {
    FixtureSpec spec;
    spec.seed = 911;
    spec.gates = 40;
    spec.ffs = 4;
    Netlist input = random_netlist(spec, lib());
    std::vector<std::string> assets = pick_assets(input, lib(), 2);
    HardenResult R = harden(input, assets, lib(), quick_config(), true);
    CHECK(R.report.stage2_rounds == 0);
    CHECK(R.report.key_length_stage2 == 0);
    CHECK(R.key.size() == 2);
    CHECK(write_netlist(R.locked, lib(), NetlistFormat::bench) ==
          write_netlist(R.ppl, lib(), NetlistFormat::bench));
    CHECK(write_grid(R.grid_final) == write_grid(R.grid_ppl));
    CHECK(R.selection_trace.empty());
}

TEST_CASE("no assets leaves the checkpoint untouched") {
    FixtureSpec spec;
    spec.seed = 912;
    spec.gates = 40;
    spec.ffs = 4;
    Netlist input = random_netlist(spec, lib());
    HardenResult R = harden(input, {}, lib(), quick_config());
    CHECK(R.report.key_length_assets == 0);
    CHECK(write_netlist(R.ppl, lib(), NetlistFormat::bench) ==
          write_netlist(input, lib(), NetlistFormat::bench));
    CHECK(R.report.key_length_stage2 > 0); // stage 2 still locks
}

TEST_CASE("tight grids skip stage 2 for lack of budget") {
    FixtureSpec spec;
    spec.seed = 913;
    spec.gates = 30;
    spec.ffs = 3;
    Netlist input = random_netlist(spec, lib());
    FlowConfig cfg = quick_config();
    cfg.target_utilization = 0.93;
    HardenResult R = harden(input, {}, lib(), cfg);
    CHECK(R.report.stage2_rounds == 0);
    CHECK(R.report.key_length_total == 0);
    CHECK(R.key.empty());
    CHECK(write_netlist(R.locked, lib(), NetlistFormat::bench) ==
          write_netlist(input, lib(), NetlistFormat::bench));
}

TEST_CASE("baseline toggle data is an explicit opt-in") {
    FixtureSpec spec;
    spec.seed = 914;
    spec.gates = 40;
    spec.ffs = 4;
    Netlist input = random_netlist(spec, lib());
    std::vector<std::string> assets = pick_assets(input, lib(), 2);
    FlowConfig cfg = quick_config();
    cfg.tpc_from_baseline = true;
    HardenResult R = harden(input, assets, lib(), cfg);
    EquivSpec s;
    s.vectors = 2000;
    CHECK(equivalence_check(input, R.locked, lib(), R.key, s).equivalent);
    // synthetic nets beyond the baseline id space carry a zero rate
    REQUIRE(R.profile_ppl.tpc.size() > input.nets.size());
    bool padded_zero = true;
    for (size_t i = input.nets.size(); i < R.profile_ppl.tpc.size(); ++i)
        if (R.profile_ppl.tpc[i] != 0.0) padded_zero = false;
    CHECK(padded_zero);

    HardenResult again = harden(input, assets, lib(), cfg);
    CHECK(again.report.to_json() == R.report.to_json());
}

TEST_CASE("harden validates its asset list") {
    FixtureSpec spec;
    spec.seed = 915;
    spec.gates = 20;
    spec.ffs = 2;
    Netlist input = random_netlist(spec, lib());
    CHECK_THROWS_WITH_AS(harden(input, {"ghost"}, lib(), quick_config()),
                         "asset not found: ghost", ValidationError);
    std::string gate;
    for (const CellInstance& c : input.cells)
        if (!lib().at(c.type).sequential) gate = c.name;
    REQUIRE_FALSE(gate.empty());
    CHECK_THROWS_WITH_AS(harden(input, {gate}, lib(), quick_config()),
                         ("asset is not an FF: " + gate).c_str(), ValidationError);
}

TEST_CASE("max_rounds caps stage 2") {
    FixtureSpec spec;
    spec.seed = 916;
    spec.gates = 50;
    spec.ffs = 5;
    Netlist input = random_netlist(spec, lib());
    FlowConfig cfg = quick_config();
    cfg.max_rounds = 1;
    HardenResult R = harden(input, {}, lib(), cfg);
    CHECK(R.report.stage2_rounds == 1);
}
