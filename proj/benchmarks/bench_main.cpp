// Compares the OpenMP kernels against their serial references on a generated
// design and checks that both produce identical results. Run with --quick for
// a smaller instance (that mode doubles as a smoke test under ctest).

#include <chrono>
#include <cstdio>
#include <string>

#include "support/fixtures.hpp"
#include "tromux/selection.hpp"
#include "tromux/sim.hpp"
#include "tromux/timing.hpp"

using namespace tromux;
using namespace tromux::testsupport;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

void row(const char* kernel, double serial_ms, double parallel_ms, bool same) {
    std::printf("%-18s %10.1f ms %10.1f ms %7.2fx  %s\n", kernel, serial_ms, parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
                same ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    const CellLibrary& lib = CellLibrary::default_library();

    FixtureSpec spec;
    spec.gates = quick ? 300 : 4000;
    spec.ffs = quick ? 16 : 96;
    spec.pis = 12;
    spec.pos = 8;
    spec.seed = 7;
    Netlist n = random_netlist(spec, lib);
    int cycles = quick ? 4096 : 20480;
    std::printf("design: %zu cells, %zu nets, %d profiling cycles\n\n", n.cells.size(),
                n.nets.size(), cycles);

    bool all_same = true;

    auto t0 = std::chrono::steady_clock::now();
    ToggleProfile ps = toggle_profile_serial(n, lib, cycles, 42);
    double prof_serial = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    ToggleProfile pp = toggle_profile(n, lib, cycles, 42);
    double prof_parallel = ms_since(t0);
    bool prof_same = ps.tpc == pp.tpc;
    all_same = all_same && prof_same;
    row("toggle_profile", prof_serial, prof_parallel, prof_same);

    t0 = std::chrono::steady_clock::now();
    TimingReport rs = run_sta_serial(n, lib);
    double sta_serial = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    TimingReport rp = run_sta(n, lib);
    double sta_parallel = ms_since(t0);
    bool sta_same = rs.wns == rp.wns && rs.tns == rp.tns && rs.paths.size() == rp.paths.size();
    for (size_t i = 0; sta_same && i < rs.paths.size(); ++i)
        sta_same = rs.paths[i].slack == rp.paths[i].slack &&
                   rs.paths[i].nets == rp.paths[i].nets;
    all_same = all_same && sta_same;
    row("run_sta", sta_serial, sta_parallel, sta_same);

    int budget = quick ? 16 : 48;
    ScoreContext cs = ScoreContext::build(n, lib, pp, rp, Variant::mux);
    t0 = std::chrono::steady_clock::now();
    SelectionResult sel_s = select_cells(n, lib, cs, budget, true, false);
    double sel_serial = ms_since(t0);
    ScoreContext cp = ScoreContext::build(n, lib, pp, rp, Variant::mux);
    t0 = std::chrono::steady_clock::now();
    SelectionResult sel_p = select_cells(n, lib, cp, budget, true, true);
    double sel_parallel = ms_since(t0);
    bool sel_same = sel_s.cells == sel_p.cells && sel_s.trace == sel_p.trace;
    all_same = all_same && sel_same;
    row("select_cells", sel_serial, sel_parallel, sel_same);

    if (!all_same) {
        std::printf("\nserial and parallel kernels disagree\n");
        return 1;
    }
    return 0;
}
