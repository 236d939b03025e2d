#include "tromux/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "tromux/attack.hpp"
#include "tromux/flow.hpp"
#include "tromux/netlist_io.hpp"
#include "tromux/trojan.hpp"
#include "tromux/util.hpp"

namespace tromux {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
#if defined(_WIN32)
    gmtime_s(&tm, &t);
#else
    gmtime_r(&t, &tm);
#endif
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void set_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
}

void ensure_outdir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output dir " + dir + ": " + ec.message());
}

std::string out_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

// a bare config name is also searched under $TROMUX_CONFIG_PATH
std::string resolve_config_path(const std::string& given) {
    if (given.empty() || fs::exists(given)) return given;
    if (const char* base = std::getenv("TROMUX_CONFIG_PATH")) {
        fs::path alt = fs::path(base) / given;
        if (fs::exists(alt)) return alt.string();
    }
    return given;
}

void write_manifest(const std::string& dir, const std::string& command,
                    const std::string& config_path, const std::vector<std::string>& inputs,
                    uint64_t seed) {
    ordered_json j;
    j["command"] = command;
    j["tool_version"] = kToolVersion;
    j["config"] = config_path.empty() ? "(default)" : config_path;
    j["inputs"] = inputs;
    j["output_dir"] = dir;
    j["seeds"]["seed"] = seed;
    j["created"] = now_utc();
    write_text_file(out_path(dir, "manifest.json"), j.dump(2) + "\n");
}

NetlistFormat format_of(const std::string& path) {
    return path.size() > 2 && path.compare(path.size() - 2, 2, ".v") == 0
               ? NetlistFormat::verilog
               : NetlistFormat::bench;
}

std::string locked_name(const std::string& input_path) {
    fs::path p(input_path);
    std::string ext = p.extension().string();
    if (ext.empty()) ext = ".bench";
    return p.stem().string() + ".locked" + ext;
}

CellLibrary load_library(const std::string& path) {
    return path.empty() ? CellLibrary::default_library() : CellLibrary::load(path);
}

struct HardenArgs {
    std::string input, assets, config, outdir, lib_path, variant;
    uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
};

int do_harden(const HardenArgs& a, bool stage1_only) {
    set_jobs(a.jobs);
    CellLibrary lib = load_library(a.lib_path);
    Netlist input = read_netlist_file(a.input, lib);
    std::vector<std::string> assets = parse_assets(read_text_file(a.assets));
    std::string cfg_path = resolve_config_path(a.config);
    FlowConfig cfg = cfg_path.empty() ? FlowConfig{} : parse_flow_config(read_text_file(cfg_path));
    if (a.seed_set) cfg.seed = a.seed;
    if (!a.variant.empty()) cfg.variant = parse_variant(a.variant);

    HardenResult R = harden(input, assets, lib, cfg, stage1_only);

    ensure_outdir(a.outdir);
    write_text_file(out_path(a.outdir, locked_name(a.input)),
                    write_netlist(R.locked, lib, format_of(a.input)));
    if (!stage1_only) {
        fs::path in(a.input);
        std::string ext = in.extension().string();
        write_text_file(out_path(a.outdir, in.stem().string() + ".ppl" +
                                               (ext.empty() ? ".bench" : ext)),
                        write_netlist(R.ppl, lib, format_of(a.input)));
    }
    write_text_file(out_path(a.outdir, "key.txt"), write_key_file(R.key, cfg.seed, cfg.variant));
    write_text_file(out_path(a.outdir, "plan.txt"), write_plan(R.plan));
    write_text_file(out_path(a.outdir, "config_effective.cfg"), write_flow_config(cfg));
    write_text_file(out_path(a.outdir, "grid_baseline.txt"), write_grid(R.grid_baseline));
    write_text_file(out_path(a.outdir, "grid_ppl.txt"), write_grid(R.grid_ppl));
    write_text_file(out_path(a.outdir, "grid_final.txt"), write_grid(R.grid_final));
    if (!R.profile_ppl.tpc.empty())
        write_text_file(out_path(a.outdir, "profile_ppl.txt"),
                        write_profile(R.ppl, R.profile_ppl));
    write_text_file(out_path(a.outdir, "timing_final.txt"),
                    write_timing_report(R.locked, R.timing_final));
    if (!R.selection_trace.empty())
        write_text_file(out_path(a.outdir, "selection_trace.txt"), R.selection_trace);
    write_text_file(out_path(a.outdir, "report.json"), R.report.to_json());
    write_manifest(a.outdir, stage1_only ? "lock-assets" : "harden", cfg_path,
                   {a.input, a.assets}, cfg.seed);

    const FlowReport& rep = R.report;
    std::printf("%s %s: key %d bits (%d assets + %d stage-2), open sites %d -> %d (%+.1f%%)\n",
                stage1_only ? "locked assets of" : "hardened", rep.design.c_str(),
                rep.key_length_total, rep.key_length_assets, rep.key_length_stage2,
                rep.baseline.open_sites, rep.final_.open_sites, 100.0 * rep.delta_open);
    return 0;
}

struct ProfileArgs {
    std::string input, outdir, lib_path, key_path;
    int cycles = 10000;
    uint64_t seed = 42;
    double clock_period = 10.0;
    int path_limit = 8;
    double lcn_threshold = 0.1;
    int jobs = 0;
};

int do_profile(const ProfileArgs& a) {
    set_jobs(a.jobs);
    CellLibrary lib = load_library(a.lib_path);
    Netlist n = read_netlist_file(a.input, lib);
    SimOptions opt;
    if (!a.key_path.empty())
        opt = correct_key_options(n, parse_key_file(read_text_file(a.key_path)));
    ToggleProfile prof = toggle_profile(n, lib, a.cycles, a.seed, opt);
    StaOptions sta;
    sta.clock_period = a.clock_period;
    sta.path_limit = a.path_limit;
    TimingReport rep = run_sta(n, lib, sta);

    ensure_outdir(a.outdir);
    write_text_file(out_path(a.outdir, "profile.txt"), write_profile(n, prof));
    write_text_file(out_path(a.outdir, "timing.txt"), write_timing_report(n, rep));
    LcnSet lcn = lcn_set(n, prof, a.lcn_threshold);
    std::ostringstream lo;
    lo.precision(9);
    lo << "# lcn threshold=" << a.lcn_threshold << "\n";
    for (int net : lcn.nets) lo << n.net(net).name << " " << prof.tpc[net] << "\n";
    write_text_file(out_path(a.outdir, "lcn.txt"), lo.str());
    write_manifest(a.outdir, "profile", "", {a.input}, a.seed);

    std::printf("profiled %s: %d cycles, %zu LCNs at threshold %g, wns %.4f\n", n.name.c_str(),
                a.cycles, lcn.nets.size(), a.lcn_threshold, rep.wns);
    return 0;
}

struct InsertArgs {
    std::string input, spec, grid, outdir, lib_path, profile, assets;
    int cycles = 10000;
    uint64_t seed = 42;
    double clock_period = 10.0;
    int path_limit = 8;
    int jobs = 0;
};

int do_insert(const InsertArgs& a) {
    set_jobs(a.jobs);
    CellLibrary lib = load_library(a.lib_path);
    Netlist n = read_netlist_file(a.input, lib);
    if (!a.assets.empty()) {
        n.assets = parse_assets(read_text_file(a.assets));
        n.ensure_valid(lib);
    }
    PlacementGrid grid = parse_grid(read_text_file(a.grid), n, lib);
    TrojanSpec spec = parse_trojan_spec(read_text_file(a.spec), lib);
    ToggleProfile prof = a.profile.empty()
                             ? toggle_profile(n, lib, a.cycles, a.seed)
                             : parse_profile(n, read_text_file(a.profile));
    StaOptions sta;
    sta.clock_period = a.clock_period;
    sta.path_limit = a.path_limit;

    InsertionResult res = insert_trojan(n, grid, spec, prof, lib, a.seed, sta);

    ensure_outdir(a.outdir);
    write_text_file(out_path(a.outdir, "insertion_report.json"), res.report.to_json());
    if (res.netlist) {
        std::string name = spec.name + ".trojaned" +
                           (format_of(a.input) == NetlistFormat::verilog ? ".v" : ".bench");
        write_text_file(out_path(a.outdir, name),
                        write_netlist(*res.netlist, lib, format_of(a.input)));
        write_text_file(out_path(a.outdir, "grid_trojan.txt"), write_grid(*res.grid));
    }
    write_manifest(a.outdir, "insert-trojan", "", {a.input, a.spec, a.grid}, a.seed);

    if (res.report.placed)
        std::printf("placed trojan %s: %d sites, wirelength %+.1f, tns %+.4f\n",
                    spec.name.c_str(), res.report.sites_used, res.report.wirelength_delta,
                    res.report.tns_delta);
    else
        std::printf("failed to place trojan %s: short %d sites\n", spec.name.c_str(),
                    res.report.placement_shortfall);
    return 0;
}

struct EvalArgs {
    std::string input, key_path, outdir, lib_path, prediction, census;
    bool imbalance = false;
    bool random = false;
    uint64_t seed = 1;
};

int do_eval(const EvalArgs& a) {
    CellLibrary lib = load_library(a.lib_path);
    Netlist locked = read_netlist_file(a.input, lib);
    std::vector<uint8_t> key = parse_key_file(read_text_file(a.key_path));

    int modes = int(!a.prediction.empty()) + int(a.imbalance) + int(a.random);
    if (modes != 1)
        throw ValidationError("pick exactly one of --prediction, --imbalance, --random");

    Prediction pred;
    std::string mode;
    if (!a.prediction.empty()) {
        pred = parse_prediction(read_text_file(a.prediction));
        mode = "prediction:" + a.prediction;
    } else if (a.imbalance) {
        if (a.census.empty()) {
            pred = imbalance_attack(locked, lib);
        } else {
            PairCensus census;
            for (const auto& line : split_on(read_text_file(a.census), '\n')) {
                std::string body = trim(line.substr(0, line.find('#')));
                if (body.empty()) continue;
                auto f = split_ws(body);
                if (f.size() != 2) throw ValidationError("census line needs: <type> <count>");
                census.add(f[0], std::stol(f[1]));
            }
            pred = imbalance_attack(locked, lib, census);
        }
        mode = "imbalance";
    } else {
        pred = random_guess(int(key.size()), a.seed);
        mode = "random";
    }

    AttackScore sc = score(pred, key);
    ensure_outdir(a.outdir);
    write_text_file(out_path(a.outdir, "prediction.txt"), write_prediction(pred));
    write_text_file(out_path(a.outdir, "attack_score.json"), sc.to_json());
    write_manifest(a.outdir, "eval-attack (" + mode + ")", "", {a.input, a.key_path}, a.seed);

    if (sc.kpa_defined)
        std::printf("AC %.3f%%  PC %.3f%%  KPA %.3f%%  (%d correct, %d X, %d total)\n", sc.ac,
                    sc.pc, sc.kpa, sc.k_correct, sc.k_x, sc.k_total);
    else
        std::printf("AC %.3f%%  PC %.3f%%  KPA NA  (%d correct, %d X, %d total)\n", sc.ac, sc.pc,
                    sc.k_correct, sc.k_x, sc.k_total);
    return 0;
}

int do_report(const std::vector<std::string>& dirs) {
    for (const auto& d : dirs) {
        fs::path p(d);
        if (fs::is_directory(p)) p /= "report.json";
        FlowReport r = parse_flow_report(read_text_file(p.string()));
        std::printf("design %s  variant=%s balanced=%s seed=%llu  grid=%dx%d\n",
                    r.design.c_str(), to_string(r.config.variant).c_str(),
                    r.config.balanced ? "true" : "false",
                    static_cast<unsigned long long>(r.config.seed), r.grid_rows,
                    r.grid_sites_per_row);
        std::printf("%-9s %7s %8s %9s %9s %9s %11s %5s\n", "stage", "util", "open", "d(open)",
                    "wns", "tns", "wl", "kl");
        struct Row {
            const char* stage;
            const LayoutMetrics* m;
            bool delta;
            int kl;
        };
        Row rows[] = {{"baseline", &r.baseline, false, 0},
                      {"ppl", &r.ppl, false, r.key_length_assets},
                      {"final", &r.final_, true, r.key_length_total}};
        for (const Row& row : rows) {
            char dbuf[24];
            if (row.delta)
                std::snprintf(dbuf, sizeof dbuf, "%+.1f%%", 100.0 * r.delta_open);
            else
                std::snprintf(dbuf, sizeof dbuf, "-");
            std::printf("%-9s %7.3f %8d %9s %9.3f %9.3f %11.1f %5d\n", row.stage,
                        row.m->utilization, row.m->open_sites, dbuf, row.m->wns, row.m->tns,
                        row.m->estimated_wirelength, row.kl);
        }
        if (!r.locked_census.empty()) {
            std::printf("locked census:");
            for (const auto& [type, count] : r.locked_census)
                std::printf(" %s=%d", type.c_str(), count);
            std::printf("\n");
        }
        std::printf("stage-2 rounds %d, selection shortfall %d\n", r.stage2_rounds,
                    r.selection_shortfall);
    }
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"TroMUX logic locking and layout hardening toolkit"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    HardenArgs ha;
    EvalArgs ea;
    ProfileArgs pa;
    InsertArgs ia;
    std::vector<std::string> report_dirs;
    bool stage1_only = false;

    auto add_harden_opts = [&](CLI::App* c) {
        c->add_option("input", ha.input, "input netlist (.bench or .v)")->required();
        c->add_option("assets", ha.assets, "asset FF list file")->required();
        c->add_option("--config", ha.config, "flow config file (searched in $TROMUX_CONFIG_PATH)");
        c->add_option("-o,--output", ha.outdir, "output directory")->required();
        c->add_option("--lib", ha.lib_path, "cell library file (default: built-in)");
        c->add_option("--variant", ha.variant, "locking variant override (mux|xor)");
        c->add_option("--seed", ha.seed, "seed override")->each([&](const std::string&) {
            ha.seed_set = true;
        });
        c->add_option("--jobs", ha.jobs, "worker threads (default: all)");
    };
    CLI::App* harden_cmd = app.add_subcommand("harden", "two-stage locking and layout hardening");
    add_harden_opts(harden_cmd);
    CLI::App* lock_cmd = app.add_subcommand("lock-assets", "stage 1 only: lock the asset FFs");
    add_harden_opts(lock_cmd);
    lock_cmd->parse_complete_callback([&] { stage1_only = true; });

    CLI::App* profile_cmd = app.add_subcommand("profile", "toggle profile and timing dumps");
    profile_cmd->add_option("input", pa.input, "input netlist")->required();
    profile_cmd->add_option("-o,--output", pa.outdir, "output directory")->required();
    profile_cmd->add_option("--lib", pa.lib_path, "cell library file");
    profile_cmd->add_option("--key", pa.key_path, "key file to hold the chain at the correct key");
    profile_cmd->add_option("--cycles", pa.cycles, "simulated cycles (default 10000)");
    profile_cmd->add_option("--seed", pa.seed, "stimulus seed (default 42)");
    profile_cmd->add_option("--clock", pa.clock_period, "clock period (default 10)");
    profile_cmd->add_option("--path-limit", pa.path_limit, "paths per endpoint (default 8)");
    profile_cmd->add_option("--lcn-threshold", pa.lcn_threshold, "LCN cutoff (default 0.1)");
    profile_cmd->add_option("--jobs", pa.jobs, "worker threads");

    CLI::App* insert_cmd = app.add_subcommand("insert-trojan", "first-order trojan insertion");
    insert_cmd->add_option("input", ia.input, "victim netlist")->required();
    insert_cmd->add_option("spec", ia.spec, "trojan spec file")->required();
    insert_cmd->add_option("--grid", ia.grid, "victim placement grid file")->required();
    insert_cmd->add_option("-o,--output", ia.outdir, "output directory")->required();
    insert_cmd->add_option("--lib", ia.lib_path, "cell library file");
    insert_cmd->add_option("--profile", ia.profile, "toggle profile (default: simulate)");
    insert_cmd->add_option("--assets", ia.assets, "asset list when the netlist carries none");
    insert_cmd->add_option("--cycles", ia.cycles, "profile cycles when simulating");
    insert_cmd->add_option("--seed", ia.seed, "seed");
    insert_cmd->add_option("--clock", ia.clock_period, "clock period");
    insert_cmd->add_option("--path-limit", ia.path_limit, "paths per endpoint");
    insert_cmd->add_option("--jobs", ia.jobs, "worker threads");

    CLI::App* eval_cmd = app.add_subcommand("eval-attack", "score key predictions");
    eval_cmd->add_option("input", ea.input, "locked netlist")->required();
    eval_cmd->add_option("--key", ea.key_path, "true key file")->required();
    eval_cmd->add_option("-o,--output", ea.outdir, "output directory")->required();
    eval_cmd->add_option("--lib", ea.lib_path, "cell library file");
    eval_cmd->add_option("--prediction", ea.prediction, "score an external prediction file");
    eval_cmd->add_flag("--imbalance", ea.imbalance, "run the structural imbalance attack");
    eval_cmd->add_option("--census", ea.census, "type census file for --imbalance");
    eval_cmd->add_flag("--random", ea.random, "random-guess baseline");
    eval_cmd->add_option("--seed", ea.seed, "seed for --random");

    CLI::App* report_cmd = app.add_subcommand("report", "format report JSON as a table");
    report_cmd->add_option("dirs", report_dirs, "run directories or report.json files")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (harden_cmd->parsed()) return do_harden(ha, false);
        if (lock_cmd->parsed()) return do_harden(ha, true);
        if (profile_cmd->parsed()) return do_profile(pa);
        if (insert_cmd->parsed()) return do_insert(ia);
        if (eval_cmd->parsed()) return do_eval(ea);
        if (report_cmd->parsed()) return do_report(report_dirs);
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace tromux
