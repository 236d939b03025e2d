#include "tromux/flow.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tromux/util.hpp"

namespace tromux {

using ordered_json = nlohmann::ordered_json;

FlowConfig parse_flow_config(const std::string& text) {
    FlowConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "variant")
                cfg.variant = parse_variant(value);
            else if (key == "balanced")
                cfg.balanced = value == "true" || value == "1";
            else if (key == "target_utilization")
                cfg.target_utilization = std::stod(value);
            else if (key == "clock_period")
                cfg.clock_period = std::stod(value);
            else if (key == "alpha")
                cfg.alpha = std::stod(value);
            else if (key == "tpc_cycles")
                cfg.tpc_cycles = std::stoi(value);
            else if (key == "tpc_seed")
                cfg.tpc_seed = std::stoull(value);
            else if (key == "tpc_from_baseline")
                cfg.tpc_from_baseline = value == "true" || value == "1";
            else if (key == "seed")
                cfg.seed = std::stoull(value);
            else if (key == "lcn_threshold")
                cfg.lcn_threshold = std::stod(value);
            else if (key == "path_limit")
                cfg.path_limit = std::stoi(value);
            else if (key == "layer_factor")
                cfg.layer_factor = std::stod(value);
            else if (key == "max_rounds")
                cfg.max_rounds = std::stoi(value);
            else if (key == "ms_fallback")
                cfg.ms_fallback = std::stod(value);
            else
                throw ValidationError("unknown config key: " + key);
        } catch (const std::invalid_argument&) {
            throw ValidationError("config line " + std::to_string(lineno) + ": bad value for " +
                                  key);
        }
    }
    return cfg;
}

std::string write_flow_config(const FlowConfig& cfg) {
    std::ostringstream out;
    out.precision(12);
    out << "variant=" << to_string(cfg.variant) << "\n";
    out << "balanced=" << (cfg.balanced ? "true" : "false") << "\n";
    out << "target_utilization=" << cfg.target_utilization << "\n";
    out << "clock_period=" << cfg.clock_period << "\n";
    out << "alpha=" << cfg.alpha << "\n";
    out << "tpc_cycles=" << cfg.tpc_cycles << "\n";
    out << "tpc_seed=" << cfg.tpc_seed << "\n";
    out << "tpc_from_baseline=" << (cfg.tpc_from_baseline ? "true" : "false") << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "lcn_threshold=" << cfg.lcn_threshold << "\n";
    out << "path_limit=" << cfg.path_limit << "\n";
    out << "layer_factor=" << cfg.layer_factor << "\n";
    out << "max_rounds=" << cfg.max_rounds << "\n";
    out << "ms_fallback=" << cfg.ms_fallback << "\n";
    return out.str();
}

namespace {

ordered_json metrics_json(const LayoutMetrics& m) {
    ordered_json j;
    j["utilization"] = m.utilization;
    j["open_sites"] = m.open_sites;
    j["estimated_wirelength"] = m.estimated_wirelength;
    j["total_track_length"] = m.total_track_length;
    j["track_utilization"] = m.track_utilization;
    j["wns"] = m.wns;
    j["tns"] = m.tns;
    return j;
}

LayoutMetrics metrics_from_json(const ordered_json& j) {
    LayoutMetrics m;
    m.utilization = j.at("utilization").get<double>();
    m.open_sites = j.at("open_sites").get<int>();
    m.estimated_wirelength = j.at("estimated_wirelength").get<double>();
    m.total_track_length = j.at("total_track_length").get<double>();
    m.track_utilization = j.at("track_utilization").get<double>();
    m.wns = j.at("wns").get<double>();
    m.tns = j.at("tns").get<double>();
    return m;
}

} // namespace

std::string FlowReport::to_json() const {
    ordered_json j;
    j["design"] = design;
    j["variant"] = to_string(config.variant);
    j["balanced"] = config.balanced;
    j["clock_period"] = config.clock_period;
    j["alpha"] = config.alpha;
    j["target_utilization"] = config.target_utilization;
    j["seed"] = config.seed;
    j["grid"]["rows"] = grid_rows;
    j["grid"]["sites_per_row"] = grid_sites_per_row;
    j["stages"]["baseline"] = metrics_json(baseline);
    j["stages"]["ppl"] = metrics_json(ppl);
    j["stages"]["final"] = metrics_json(final_);
    j["key_length"]["assets"] = key_length_assets;
    j["key_length"]["stage2"] = key_length_stage2;
    j["key_length"]["total"] = key_length_total;
    j["delta_open"] = delta_open;
    j["stage2_rounds"] = stage2_rounds;
    j["selection_shortfall"] = selection_shortfall;
    ordered_json census = ordered_json::object();
    for (const auto& [type, count] : locked_census) census[type] = count;
    j["locked_census"] = census;
    j["notes"] = ordered_json::array(
        {"wirelength is a half-perimeter estimate; no routing performed"});
    return j.dump(2) + "\n";
}

FlowReport parse_flow_report(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("report is not valid JSON: ") + e.what());
    }
    FlowReport r;
    try {
        r.design = j.at("design").get<std::string>();
        r.config.variant = parse_variant(j.at("variant").get<std::string>());
        r.config.balanced = j.at("balanced").get<bool>();
        r.config.clock_period = j.at("clock_period").get<double>();
        r.config.alpha = j.at("alpha").get<double>();
        r.config.target_utilization = j.at("target_utilization").get<double>();
        r.config.seed = j.at("seed").get<uint64_t>();
        r.grid_rows = j.at("grid").at("rows").get<int>();
        r.grid_sites_per_row = j.at("grid").at("sites_per_row").get<int>();
        r.baseline = metrics_from_json(j.at("stages").at("baseline"));
        r.ppl = metrics_from_json(j.at("stages").at("ppl"));
        r.final_ = metrics_from_json(j.at("stages").at("final"));
        r.key_length_assets = j.at("key_length").at("assets").get<int>();
        r.key_length_stage2 = j.at("key_length").at("stage2").get<int>();
        r.key_length_total = j.at("key_length").at("total").get<int>();
        r.delta_open = j.at("delta_open").get<double>();
        r.stage2_rounds = j.at("stage2_rounds").get<int>();
        r.selection_shortfall = j.at("selection_shortfall").get<int>();
        for (const auto& [type, count] : j.at("locked_census").items())
            r.locked_census.push_back({type, count.get<int>()});
    } catch (const ordered_json::exception& e) {
        throw ValidationError(std::string("report JSON missing fields: ") + e.what());
    }
    return r;
}

SimOptions correct_key_options(const Netlist& locked, const std::vector<uint8_t>& key) {
    SimOptions opt;
    if (locked.key_chain.size() > key.size())
        throw ValidationError("key shorter than the key chain");
    for (size_t i = 0; i < locked.key_chain.size(); ++i)
        opt.ff_preset.push_back({locked.key_chain[i], key[i]});
    if (!locked.key_data_pi.empty()) {
        opt.pin_const.push_back({locked.key_data_pi, 0});
        opt.pin_const.push_back({locked.key_load_pi, 0});
    }
    const std::string prefix = kReservedPrefix + "key";
    for (int pi : locked.primary_inputs) {
        const std::string& nm = locked.net(pi).name;
        if (!starts_with(nm, prefix)) continue;
        std::string idx = nm.substr(prefix.size());
        if (idx.empty() || !std::all_of(idx.begin(), idx.end(), ::isdigit)) continue;
        size_t i = std::stoul(idx);
        if (i >= key.size()) throw ValidationError("key misses bit for PI " + nm);
        opt.pin_const.push_back({nm, key[i]});
    }
    return opt;
}

HardenResult harden(const Netlist& input, const std::vector<std::string>& assets,
                    const CellLibrary& lib, const FlowConfig& cfg, bool stage1_only) {
    HardenResult R;
    Netlist n = input;
    for (const auto& a : assets) {
        int ci = n.cell_id(a);
        if (ci < 0) throw ValidationError("asset not found: " + a);
        if (!lib.at(n.cell(ci).type).sequential)
            throw ValidationError("asset is not an FF: " + a);
    }
    n.assets = assets;
    n.ensure_valid(lib);

    R.report.design = n.name;
    R.report.config = cfg;

    StaOptions sta_opts;
    sta_opts.clock_period = cfg.clock_period;
    sta_opts.path_limit = cfg.path_limit;

    PlacementGrid shape = build_grid(n, lib, cfg.target_utilization);
    R.report.grid_rows = shape.rows();
    R.report.grid_sites_per_row = shape.sites_per_row();

    R.grid_baseline = place(shape, n, lib, cfg.seed);
    R.report.baseline = metrics(R.grid_baseline, n, run_sta(n, lib, sta_opts), cfg.layer_factor);

    std::vector<uint8_t> key;
    std::map<std::string, int> census;

    // stage 1: lock every asset FF, then re-place (the PPL checkpoint)
    if (!assets.empty()) {
        LockingPlan p1;
        for (const auto& a : assets) {
            census[n.cell(n.cell_id(a)).type]++;
            p1.entries.push_back({a, "", -1});
        }
        ApplyResult r1 = apply_plan(n, lib, p1, cfg.variant, cfg.seed);
        key = r1.key;
        R.plan = r1.resolved_plan;
    }
    R.report.key_length_assets = int(key.size());
    R.ppl = n;
    R.grid_ppl = place(shape, n, lib, cfg.seed);
    R.report.ppl = metrics(R.grid_ppl, n, run_sta(n, lib, sta_opts), cfg.layer_factor);

    // stage 2: rounds of budget / profile / timing / selection / locking,
    // each against the freshly re-placed layout
    PlacementGrid cur = R.grid_ppl;
    int rounds = 0;
    ToggleProfile baseline_prof;
    if (!stage1_only && cfg.tpc_from_baseline)
        baseline_prof = toggle_profile(input, lib, cfg.tpc_cycles, cfg.tpc_seed);
    if (!stage1_only) {
        while (rounds < cfg.max_rounds) {
            int k = key_length(cur.open_sites(), lib, cfg.variant, cfg.alpha);
            if (k <= 0) break;
            ToggleProfile prof;
            if (cfg.tpc_from_baseline) {
                // ids are append-only under locking, so the baseline profile
                // is a prefix of any later netlist's id space
                prof = baseline_prof;
                prof.tpc.resize(n.nets.size(), 0.0);
            } else {
                prof = toggle_profile(n, lib, cfg.tpc_cycles, cfg.tpc_seed,
                                      correct_key_options(n, key));
            }
            if (rounds == 0) R.profile_ppl = prof;
            TimingReport ts = run_sta(n, lib, sta_opts);
            ScoreContext ctx = ScoreContext::build(n, lib, prof, ts, cfg.variant);
            ctx.ms_fallback = cfg.ms_fallback;
            SelectionResult sel = select_cells(n, lib, ctx, k, cfg.balanced);
            if (sel.cells.empty()) {
                R.report.selection_shortfall = k;
                break;
            }
            R.selection_trace += sel.trace;
            LockingPlan p2;
            for (int ci : sel.cells) {
                census[n.cell(ci).type]++;
                p2.entries.push_back({n.cell(ci).name, "", -1});
            }
            ApplyResult r2 = apply_plan(n, lib, p2, cfg.variant, cfg.seed);
            key.insert(key.end(), r2.key.begin(), r2.key.end());
            for (const auto& e : r2.resolved_plan.entries) R.plan.entries.push_back(e);
            R.report.key_length_stage2 += int(sel.cells.size());
            cur = place(shape, n, lib, cfg.seed);
            ++rounds;
            if (int(sel.cells.size()) < k) {
                R.report.selection_shortfall = k - int(sel.cells.size());
                break;
            }
        }
    }
    R.report.stage2_rounds = rounds;

    R.grid_final = cur;
    R.timing_final = run_sta(n, lib, sta_opts);
    R.report.final_ = metrics(R.grid_final, n, R.timing_final, cfg.layer_factor);
    R.report.key_length_total = int(key.size());
    if (R.report.baseline.open_sites > 0)
        R.report.delta_open =
            double(R.report.final_.open_sites - R.report.baseline.open_sites) /
            double(R.report.baseline.open_sites);
    for (const auto& [type, count] : census) R.report.locked_census.push_back({type, count});

    R.key = std::move(key);
    R.locked = std::move(n);
    return R;
}

} // namespace tromux
