#include "olaf/config.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "olaf/errors.hpp"

namespace olaf::config {

using nlohmann::json;

namespace {

class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& msg, const std::string& key = "") const {
        throw ConfigError((key.empty() ? path_ : sub(key)) + ": " + msg);
    }
    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) fail("unknown key", it.key());
    }
    bool has(const char* k) const { return j_.contains(k); }
    const json& at(const char* k) const {
        if (!j_.contains(k)) fail("missing required key", k);
        return j_.at(k);
    }

    double num(const char* k, std::optional<double> def = std::nullopt) const {
        if (!has(k)) {
            if (def) return *def;
            fail("missing required key", k);
        }
        const json& v = j_.at(k);
        if (!v.is_number()) fail("expected a number", k);
        return v.get<double>();
    }
    std::uint64_t uint(const char* k, std::optional<std::uint64_t> def = std::nullopt) const {
        if (!has(k)) {
            if (def) return *def;
            fail("missing required key", k);
        }
        const json& v = j_.at(k);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
        if (v.is_number_float() && v.get<double>() >= 0 && v.get<double>() == static_cast<double>(static_cast<std::uint64_t>(v.get<double>())))
            return static_cast<std::uint64_t>(v.get<double>());
        fail("expected a non-negative integer", k);
    }
    bool boolean(const char* k, bool def) const {
        if (!has(k)) return def;
        if (!j_.at(k).is_boolean()) fail("expected true or false", k);
        return j_.at(k).get<bool>();
    }
    std::string str(const char* k, std::optional<std::string> def = std::nullopt) const {
        if (!has(k)) {
            if (def) return *def;
            fail("missing required key", k);
        }
        if (!j_.at(k).is_string()) fail("expected a string", k);
        return j_.at(k).get<std::string>();
    }
    Obj obj(const char* k) const { return Obj(at(k), sub(k)); }
    const json& arr(const char* k) const {
        const json& v = at(k);
        if (!v.is_array()) fail("expected an array", k);
        return v;
    }

private:
    const json& j_;
    std::string path_;
};

const json kEmpty = json::object();

Obj opt_obj(const Obj& parent, const json& root, const char* k) {
    return root.contains(k) ? parent.obj(k) : Obj(kEmpty, parent.sub(k));
}

std::vector<ClusterId> cluster_list(const json& v, const std::string& path, std::uint32_t clusters) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of cluster ids");
    std::vector<ClusterId> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_unsigned() || v[i].get<std::uint64_t>() >= clusters)
            throw ConfigError(path + "[" + std::to_string(i) + "]: expected a cluster id below " + std::to_string(clusters));
        out.push_back(v[i].get<ClusterId>());
    }
    return out;
}

Discipline discipline_of(const std::string& s, const std::string& path) {
    if (s == "olaf") return Discipline::Olaf;
    if (s == "fifo") return Discipline::Fifo;
    throw ConfigError(path + ": expected \"olaf\" or \"fifo\"");
}

const char* discipline_name(Discipline d) { return d == Discipline::Olaf ? "olaf" : "fifo"; }

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

ScenarioConfig parse_root(const json& root, const std::string& base_dir) {
    ScenarioConfig c;
    Obj top(root, "");
    top.allow({"name", "description", "topology", "workload", "tx_control", "ps", "queue", "retransmit", "run",
               "groups", "variants", "alpha", "speedup"});
    c.name = top.str("name", "scenario");
    c.description = top.str("description", "");
    sim::Scenario& s = c.scenario;

    {
        Obj t = top.obj("topology");
        t.allow({"clusters", "workers_per_cluster", "switches", "ingress", "access_delay_s", "access_capacity_bps"});
        auto& topo = s.topology;
        topo.clusters = static_cast<std::uint32_t>(t.uint("clusters"));
        topo.workers_per_cluster = static_cast<std::uint32_t>(t.uint("workers_per_cluster"));
        if (topo.clusters == 0 || topo.clusters > 65535) t.fail("must be in [1, 65535]", "clusters");
        if (topo.workers_per_cluster == 0) t.fail("must be positive", "workers_per_cluster");
        const json& sw = t.arr("switches");
        if (sw.empty()) t.fail("need at least one switch", "switches");
        for (std::size_t i = 0; i < sw.size(); ++i) {
            Obj o(sw[i], t.sub("switches") + "[" + std::to_string(i) + "]");
            o.allow({"name", "discipline", "q_max", "capacity_bps", "delay_s", "next", "feedback"});
            sim::SwitchSpec spec;
            spec.name = o.str("name");
            if (spec.name == "ps") o.fail("\"ps\" is reserved", "name");
            spec.discipline = discipline_of(o.str("discipline", "olaf"), o.sub("discipline"));
            spec.q_max = static_cast<std::uint32_t>(o.uint("q_max"));
            if (spec.q_max == 0) o.fail("must be positive", "q_max");
            spec.capacity_bps = o.num("capacity_bps");
            if (!(spec.capacity_bps > 0)) o.fail("must be positive", "capacity_bps");
            spec.delay = Duration::from_seconds(o.num("delay_s", 0.0));
            spec.next = o.str("next", "ps");
            spec.feedback = o.boolean("feedback", true);
            topo.switches.push_back(spec);
        }
        std::set<std::string> names;
        for (const auto& x : topo.switches)
            if (!names.insert(x.name).second) t.fail("duplicate switch name '" + x.name + "'", "switches");
        for (std::size_t i = 0; i < topo.switches.size(); ++i) {
            const auto& x = topo.switches[i];
            if (x.next != "ps" && !names.count(x.next))
                t.fail("unknown next hop '" + x.next + "'", "switches[" + std::to_string(i) + "].next");
        }
        if (t.has("ingress")) {
            const json& ing = t.arr("ingress");
            topo.ingress.assign(topo.clusters, "");
            for (std::size_t i = 0; i < ing.size(); ++i) {
                Obj o(ing[i], t.sub("ingress") + "[" + std::to_string(i) + "]");
                o.allow({"clusters", "switch"});
                const std::string name = o.str("switch");
                if (!names.count(name)) o.fail("unknown switch '" + name + "'", "switch");
                for (auto cl : cluster_list(o.at("clusters"), o.sub("clusters"), topo.clusters)) topo.ingress[cl] = name;
            }
            for (ClusterId cl = 0; cl < topo.clusters; ++cl)
                if (topo.ingress[cl].empty()) t.fail("cluster " + std::to_string(cl) + " has no ingress switch", "ingress");
        }
        topo.access_delay = Duration::from_seconds(t.num("access_delay_s", 0.0));
        topo.access_capacity_bps = t.num("access_capacity_bps", 0.0);
    }

    {
        Obj w = top.obj("workload");
        w.allow({"update_bits", "gradient_dim", "updates_per_worker", "period_s", "offered_bps", "cluster_periods",
                 "phase_spread", "phase_jitter", "worker_jitter", "worker_jitter_s", "worker_spacing_s", "reward", "trace"});
        auto& wl = s.workload;
        wl.update_bits = static_cast<std::int64_t>(w.uint("update_bits", 2048));
        if (wl.update_bits <= 0) w.fail("must be positive", "update_bits");
        wl.gradient_dim = static_cast<std::uint32_t>(w.uint("gradient_dim", 8));
        wl.updates_per_worker = w.uint("updates_per_worker", 0);
        if (w.has("offered_bps")) wl.offered_bps = w.num("offered_bps");
        wl.period = Duration::from_seconds(w.num("period_s", 0.1));
        if (wl.period.ticks <= 0) w.fail("must be positive", "period_s");
        if (w.has("cluster_periods")) {
            const json& cp = w.arr("cluster_periods");
            wl.cluster_periods.assign(s.topology.clusters, Duration{});
            for (std::size_t i = 0; i < cp.size(); ++i) {
                Obj o(cp[i], w.sub("cluster_periods") + "[" + std::to_string(i) + "]");
                o.allow({"clusters", "period_s"});
                const Duration p = Duration::from_seconds(o.num("period_s"));
                if (p.ticks <= 0) o.fail("must be positive", "period_s");
                for (auto cl : cluster_list(o.at("clusters"), o.sub("clusters"), s.topology.clusters))
                    wl.cluster_periods[cl] = p;
            }
        }
        wl.phase_spread = w.num("phase_spread", 0.0);
        wl.phase_jitter = w.num("phase_jitter", 0.0);
        wl.worker_jitter = w.num("worker_jitter", 0.0);
        wl.worker_jitter_abs = Duration::from_seconds(w.num("worker_jitter_s", 0.0));
        wl.worker_spacing = Duration::from_seconds(w.num("worker_spacing_s", 0.0));
        Obj r = opt_obj(w, root.at("workload"), "reward");
        r.allow({"base", "slope_per_s", "noise"});
        wl.reward = {r.num("base", 0.0), r.num("slope_per_s", 0.0), r.num("noise", 0.0)};
        wl.trace_path = w.str("trace", "");
        if (!wl.trace_path.empty() && base_dir != "." && !base_dir.empty() &&
            std::filesystem::path(wl.trace_path).is_relative())
            wl.trace_path = (std::filesystem::path(base_dir) / wl.trace_path).string();
    }

    {
        Obj t = opt_obj(top, root, "tx_control");
        t.allow({"enabled", "delta_T_s", "v_mode", "v", "activity_window_s"});
        s.tx.enabled = t.boolean("enabled", false);
        const std::string mode = t.str("v_mode", "urgency");
        VMode vm;
        if (mode == "urgency") vm = VMode::Urgency;
        else if (mode == "fairness") vm = VMode::Fairness;
        else if (mode == "custom") vm = VMode::Custom;
        else t.fail("expected urgency, fairness or custom", "v_mode");
        const Duration dT = Duration::from_seconds(t.num("delta_T_s", 0.4));
        if (dT.ticks <= 0) t.fail("must be positive", "delta_T_s");
        if (vm == VMode::Custom && !t.has("v")) t.fail("custom mode needs v", "v");
        if (vm != VMode::Custom && t.has("v")) t.fail("v is only accepted with v_mode custom", "v");
        s.tx.params = TxControlParams::make(dT, vm, t.num("v", 0.0));
        s.tx.activity_window = Duration::from_seconds(t.num("activity_window_s", 1.0));
    }

    {
        Obj p = opt_obj(top, root, "ps");
        p.allow({"gamma", "reward_gate", "weighted_avg"});
        s.ps.gamma = p.num("gamma", 0.001);
        const std::string gate = p.str("reward_gate", "track_best");
        if (gate != "track_best" && gate != "fixed") p.fail("expected track_best or fixed", "reward_gate");
        s.ps.track_best = gate == "track_best";
        s.ps.weighted_avg = p.boolean("weighted_avg", false);
    }

    {
        Obj q = opt_obj(top, root, "queue");
        q.allow({"theta", "reward_merge", "gen_time_merge"});
        s.theta = q.num("theta", 0.1);
        if (!(s.theta >= 0)) q.fail("must be non-negative", "theta");
        const std::string rm = q.str("reward_merge", "max");
        if (rm == "max") s.merge.reward = RewardMerge::Max;
        else if (rm == "weighted_mean") s.merge.reward = RewardMerge::WeightedMean;
        else if (rm == "newest") s.merge.reward = RewardMerge::Newest;
        else q.fail("expected max, weighted_mean or newest", "reward_merge");
        const std::string gm = q.str("gen_time_merge", "max");
        if (gm == "max") s.merge.gen_time = GenTimeMerge::Max;
        else if (gm == "newest") s.merge.gen_time = GenTimeMerge::Newest;
        else q.fail("expected max or newest", "gen_time_merge");
    }

    {
        Obj r = opt_obj(top, root, "retransmit");
        r.allow({"enabled", "rtt_multiplier", "initial_rtt_s"});
        s.retransmit.enabled = r.boolean("enabled", false);
        s.retransmit.rtt_multiplier = r.num("rtt_multiplier", 3.0);
        s.retransmit.initial_rtt = Duration::from_seconds(r.num("initial_rtt_s", 1e-6));
        if (s.retransmit.initial_rtt.ticks <= 0) r.fail("must be positive", "initial_rtt_s");
    }

    {
        Obj r = opt_obj(top, root, "run");
        r.allow({"horizon_s", "drain_s", "seed", "repetitions"});
        if (r.has("horizon_s")) {
            s.run.horizon = SimTime::from_seconds(r.num("horizon_s"));
            if (s.run.horizon->ticks <= 0) r.fail("must be positive", "horizon_s");
        }
        s.run.drain = Duration::from_seconds(r.num("drain_s", 0.0));
        s.run.seed = r.uint("seed", 1);
        s.run.repetitions = static_cast<std::uint32_t>(r.uint("repetitions", 1));
        if (s.run.repetitions == 0) r.fail("must be positive", "repetitions");
    }
    if (s.workload.updates_per_worker == 0 && !s.run.horizon && s.workload.trace_path.empty())
        throw ConfigError("workload.updates_per_worker: required when run.horizon_s is absent");

    if (root.contains("groups")) {
        const json& g = top.arr("groups");
        for (std::size_t i = 0; i < g.size(); ++i) {
            Obj o(g[i], "groups[" + std::to_string(i) + "]");
            o.allow({"name", "clusters"});
            s.groups.push_back({o.str("name"), cluster_list(o.at("clusters"), o.sub("clusters"), s.topology.clusters)});
        }
    }

    if (root.contains("variants")) {
        const json& v = top.arr("variants");
        for (std::size_t i = 0; i < v.size(); ++i) {
            Obj o(v[i], "variants[" + std::to_string(i) + "]");
            o.allow({"name", "discipline", "tx_control"});
            c.variants.push_back({o.str("name"), discipline_of(o.str("discipline"), o.sub("discipline")),
                                  o.boolean("tx_control", false)});
        }
    }

    if (root.contains("alpha")) {
        Obj a = top.obj("alpha");
        a.allow({"scaled", "reference"});
        c.alpha = AlphaSweep{a.str("scaled"), a.str("reference")};
        bool s1 = false, s2 = false;
        for (const auto& sw : s.topology.switches) {
            s1 |= sw.name == c.alpha->scaled;
            s2 |= sw.name == c.alpha->reference;
        }
        if (!s1 || !s2) a.fail("names a switch that does not exist");
    }

    if (root.contains("speedup")) {
        Obj sp = top.obj("speedup");
        sp.allow({"updates_per_worker"});
        c.speedup_updates = sp.uint("updates_per_worker");
        if (c.speedup_updates == 0) sp.fail("must be positive", "updates_per_worker");
    }
    return c;
}

json to_tree(const ScenarioConfig& c) {
    const sim::Scenario& s = c.scenario;
    json root;
    root["name"] = c.name;
    root["description"] = c.description;
    json topo;
    topo["clusters"] = s.topology.clusters;
    topo["workers_per_cluster"] = s.topology.workers_per_cluster;
    topo["switches"] = json::array();
    for (const auto& sw : s.topology.switches)
        topo["switches"].push_back({{"name", sw.name}, {"discipline", discipline_name(sw.discipline)},
                                    {"q_max", sw.q_max}, {"capacity_bps", sw.capacity_bps},
                                    {"delay_s", sw.delay.seconds()}, {"next", sw.next}, {"feedback", sw.feedback}});
    if (!s.topology.ingress.empty()) {
        std::vector<std::string> order;
        for (const auto& n : s.topology.ingress)
            if (std::find(order.begin(), order.end(), n) == order.end()) order.push_back(n);
        topo["ingress"] = json::array();
        for (const auto& n : order) {
            json cl = json::array();
            for (ClusterId k = 0; k < s.topology.ingress.size(); ++k)
                if (s.topology.ingress[k] == n) cl.push_back(k);
            topo["ingress"].push_back({{"switch", n}, {"clusters", cl}});
        }
    }
    topo["access_delay_s"] = s.topology.access_delay.seconds();
    topo["access_capacity_bps"] = s.topology.access_capacity_bps;
    root["topology"] = topo;

    const auto& wl = s.workload;
    json w;
    w["update_bits"] = wl.update_bits;
    w["gradient_dim"] = wl.gradient_dim;
    w["updates_per_worker"] = wl.updates_per_worker;
    w["period_s"] = wl.period.seconds();
    if (wl.offered_bps) w["offered_bps"] = *wl.offered_bps;
    if (!wl.cluster_periods.empty()) {
        std::map<std::int64_t, json> by_period;
        for (ClusterId k = 0; k < wl.cluster_periods.size(); ++k)
            if (wl.cluster_periods[k].ticks > 0) by_period[wl.cluster_periods[k].ticks].push_back(k);
        w["cluster_periods"] = json::array();
        for (auto& [ticks, cl] : by_period)
            w["cluster_periods"].push_back({{"period_s", Duration::from_ticks(ticks).seconds()}, {"clusters", cl}});
    }
    w["phase_spread"] = wl.phase_spread;
    w["phase_jitter"] = wl.phase_jitter;
    w["worker_jitter"] = wl.worker_jitter;
    w["worker_jitter_s"] = wl.worker_jitter_abs.seconds();
    w["worker_spacing_s"] = wl.worker_spacing.seconds();
    w["reward"] = {{"base", wl.reward.base}, {"slope_per_s", wl.reward.slope_per_s}, {"noise", wl.reward.noise}};
    if (!wl.trace_path.empty()) w["trace"] = wl.trace_path;
    root["workload"] = w;

    json tx;
    tx["enabled"] = s.tx.enabled;
    tx["delta_T_s"] = s.tx.params.delta_T.seconds();
    switch (s.tx.params.mode) {
        case VMode::Urgency: tx["v_mode"] = "urgency"; break;
        case VMode::Fairness: tx["v_mode"] = "fairness"; break;
        case VMode::Custom:
            tx["v_mode"] = "custom";
            tx["v"] = s.tx.params.v;
            break;
    }
    tx["activity_window_s"] = s.tx.activity_window.seconds();
    root["tx_control"] = tx;

    root["ps"] = {{"gamma", s.ps.gamma},
                  {"reward_gate", s.ps.track_best ? "track_best" : "fixed"},
                  {"weighted_avg", s.ps.weighted_avg}};
    const char* rm = s.merge.reward == RewardMerge::Max ? "max"
                     : s.merge.reward == RewardMerge::WeightedMean ? "weighted_mean" : "newest";
    root["queue"] = {{"theta", s.theta},
                     {"reward_merge", rm},
                     {"gen_time_merge", s.merge.gen_time == GenTimeMerge::Max ? "max" : "newest"}};
    root["retransmit"] = {{"enabled", s.retransmit.enabled},
                          {"rtt_multiplier", s.retransmit.rtt_multiplier},
                          {"initial_rtt_s", s.retransmit.initial_rtt.seconds()}};
    json run;
    if (s.run.horizon) run["horizon_s"] = s.run.horizon->seconds();
    run["drain_s"] = s.run.drain.seconds();
    run["seed"] = s.run.seed;
    run["repetitions"] = s.run.repetitions;
    root["run"] = run;
    if (!s.groups.empty()) {
        root["groups"] = json::array();
        for (const auto& g : s.groups) root["groups"].push_back({{"name", g.name}, {"clusters", g.clusters}});
    }
    if (!c.variants.empty()) {
        root["variants"] = json::array();
        for (const auto& v : c.variants)
            root["variants"].push_back(
                {{"name", v.name}, {"discipline", discipline_name(v.discipline)}, {"tx_control", v.tx_control}});
    }
    if (c.alpha) root["alpha"] = {{"scaled", c.alpha->scaled}, {"reference", c.alpha->reference}};
    if (c.speedup_updates) root["speedup"] = {{"updates_per_worker", c.speedup_updates}};
    return root;
}

void collect_numeric(const json& j, const std::string& prefix, std::vector<std::string>& out) {
    if (j.is_number()) {
        out.push_back(prefix);
    } else if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            collect_numeric(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            const json& e = j[i];
            const std::string label = e.is_object() && e.contains("name") && e["name"].is_string()
                                          ? e["name"].get<std::string>()
                                          : std::to_string(i);
            collect_numeric(e, prefix + "." + label, out);
        }
    }
}

json* resolve(json& j, const std::string& key) {
    json* cur = &j;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (cur->is_object()) {
            if (!cur->contains(part)) return nullptr;
            cur = &(*cur)[part];
        } else if (cur->is_array()) {
            json* hit = nullptr;
            for (auto& e : *cur)
                if (e.is_object() && e.contains("name") && e["name"] == part) hit = &e;
            if (!hit && !part.empty() && std::all_of(part.begin(), part.end(), ::isdigit) &&
                std::stoul(part) < cur->size())
                hit = &(*cur)[std::stoul(part)];
            if (!hit) return nullptr;
            cur = hit;
        } else {
            return nullptr;
        }
    }
    return cur;
}

}  // namespace

ScenarioConfig parse(const std::string& text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(line_col(text, e.byte ? e.byte - 1 : 0) + ": " + e.what());
    }
    return parse_root(root, base_dir);
}

ScenarioConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse(ss.str(), std::filesystem::path(path).parent_path().string());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string serialize(const ScenarioConfig& c) { return to_tree(c).dump(2); }

std::vector<std::string> sweepable_keys(const ScenarioConfig& c) {
    std::vector<std::string> out;
    if (c.alpha) out.push_back("alpha");
    collect_numeric(to_tree(c), "", out);
    return out;
}

ScenarioConfig set_parameter(const ScenarioConfig& c, const std::string& key, double value) {
    json j = to_tree(c);
    if (key == "alpha") {
        if (!c.alpha) throw ConfigError("parameter 'alpha' needs an \"alpha\" section naming the two switches");
        json* ref = resolve(j, "topology.switches." + c.alpha->reference + ".capacity_bps");
        json* scaled = resolve(j, "topology.switches." + c.alpha->scaled + ".capacity_bps");
        *scaled = value * ref->get<double>();
        return parse_root(j, ".");
    }
    json* slot = resolve(j, key);
    if (!slot || !slot->is_number()) {
        std::string msg = "unknown parameter '" + key + "'; sweepable keys:";
        for (const auto& k : sweepable_keys(c)) msg += "\n  " + k;
        throw ConfigError(msg);
    }
    if (slot->is_number_unsigned() || slot->is_number_integer()) {
        if (value < 0 || value != static_cast<double>(static_cast<std::uint64_t>(value)))
            throw ConfigError("parameter '" + key + "' takes non-negative integers");
        *slot = static_cast<std::uint64_t>(value);
    } else {
        *slot = value;
    }
    return parse_root(j, ".");
}

}  // namespace olaf::config
