// End-to-end checks against the bundled scenarios. One PASS/FAIL line per
// criterion; exit status is nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "olaf/config.hpp"
#include "olaf/report.hpp"
#include "olaf/sim.hpp"
#include "olaf/verify.hpp"

using namespace olaf;
using nlohmann::json;

namespace {

std::string path(const std::string& name) { return std::string(OLAF_SCENARIO_DIR) + "/" + name; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Runs every variant `reps` times; returns the scalar summaries per variant name.
std::map<std::string, std::vector<json>> run_variants(const config::ScenarioConfig& c, std::uint32_t reps,
                                                      std::vector<sim::RunMetrics>* keep = nullptr) {
    std::vector<std::pair<std::string, sim::Scenario>> vs;
    for (const auto& v : c.variants) vs.emplace_back(v.name, sim::with_variant(c.scenario, v.discipline, v.tx_control));
    std::vector<std::pair<sim::Scenario, std::uint64_t>> jobs;
    for (const auto& [name, s] : vs)
        for (std::uint32_t r = 0; r < reps; ++r) jobs.emplace_back(s, c.scenario.run.seed + r);
    auto results = sim::run_parallel(jobs, sim::thread_budget());
    std::map<std::string, std::vector<json>> out;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& [name, s] = vs[i / reps];
        out[name].push_back(report::scalars(results[i].metrics, s));
        if (keep) keep->push_back(std::move(results[i].metrics));
    }
    return out;
}

double mean(const std::vector<json>& runs, const std::string& key) {
    double s = 0;
    for (const auto& r : runs) s += r.at(key).get<double>();
    return s / runs.size();
}

struct CriterionResult {
    bool pass;
    std::string detail;
};

// Criteria 1 and 2 share the microbenchmark runs.
struct Table1 {
    std::map<std::string, std::vector<json>> at40, at20;
    double wall = 0;
};

Table1 run_table1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = config::load(path("table1_microbench.json"));
    Table1 t;
    t.at40 = run_variants(c, 1);
    t.at20 = run_variants(config::set_parameter(c, "topology.switches.accel.capacity_bps", 20e9), 1);
    t.wall = seconds_since(t0);
    return t;
}

CriterionResult criterion1(const Table1& t) {
    const double o40 = mean(t.at40.at("Olaf"), "loss"), f40 = mean(t.at40.at("FIFO"), "loss");
    const double o20 = mean(t.at20.at("Olaf"), "loss"), f20 = mean(t.at20.at("FIFO"), "loss");
    auto absorbed = [](const std::vector<json>& r) { return mean(r, "aggregations") + mean(r, "replaced"); };
    const double a40 = absorbed(t.at40.at("Olaf")), a20 = absorbed(t.at20.at("Olaf"));
    const bool ok = std::abs(o40 - 0.11) <= 0.05 && std::abs(f40 - 0.558) <= 0.10 && std::abs(o20 - 0.115) <= 0.05 &&
                    std::abs(f20 - 0.743) <= 0.10 && a20 > a40 && t.wall < 30.0;
    return {ok, fmt("40G Olaf %.1f%% FIFO %.1f%%; 20G Olaf %.1f%% FIFO %.1f%%; absorbed %.0f -> %.0f; %.1f s", 100 * o40,
                    100 * f40, 100 * o20, 100 * f20, a40, a20, t.wall)};
}

CriterionResult criterion2(const Table1& t) {
    const double r40 = 1 - mean(t.at40.at("Olaf"), "avg_aom_s") / mean(t.at40.at("FIFO"), "avg_aom_s");
    const double r20 = 1 - mean(t.at20.at("Olaf"), "avg_aom_s") / mean(t.at20.at("FIFO"), "avg_aom_s");
    return {r40 >= 0.60 && r20 >= 0.70 && r20 > r40,
            fmt("Olaf AoM reduction %.1f%% at 40G, %.1f%% at 20G", 100 * r40, 100 * r20)};
}

CriterionResult criterion3() {
    const auto c = config::load(path("table1_microbench.json"));
    const auto olaf = sim::with_variant(c.scenario, Discipline::Olaf, false);
    std::vector<std::pair<sim::Scenario, std::uint64_t>> jobs;
    const std::vector<double> caps = {40e9, 20e9, 5e9};
    for (double cap : caps) {
        auto s = olaf;
        s.topology.switches[0].capacity_bps = cap;
        jobs.emplace_back(s, c.scenario.run.seed);
    }
    const auto res = sim::run_parallel(jobs, sim::thread_budget());
    std::vector<double> means, p90s;
    for (const auto& r : res) {
        auto v = r.metrics.merges_per_departure[0];
        std::sort(v.begin(), v.end());
        double s = 0;
        for (auto x : v) s += x;
        means.push_back(v.empty() ? 0 : s / v.size());
        p90s.push_back(v.empty() ? 0 : v[static_cast<std::size_t>(0.9 * (v.size() - 1))]);
    }
    const bool ok = means[0] < means[1] && means[1] < means[2] && p90s[0] <= p90s[1] && p90s[1] <= p90s[2] &&
                    p90s[0] < p90s[2];
    return {ok, fmt("merges per departure mean %.3f / %.3f / %.3f, p90 %.0f / %.0f / %.0f at 40/20/5G", means[0],
                    means[1], means[2], p90s[0], p90s[1], p90s[2])};
}

CriterionResult criterion4() {
    const auto c = config::load(path("table2_uniform.json"));
    const auto r = run_variants(c, c.scenario.run.repetitions);
    const double fl = mean(r.at("FIFO"), "loss"), ol = mean(r.at("Olaf"), "loss");
    const double fj = mean(r.at("FIFO"), "jain"), oj = mean(r.at("Olaf"), "jain");
    return {fl > 0.70 && ol < 0.10 && oj >= 0.95 && oj > fj,
            fmt("loss FIFO %.1f%% Olaf %.1f%%; Jain FIFO %.3f Olaf %.3f (%u runs)", 100 * fl, 100 * ol, fj, oj,
                c.scenario.run.repetitions)};
}

CriterionResult criterion5() {
    const auto c = config::load(path("table3_hetero.json"));
    const auto r = run_variants(c, c.scenario.run.repetitions);
    const double jf = mean(r.at("FIFO"), "jain"), jo = mean(r.at("Olaf"), "jain"), jt = mean(r.at("Olaf_TC"), "jain");
    const double go = mean(r.at("Olaf"), "group_gap_s"), gt = mean(r.at("Olaf_TC"), "group_gap_s");
    return {jt > jo && jo > jf && gt < go,
            fmt("Jain Olaf_TC %.3f > Olaf %.3f > FIFO %.3f; group gap Olaf_TC %.0f ms vs Olaf %.0f ms (%u runs)", jt,
                jo, jf, 1e3 * gt, 1e3 * go, c.scenario.run.repetitions)};
}

CriterionResult criterion6() {
    const auto c = config::load(path("fig13_alpha.json"));
    std::vector<double> alphas;
    for (int i = 1; i <= 10; ++i) alphas.push_back(i / 10.0);
    std::vector<double> fifo_s1, tc_s2, tc_s1;
    for (double a : alphas) {
        const auto r = run_variants(config::set_parameter(c, "alpha", a), 1);
        fifo_s1.push_back(mean(r.at("FIFO"), "avg_aom_s_S1"));
        tc_s1.push_back(mean(r.at("Olaf_TC"), "avg_aom_s_S1"));
        tc_s2.push_back(mean(r.at("Olaf_TC"), "avg_aom_s_S2"));
    }
    const double ratio = fifo_s1.front() / fifo_s1.back();
    const auto [lo, hi] = std::minmax_element(tc_s2.begin(), tc_s2.end());
    const double spread = (*hi - *lo) / *lo;
    return {ratio > 5.0 && spread < 0.15,
            fmt("FIFO S1 AoM 0.1 vs 1.0: %.2fx; Olaf_TC S2 varies %.1f%% (%.0f..%.0f ms); Olaf_TC S1 %.0f -> %.0f ms",
                ratio, 100 * spread, 1e3 * *lo, 1e3 * *hi, 1e3 * tc_s1.front(), 1e3 * tc_s1.back())};
}

CriterionResult criterion7() {
    const auto c = config::load(path("fig8_speedup.json"));
    const std::uint64_t n = c.speedup_updates ? c.speedup_updates : 200;
    std::vector<double> ratios;
    bool censored = false;
    std::string detail;
    for (double cap : {40e9, 20e9, 5e9}) {
        const auto s = config::set_parameter(c, "topology.switches.accel.capacity_bps", cap);
        const auto r = sim::compare_speedup(s.scenario, n, c.scenario.run.seed);
        censored |= r.censored;
        ratios.push_back(r.ratio);
        detail += fmt("%s%.0fG %.2fx", detail.empty() ? "" : ", ", cap / 1e9, r.ratio);
    }
    const bool ok = !censored && ratios[0] > 1 && ratios[0] < ratios[1] && ratios[1] < ratios[2];
    return {ok, fmt("T_FIFO/T_Olaf at N=%llu: %s%s", static_cast<unsigned long long>(n), detail.c_str(),
                    censored ? " (censored)" : "")};
}

CriterionResult criterion8() {
    std::string detail;
    bool ok = true;
    for (const char* f : {"verify_uniform.json", "verify_hetero.json"}) {
        const auto t0 = std::chrono::steady_clock::now();
        auto cfg = verify::load_config(path(f));
        cfg.threads = sim::thread_budget();
        const auto v = verify::check_fairness(cfg);
        const double wall = seconds_since(t0);
        const bool holds = v.result == verify::Result::ObjectiveHolds;
        ok = ok && holds && wall < 120.0;
        detail += fmt("%s%s %s in %.2f s (gap %.4f)", detail.empty() ? "" : "; ", f, holds ? "holds" : "VIOLATED", wall,
                      v.max_gap);
    }
    return {ok, detail};
}

CriterionResult criterion9() {
    const std::string cmd = std::string("\"") + OLAF_UNIT_TESTS + "\" --minimal > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return {rc == 0, rc == 0 ? "unit and property suites pass" : fmt("unit_tests exited with %d", rc)};
}

}  // namespace

int main() {
    int failed = 0;
    auto check = [&](int n, const std::function<CriterionResult()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %d: %s  %s  [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    };
    Table1 t1;
    check(1, [&] {
        t1 = run_table1();
        return criterion1(t1);
    });
    check(2, [&] { return criterion2(t1); });
    check(3, criterion3);
    check(4, criterion4);
    check(5, criterion5);
    check(6, criterion6);
    check(7, criterion7);
    check(8, criterion8);
    check(9, criterion9);
    return failed ? 1 : 0;
}
