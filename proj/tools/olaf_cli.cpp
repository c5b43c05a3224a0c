#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "olaf/config.hpp"
#include "olaf/errors.hpp"
#include "olaf/report.hpp"
#include "olaf/sim.hpp"
#include "olaf/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace olaf;

namespace {

struct Labeled {
    std::string name;
    sim::Scenario scenario;
};

std::vector<Labeled> expand_variants(const config::ScenarioConfig& c) {
    std::vector<Labeled> out;
    if (c.variants.empty()) {
        out.push_back({"run", c.scenario});
        return out;
    }
    for (const auto& v : c.variants) out.push_back({v.name, sim::with_variant(c.scenario, v.discipline, v.tx_control)});
    return out;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
}

const std::vector<std::string> kSummaryKeys = {"loss", "avg_aom_s", "jain", "max_gap_s", "group_gap_s",
                                               "aggregations", "replaced", "dropped_full", "dropped_low_reward"};

int cmd_simulate(const std::string& config_path, const std::string& out_dir, std::optional<std::uint32_t> reps,
                 std::optional<std::uint64_t> seed) {
    const auto cfg = config::load(config_path);
    const std::uint32_t k = reps.value_or(cfg.scenario.run.repetitions);
    const std::uint64_t base_seed = seed.value_or(cfg.scenario.run.seed);
    fs::create_directories(out_dir);

    const auto variants = expand_variants(cfg);
    std::vector<std::pair<sim::Scenario, std::uint64_t>> jobs;
    for (const auto& v : variants)
        for (std::uint32_t r = 0; r < k; ++r) {
            sim::Scenario s = v.scenario;
            s.run.keep_event_log = r == 0;
            jobs.emplace_back(std::move(s), base_seed + r);
        }
    auto results = sim::run_parallel(jobs, sim::thread_budget());

    json metrics;
    metrics["scenario"] = cfg.name;
    metrics["repetitions"] = k;
    metrics["seed"] = base_seed;
    json fair;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        const auto& v = variants[vi];
        std::vector<json> runs, flat;
        for (std::uint32_t r = 0; r < k; ++r) {
            const auto& res = results[vi * k + r];
            runs.push_back(report::metrics_json(res.metrics, v.scenario));
            flat.push_back(report::scalars(res.metrics, v.scenario));
        }
        const auto& first = results[vi * k];
        metrics["variants"][v.name] = {{"runs", runs}, {"summary", report::summarize(flat, kSummaryKeys)}};
        fair[v.name] = report::fairness_json(first.metrics.fairness());
        write_file(fs::path(out_dir) / ("aom_" + v.name + ".csv"), report::aom_csv(first.metrics));
        std::ostringstream log;
        log << "# time_ps node kind cluster worker outcome\n";
        for (const auto& l : first.log.lines) log << l << '\n';
        write_file(fs::path(out_dir) / ("events_" + v.name + ".log"), log.str());
        write_file(fs::path(out_dir) / ("aom_" + v.name + ".gp"), report::gnuplot_aom("aom_" + v.name + ".csv"));
        if (k == 1) {
            std::cout << report::summary_line(v.name, first.metrics, v.scenario) << '\n';
        } else {
            const json s = report::summarize(flat, kSummaryKeys);
            std::printf("%s: loss %.1f%% +- %.1f, avg AoM %.6g +- %.2g s, Jain %.3f +- %.3f (%u runs)\n", v.name.c_str(),
                        100 * s["loss"]["mean"].get<double>(), 100 * s["loss"]["stddev"].get<double>(),
                        s["avg_aom_s"]["mean"].get<double>(), s["avg_aom_s"]["stddev"].get<double>(),
                        s["jain"]["mean"].get<double>(), s["jain"]["stddev"].get<double>(), k);
        }
    }
    if (cfg.speedup_updates) {
        const auto r = sim::compare_speedup(cfg.scenario, cfg.speedup_updates, base_seed);
        metrics["speedup"] = {{"updates_per_worker", cfg.speedup_updates}, {"censored", r.censored}, {"ratio", r.ratio}};
        if (r.t_fifo) metrics["speedup"]["t_fifo_s"] = r.t_fifo->seconds();
        if (r.t_olaf) metrics["speedup"]["t_olaf_s"] = r.t_olaf->seconds();
        if (r.censored)
            std::cout << "speedup: censored (target not reached within the horizon)\n";
        else
            std::printf("speedup: T_FIFO/T_Olaf = %.3f\n", r.ratio);
    }
    write_file(fs::path(out_dir) / "metrics.json", metrics.dump(2));
    write_file(fs::path(out_dir) / "fairness.json", fair.dump(2));
    return 0;
}

int cmd_verify(const std::string& config_path, const std::string& out_dir) {
    auto cfg = verify::load_config(config_path);
    cfg.threads = sim::thread_budget();
    verify::Verdict v;
    try {
        v = verify::check_fairness(cfg);
    } catch (const verify::BoundTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    const json j = report::verdict_json(v);
    if (v.result == verify::Result::ObjectiveHolds) {
        std::printf("ObjectiveHolds (%llu leaves explored, largest gap %.6g)\n",
                    static_cast<unsigned long long>(v.leaves), v.max_gap);
        return 0;
    }
    fs::create_directories(out_dir);
    const fs::path witness = fs::path(out_dir) / "witness.log";
    write_file(witness, verify::witness_log(*v.witness));
    write_file(fs::path(out_dir) / "verdict.json", j.dump(2));
    std::printf("Violated: clusters %u and %u differ by %.6g; witness %s\n", v.witness->u, v.witness->v, v.witness->gap,
                witness.string().c_str());
    return 2;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("--values: '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw ConfigError("--values: empty value list");
    return out;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::string& values_csv,
              const std::string& out_path, std::optional<std::uint32_t> reps, std::optional<std::uint64_t> seed) {
    auto base = config::load(config_path);
    if (seed) base.scenario.run.seed = *seed;
    const auto values = parse_values(values_csv);
    const std::uint32_t k = reps.value_or(base.scenario.run.repetitions);

    struct Cell {
        double value;
        std::string variant;
        std::uint32_t rep;
        sim::Scenario scenario;
    };
    std::vector<Cell> cells;
    std::vector<config::ScenarioConfig> per_value;
    for (double x : values) {
        per_value.push_back(config::set_parameter(base, param, x));
        for (const auto& v : expand_variants(per_value.back()))
            for (std::uint32_t r = 0; r < k; ++r) cells.push_back({x, v.name, r, v.scenario});
    }
    std::vector<std::pair<sim::Scenario, std::uint64_t>> jobs;
    for (const auto& c : cells) jobs.emplace_back(c.scenario, base.scenario.run.seed + c.rep);
    const auto results = sim::run_parallel(jobs, sim::thread_budget());

    std::vector<std::string> group_cols;
    for (const auto& g : base.scenario.groups) group_cols.push_back("avg_aom_s_" + g.name);
    std::ostringstream csv;
    csv.precision(10);
    csv << param << ",variant,rep,loss,avg_aom_s,jain,max_gap_s,aggregations,replaced,dropped_full,dropped_low_reward";
    for (const auto& g : group_cols) csv << ',' << g;
    csv << '\n';
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const json s = report::scalars(results[i].metrics, cells[i].scenario);
        csv << cells[i].value << ',' << cells[i].variant << ',' << cells[i].rep << ',' << s["loss"].get<double>() << ','
            << s["avg_aom_s"].get<double>() << ',' << s["jain"].get<double>() << ',' << s["max_gap_s"].get<double>()
            << ',' << s["aggregations"].get<std::uint64_t>() << ',' << s["replaced"].get<std::uint64_t>() << ','
            << s["dropped_full"].get<std::uint64_t>() << ',' << s["dropped_low_reward"].get<std::uint64_t>();
        for (const auto& g : group_cols) csv << ',' << s[g].get<double>();
        csv << '\n';
    }
    if (base.speedup_updates) {
        csv << '\n' << param << ",speedup,t_fifo_s,t_olaf_s,censored\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto r = sim::compare_speedup(per_value[i].scenario, base.speedup_updates, base.scenario.run.seed);
            csv << values[i] << ',' << r.ratio << ',' << (r.t_fifo ? r.t_fifo->seconds() : -1.0) << ','
                << (r.t_olaf ? r.t_olaf->seconds() : -1.0) << ',' << (r.censored ? 1 : 0) << '\n';
        }
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << csv.str();
    } else {
        write_file(out_path, csv.str());
        const fs::path gp = fs::path(out_path).replace_extension(".gp");
        write_file(gp, report::gnuplot_sweep(fs::path(out_path).filename().string(), param, "avg_aom_s"));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Olaf queue simulator, AoM metrics and fairness verifier"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", param, values, out_file;
    std::optional<std::uint32_t> reps;
    std::optional<std::uint64_t> seed;

    auto* simulate = app.add_subcommand("simulate", "run a scenario and write metrics, AoM CSV and event logs");
    simulate->add_option("--config", config_path, "scenario JSON")->required();
    simulate->add_option("--out", out_dir, "output directory");
    simulate->add_option("--repetitions", reps, "independent runs with consecutive seeds");
    simulate->add_option("--seed", seed, "base seed");

    auto* verify_cmd = app.add_subcommand("verify", "bounded check of the AoM fairness objective");
    verify_cmd->add_option("--config", config_path, "verifier JSON")->required();
    verify_cmd->add_option("--out", out_dir, "directory for the witness on violation");

    auto* sweep = app.add_subcommand("sweep", "repeat a scenario over parameter values and emit CSV");
    sweep->add_option("--config", config_path, "scenario JSON")->required();
    sweep->add_option("--param", param, "dotted parameter key, or alpha")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();
    sweep->add_option("--out", out_file, "CSV path (default stdout)");
    sweep->add_option("--repetitions", reps, "runs per value");
    sweep->add_option("--seed", seed, "base seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*simulate) return cmd_simulate(config_path, out_dir, reps, seed);
        if (*verify_cmd) return cmd_verify(config_path, out_dir);
        if (*sweep) return cmd_sweep(config_path, param, values, out_file, reps, seed);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
