#include "olaf/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace olaf::report {

using nlohmann::json;

json metrics_json(const sim::RunMetrics& m, const sim::Scenario& s) {
    json j;
    j["clusters"] = json::array();
    for (ClusterId c = 0; c < m.clusters.size(); ++c) {
        const auto& k = m.clusters[c];
        j["clusters"].push_back({{"cluster", c},
                                 {"generated", k.generated},
                                 {"sent", k.sent},
                                 {"retransmissions", k.retransmissions},
                                 {"tx_skipped", k.tx_skipped},
                                 {"locally_replaced", k.locally_replaced},
                                 {"received_at_ps", k.received_at_ps},
                                 {"aggregations", k.aggregations},
                                 {"replaced", k.replaced},
                                 {"dropped_full", k.dropped_full},
                                 {"dropped_low_reward", k.dropped_low_reward},
                                 {"in_flight_at_end", k.in_flight_at_end},
                                 {"conserved", k.conserved()},
                                 {"avg_aom_s", aom::avg_aom_seconds(m.aom[c])},
                                 {"avg_peak_aom_s", aom::avg_peak_seconds(m.aom[c])},
                                 {"deliveries", m.aom[c].deliveries.size()}});
    }
    j["totals"] = scalars(m, s);
    j["switches"] = json::array();
    for (std::size_t i = 0; i < m.switch_names.size(); ++i) {
        const auto& v = m.merges_per_departure[i];
        double mean = 0;
        for (auto x : v) mean += x;
        if (!v.empty()) mean /= v.size();
        j["switches"].push_back({{"name", m.switch_names[i]}, {"departures", v.size()}, {"mean_merges_per_departure", mean}});
    }
    j["end_time_s"] = m.end_time.seconds();
    j["events"] = m.events;
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(m.event_digest));
    j["event_digest"] = digest;
    j["wall_seconds"] = m.wall_seconds;
    if (m.target_reached_at) j["target_reached_at_s"] = m.target_reached_at->seconds();
    return j;
}

json fairness_json(const aom::FairnessReport& f) {
    return {{"per_cluster_avg_aom_s", f.per_cluster_avg_aom},
            {"jain_index", f.jain_index},
            {"max_pairwise_gap_s", f.max_pairwise_gap}};
}

json verdict_json(const verify::Verdict& v) {
    json j;
    j["result"] = v.result == verify::Result::ObjectiveHolds ? "ObjectiveHolds" : "Violated";
    j["leaves"] = v.leaves;
    j["pruned"] = v.pruned;
    j["max_gap"] = v.max_gap;
    if (v.witness) {
        const auto& w = *v.witness;
        json wj;
        wj["pair"] = {w.u, w.v};
        wj["gap"] = w.gap;
        wj["decisions"] = w.decisions;
        wj["clusters"] = json::array();
        for (const auto& c : w.trajectory.clusters) {
            json peaks = json::array();
            for (auto p : c.peaks) peaks.push_back(p.seconds());
            json deps = json::array();
            for (const auto& d : c.series.deliveries) deps.push_back(d.deliver.seconds());
            wj["clusters"].push_back({{"departures_s", deps}, {"peaks_s", peaks}, {"avg_peak", c.avg_peak}});
        }
        j["witness"] = wj;
    }
    return j;
}

std::string aom_csv(const sim::RunMetrics& m) {
    std::ostringstream o;
    o.precision(12);
    o << "cluster,t_s,aom_s\n";
    for (const auto& s : m.aom)
        for (const auto& [t, a] : aom::breakpoints(s)) o << s.cluster << ',' << t.seconds() << ',' << a.seconds() << '\n';
    return o.str();
}

json scalars(const sim::RunMetrics& m, const sim::Scenario& s) {
    const auto t = m.totals();
    const auto f = m.fairness();
    json j;
    j["sent"] = t.sent;
    j["received_at_ps"] = t.received_at_ps;
    j["aggregations"] = t.aggregations;
    j["replaced"] = t.replaced;
    j["dropped_full"] = t.dropped_full;
    j["dropped_low_reward"] = t.dropped_low_reward;
    j["in_flight_at_end"] = t.in_flight_at_end;
    j["tx_skipped"] = t.tx_skipped;
    j["loss"] = m.loss_fraction();
    double sum = 0;
    for (double x : f.per_cluster_avg_aom) sum += x;
    j["avg_aom_s"] = f.per_cluster_avg_aom.empty() ? 0.0 : sum / f.per_cluster_avg_aom.size();
    j["jain"] = f.jain_index;
    j["max_gap_s"] = f.max_pairwise_gap;
    for (const auto& g : s.groups) j["avg_aom_s_" + g.name] = m.group_avg_aom(g.clusters);
    if (s.groups.size() == 2)
        j["group_gap_s"] = std::abs(m.group_avg_aom(s.groups[0].clusters) - m.group_avg_aom(s.groups[1].clusters));
    return j;
}

json summarize(const std::vector<json>& runs, const std::vector<std::string>& keys) {
    json out;
    for (const auto& k : keys) {
        double sum = 0, sq = 0;
        std::size_t n = 0;
        for (const auto& r : runs)
            if (r.contains(k) && r[k].is_number()) {
                const double x = r[k].get<double>();
                sum += x;
                sq += x * x;
                ++n;
            }
        if (!n) continue;
        const double mean = sum / n;
        const double var = n > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1)) : 0.0;
        out[k] = {{"mean", mean}, {"stddev", std::sqrt(var)}, {"n", n}};
    }
    return out;
}

std::string summary_line(const std::string& label, const sim::RunMetrics& m, const sim::Scenario& s) {
    const auto j = scalars(m, s);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: loss %.1f%%", label.c_str(), 100.0 * m.loss_fraction());
    std::string line = buf;
    if (s.groups.empty()) {
        std::snprintf(buf, sizeof buf, ", avg AoM %.6g s", j["avg_aom_s"].get<double>());
        line += buf;
    }
    for (const auto& g : s.groups) {
        std::snprintf(buf, sizeof buf, ", AoM %s %.6g s", g.name.c_str(), m.group_avg_aom(g.clusters));
        line += buf;
    }
    std::snprintf(buf, sizeof buf, ", Jain %.3f", j["jain"].get<double>());
    return line + buf;
}

std::string gnuplot_aom(const std::string& csv) {
    return "set datafile separator ','\n"
           "set xlabel 'time (s)'\nset ylabel 'AoM (s)'\nset key off\n"
           "plot '" + csv + "' every ::1 using 2:($1==0?$3:1/0) with lines\n";
}

std::string gnuplot_sweep(const std::string& csv, const std::string& param, const std::string& metric) {
    return "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set xlabel '" + param + "'\nset ylabel '" + metric + "'\n"
           "# columns: param,variant,... ; one curve per variant via awk filtering\n"
           "plot for [v in system(\"awk -F, 'NR>1{print $2}' " + csv + " | sort -u\")] \\\n"
           "  \"< awk -F, -v v=\".v.\" 'NR==1||$2==v' " + csv + "\" using 1:'" + metric + "' with linespoints title v\n";
}

}  // namespace olaf::report
