#include "olaf/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "olaf/errors.hpp"

namespace olaf {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Duration cluster_period(const WorkloadSpec& w, std::uint32_t clusters, std::uint32_t wpc, ClusterId c) {
    if (c < w.cluster_periods.size() && w.cluster_periods[c].ticks > 0) return w.cluster_periods[c];
    if (w.offered_bps) {
        const double per_round_bits = static_cast<double>(clusters) * wpc * w.update_bits;
        return Duration::from_seconds(per_round_bits / *w.offered_bps);
    }
    return w.period;
}

std::vector<double> expand_gradient(std::uint64_t seed, std::uint32_t dim) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> g(dim);
    for (auto& x : g) x = n(rng);
    return g;
}

Schedule synthesize(const WorkloadSpec& w, std::uint32_t clusters, std::uint32_t wpc, std::optional<SimTime> horizon,
                    std::uint64_t seed) {
    if (!w.trace_path.empty()) return read_trace(w.trace_path, clusters, wpc);
    if (w.updates_per_worker == 0 && !horizon)
        throw ConfigError("workload: need updates_per_worker or a run horizon");
    Schedule s(static_cast<std::size_t>(clusters) * wpc);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (ClusterId c = 0; c < clusters; ++c) {
        const Duration period = cluster_period(w, clusters, wpc, c);
        const double p_s = period.seconds();
        const double phase = static_cast<double>(c) / clusters * w.phase_spread * p_s;
        std::mt19937_64 crng(mix_seed(seed, 1'000'000 + c));
        std::vector<std::mt19937_64> wrng;
        for (std::uint32_t i = 0; i < wpc; ++i) wrng.emplace_back(mix_seed(seed, static_cast<std::uint64_t>(c) * 65536 + i));
        for (std::uint64_t round = 0;; ++round) {
            if (w.updates_per_worker && round >= w.updates_per_worker) break;
            const double nominal = phase + static_cast<double>(round) * p_s;
            if (horizon && nominal >= horizon->seconds()) break;
            const double burst = nominal + (w.phase_jitter > 0 ? w.phase_jitter * p_s * normal(crng) : 0.0);
            for (std::uint32_t i = 0; i < wpc; ++i) {
                double t = burst + i * w.worker_spacing.seconds();
                if (w.worker_jitter > 0) t += w.worker_jitter * p_s * unif(wrng[i]);
                if (w.worker_jitter_abs.ticks > 0) t += w.worker_jitter_abs.seconds() * unif(wrng[i]);
                t = std::max(t, 0.0);
                TraceRecord r;
                r.worker = {c, i};
                r.gen_time = SimTime::from_seconds(t);
                r.reward = w.reward.base + w.reward.slope_per_s * t +
                           (w.reward.noise > 0 ? w.reward.noise * normal(wrng[i]) : 0.0);
                r.gradient_seed = wrng[i]();
                s[static_cast<std::size_t>(c) * wpc + i].push_back(std::move(r));
            }
        }
    }
    for (auto& v : s)
        std::stable_sort(v.begin(), v.end(), [](const TraceRecord& a, const TraceRecord& b) { return a.gen_time < b.gen_time; });
    return s;
}

Schedule read_trace(const std::string& path, std::uint32_t clusters, std::uint32_t wpc) {
    std::ifstream in(path);
    if (!in) throw ConfigError("trace: cannot open " + path);
    Schedule s(static_cast<std::size_t>(clusters) * wpc);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.rfind("cluster,", 0) == 0) continue;
        std::stringstream ss(line);
        std::string f[5];
        for (int i = 0; i < 5; ++i)
            if (!std::getline(ss, f[i], i < 4 ? ',' : '\n'))
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 5 fields");
        try {
            TraceRecord r;
            r.worker = {static_cast<ClusterId>(std::stoul(f[0])), static_cast<std::uint32_t>(std::stoul(f[1]))};
            r.gen_time = SimTime::from_seconds(std::stod(f[2]));
            r.reward = std::stod(f[3]);
            if (f[4].rfind("seed:", 0) == 0) {
                r.gradient_seed = std::stoull(f[4].substr(5));
            } else {
                std::stringstream gs(f[4]);
                std::string v;
                while (std::getline(gs, v, ';')) r.gradient.push_back(std::stod(v));
            }
            if (r.worker.cluster >= clusters || r.worker.index >= wpc)
                throw ConfigError("worker outside topology");
            auto& vec = s[static_cast<std::size_t>(r.worker.cluster) * wpc + r.worker.index];
            if (!vec.empty() && r.gen_time < vec.back().gen_time) throw ConfigError("gen_time not sorted per worker");
            vec.push_back(std::move(r));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return s;
}

void write_trace(const std::string& path, const Schedule& s) {
    std::ofstream out(path);
    if (!out) throw ConfigError("trace: cannot write " + path);
    out << "cluster,worker,gen_time_s,reward,gradient\n";
    out.precision(17);
    for (const auto& v : s)
        for (const auto& r : v) {
            out << r.worker.cluster << ',' << r.worker.index << ',' << r.gen_time.seconds() << ',' << r.reward << ',';
            if (r.gradient.empty()) {
                out << "seed:" << r.gradient_seed;
            } else {
                for (std::size_t i = 0; i < r.gradient.size(); ++i) out << (i ? ";" : "") << r.gradient[i];
            }
            out << '\n';
        }
}

}  // namespace olaf
