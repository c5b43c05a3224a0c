#include "olaf/aom.hpp"

#include <algorithm>
#include <cmath>

#include "olaf/errors.hpp"

namespace olaf::aom {

std::vector<Delivery> from_arrivals(const std::vector<std::pair<SimTime, SimTime>>& gd) {
    std::vector<Delivery> out;
    out.reserve(gd.size());
    for (std::size_t k = 0; k < gd.size(); ++k) {
        const bool absorbed = k + 1 < gd.size() && gd[k].second >= gd[k + 1].first;
        out.push_back({gd[k].first, gd[k].second, absorbed});
    }
    return out;
}

Duration aom_at(const Series& s, SimTime t) {
    std::optional<SimTime> freshest;
    for (const auto& d : s.deliveries) {
        if (d.deliver > t) break;
        if (d.absorbed) continue;
        if (!freshest || d.gen > *freshest) freshest = d.gen;
    }
    if (!freshest) return t - SimTime{};
    return t - *freshest;
}

std::vector<Duration> peak_aom(const Series& s) {
    std::vector<Duration> peaks;
    std::optional<SimTime> last_departed_gen;
    for (const auto& d : s.deliveries) {
        if (d.absorbed) continue;
        peaks.push_back(d.deliver - (last_departed_gen ? *last_departed_gen : d.gen));
        if (!last_departed_gen || d.gen > *last_departed_gen) last_departed_gen = d.gen;
    }
    return peaks;
}

namespace {

// Twice the area under a unit-slope ramp starting at age a0 for dt ticks.
__int128 twice_area(std::int64_t a0, std::int64_t dt) {
    return static_cast<__int128>(2) * a0 * dt + static_cast<__int128>(dt) * dt;
}

long double integral_ticks2(const Series& s) {
    if (s.horizon.ticks <= 0) throw ContractViolation("avg_aom: horizon must be positive");
    __int128 acc = 0;
    std::int64_t t = 0;
    std::optional<std::int64_t> freshest;
    auto age_at = [&](std::int64_t x) { return freshest ? x - *freshest : x; };
    for (const auto& d : s.deliveries) {
        if (d.absorbed) continue;
        const std::int64_t dt_end = std::min(d.deliver.ticks, s.horizon.ticks);
        if (dt_end > t) {
            acc += twice_area(age_at(t), dt_end - t);
            t = dt_end;
        }
        if (d.deliver.ticks >= s.horizon.ticks) break;
        if (!freshest || d.gen.ticks > *freshest) freshest = d.gen.ticks;
    }
    if (s.horizon.ticks > t) acc += twice_area(age_at(t), s.horizon.ticks - t);
    return static_cast<long double>(acc) / 2.0L;
}

}  // namespace

double avg_aom_seconds(const Series& s) {
    const long double area = integral_ticks2(s);
    return static_cast<double>(area / s.horizon.ticks / kTicksPerSecond);
}

Duration avg_aom(const Series& s) {
    const long double area = integral_ticks2(s);
    return Duration{static_cast<std::int64_t>(std::llround(area / s.horizon.ticks))};
}

double avg_peak_seconds(const Series& s) {
    const auto p = peak_aom(s);
    if (p.empty()) return 0.0;
    long double sum = 0;
    for (auto d : p) sum += d.ticks;
    return static_cast<double>(sum / p.size() / kTicksPerSecond);
}

double jain_fairness(const std::vector<double>& v) {
    if (v.empty()) throw ContractViolation("jain_fairness: empty input");
    long double sum = 0, sq = 0;
    for (double x : v) {
        if (x < 0) throw ContractViolation("jain_fairness: negative value");
        sum += x;
        sq += static_cast<long double>(x) * x;
    }
    if (sq == 0) return 1.0;
    return static_cast<double>(sum * sum / (v.size() * sq));
}

FairnessReport fairness(const std::vector<Series>& per_cluster) {
    FairnessReport r;
    for (const auto& s : per_cluster) r.per_cluster_avg_aom.push_back(avg_aom_seconds(s));
    if (r.per_cluster_avg_aom.empty()) return r;
    r.jain_index = jain_fairness(r.per_cluster_avg_aom);
    const auto [lo, hi] = std::minmax_element(r.per_cluster_avg_aom.begin(), r.per_cluster_avg_aom.end());
    r.max_pairwise_gap = *hi - *lo;
    return r;
}

std::vector<std::pair<SimTime, Duration>> breakpoints(const Series& s) {
    std::vector<std::pair<SimTime, Duration>> pts;
    pts.push_back({SimTime{}, Duration{}});
    std::optional<SimTime> freshest;
    for (const auto& d : s.deliveries) {
        if (d.absorbed) continue;
        if (d.deliver > s.horizon) break;
        const Duration before = freshest ? d.deliver - *freshest : d.deliver - SimTime{};
        if (!freshest || d.gen > *freshest) freshest = d.gen;
        pts.push_back({d.deliver, before});
        pts.push_back({d.deliver, d.deliver - *freshest});
    }
    pts.push_back({s.horizon, freshest ? s.horizon - *freshest : s.horizon - SimTime{}});
    return pts;
}

}  // namespace olaf::aom
