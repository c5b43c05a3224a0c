#include "olaf/core.hpp"

#include <algorithm>
#include <cmath>

#include "olaf/errors.hpp"

namespace olaf {

Duration Duration::from_seconds(double s) {
    return Duration{static_cast<std::int64_t>(std::llround(s * static_cast<double>(kTicksPerSecond)))};
}

SimTime SimTime::from_seconds(double s) {
    return SimTime{static_cast<std::int64_t>(std::llround(s * static_cast<double>(kTicksPerSecond)))};
}

Duration transmission_time(std::int64_t bits, double bps) {
    if (bps <= 0) throw ContractViolation("transmission_time: capacity must be positive");
    long double t = static_cast<long double>(bits) * kTicksPerSecond / static_cast<long double>(bps);
    return Duration{static_cast<std::int64_t>(std::llround(t))};
}

std::string to_string(const WorkerId& w) {
    return std::to_string(w.cluster) + ":" + std::to_string(w.index);
}

std::vector<double> merge_gradients(const ModelUpdate& a, const ModelUpdate& b) {
    if (a.gradient.size() != b.gradient.size())
        throw StructuralError("merge_gradients: dimension mismatch (" + std::to_string(a.gradient.size()) +
                              " vs " + std::to_string(b.gradient.size()) + ")");
    const double wa = a.agg_count, wb = b.agg_count;
    const double total = wa + wb;
    std::vector<double> out(a.gradient.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (wa * a.gradient[i] + wb * b.gradient[i]) / total;
    return out;
}

void merge_into(ModelUpdate& resident, const ModelUpdate& incoming, const MergePolicy& policy) {
    resident.gradient = merge_gradients(resident, incoming);
    switch (policy.reward) {
        case RewardMerge::Max: resident.reward = std::max(resident.reward, incoming.reward); break;
        case RewardMerge::WeightedMean:
            resident.reward = (resident.reward * resident.agg_count + incoming.reward * incoming.agg_count) /
                              (resident.agg_count + incoming.agg_count);
            break;
        case RewardMerge::Newest: resident.reward = incoming.reward; break;
    }
    switch (policy.gen_time) {
        case GenTimeMerge::Max: resident.gen_time = std::max(resident.gen_time, incoming.gen_time); break;
        case GenTimeMerge::Newest: resident.gen_time = incoming.gen_time; break;
    }
    resident.agg_count += incoming.agg_count;
    resident.contributors.insert(resident.contributors.end(), incoming.contributors.begin(),
                                 incoming.contributors.end());
}

}  // namespace olaf
