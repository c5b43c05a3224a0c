#include "olaf/queue.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "olaf/errors.hpp"

namespace olaf {

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Appended: return "Appended";
        case Outcome::Replaced: return "Replaced";
        case Outcome::Aggregated: return "Aggregated";
        case Outcome::DroppedFull: return "DroppedFull";
        case Outcome::DroppedLowReward: return "DroppedLowReward";
    }
    return "?";
}

OlafQueue::OlafQueue(const OlafParams& p)
    : params_(p),
      segments_(p.q_max),
      avail_(p.q_max),
      out_(p.q_max),
      avail_count_(p.q_max),
      status_(p.cluster_count),
      replace_(p.cluster_count) {
    if (p.q_max == 0 || p.q_max == kUnboundedQueue) throw ConfigError("OlafQueue: q_max must be finite and positive");
    if (p.cluster_count == 0) throw ConfigError("OlafQueue: cluster_count must be positive");
    if (!(p.theta >= 0)) throw ConfigError("OlafQueue: theta must be non-negative");
    for (std::uint32_t i = 0; i < p.q_max; ++i) avail_[i] = i;
}

bool OlafQueue::is_locked(std::uint32_t out_pos) const {
    return in_service_pos_ && *in_service_pos_ == out_pos;
}

std::uint32_t OlafQueue::entries_of(ClusterId c) const { return status_.at(c).count(); }

std::uint32_t OlafQueue::unlocked_entries_of(ClusterId c) const {
    const auto& cs = status_.at(c);
    std::uint32_t n = 0;
    for (std::uint32_t k = 0; k < cs.count(); ++k)
        if (!is_locked(cs.pos[(cs.head + k) % 3])) ++n;
    return n;
}

EnqueueOutcome OlafQueue::gated_compute(std::uint32_t seg, const ModelUpdate& u) {
    ModelUpdate& resident = *segments_[seg];
    const double dr = u.reward - resident.reward;
    if (std::abs(dr) <= params_.theta) {
        merge_into(resident, u, params_.merge);
        ++resident.merges;
        return {Outcome::Aggregated, seg};
    }
    if (dr > 0) {
        const auto m = resident.merges;
        resident = u;
        resident.merges = m + 1;
        return {Outcome::Replaced, seg};
    }
    return {Outcome::DroppedLowReward, seg};
}

EnqueueOutcome OlafQueue::enqueue(const ModelUpdate& u, SimTime) {
    if (u.cluster >= params_.cluster_count)
        throw ContractViolation("OlafQueue::enqueue: cluster " + std::to_string(u.cluster) + " out of range");
    ClusterStatus& cs = status_[u.cluster];
    ReplaceStatus& rs = replace_[u.cluster];

    // The newest entry is the only possible match; a locked one is invisible.
    if (cs.count() > 0) {
        const std::uint32_t last = cs.pos[(cs.tail + 2) % 3];
        if (!is_locked(last)) {
            const std::uint32_t seg = out_[last];
            if (rs.flag && rs.worker == u.worker && u.agg_count == 1) {
                ModelUpdate& resident = *segments_[seg];
                const auto m = resident.merges;
                resident = u;
                resident.merges = m + 1;
                return {Outcome::Replaced, seg};
            }
            EnqueueOutcome r = gated_compute(seg, u);
            rs.flag = false;
            return r;
        }
    }

    if (avail_count_ == 0) return {Outcome::DroppedFull, std::nullopt};

    const std::uint32_t seg = avail_[write_ptr_];
    write_ptr_ = (write_ptr_ + 1) % params_.q_max;
    --avail_count_;
    segments_[seg] = u;
    segments_[seg]->merges = 0;
    const std::uint32_t pos = append_out_addr_;
    out_[pos] = seg;
    append_out_addr_ = (append_out_addr_ + 1) % params_.q_max;
    ++out_count_;

    const bool behind_locked_head = cs.count() > 0;
    cs.pos[cs.tail] = pos;
    cs.tail = static_cast<std::uint8_t>((cs.tail + 1) % 3);
    // Replacement is only for two unaggregated updates of one worker; an
    // aggregate arriving from an upstream switch does not qualify.
    if (behind_locked_head || u.agg_count > 1)
        rs.flag = false;
    else
        rs = {true, u.worker};
    return {Outcome::Appended, seg};
}

std::optional<ModelUpdate> OlafQueue::begin_service(SimTime) {
    if (in_service_ || out_count_ == 0) return std::nullopt;
    const std::uint32_t pos = read_ptr_;
    const std::uint32_t seg = out_[pos];
    read_ptr_ = (read_ptr_ + 1) % params_.q_max;
    --out_count_;
    in_service_ = seg;
    in_service_pos_ = pos;
    const ClusterId c = segments_[seg]->cluster;
    // A locked update is no longer a replacement candidate.
    if (status_[c].count() == 1) replace_[c].flag = false;
    return *segments_[seg];
}

ModelUpdate OlafQueue::complete_service(SimTime) {
    if (!in_service_) throw ContractViolation("OlafQueue::complete_service: nothing in service");
    const std::uint32_t seg = *in_service_;
    ModelUpdate done = std::move(*segments_[seg]);
    segments_[seg].reset();
    avail_[append_available_addr_] = seg;
    append_available_addr_ = (append_available_addr_ + 1) % params_.q_max;
    ++avail_count_;
    ClusterStatus& cs = status_[done.cluster];
    cs.head = static_cast<std::uint8_t>((cs.head + 1) % 3);
    in_service_.reset();
    in_service_pos_.reset();
    return done;
}

QueueSnapshot OlafQueue::snapshot() const {
    QueueSnapshot s;
    s.q_max = params_.q_max;
    s.q_now = occupied_segments();
    s.full = s.q_now == s.q_max;
    for (ClusterId c = 0; c < params_.cluster_count; ++c)
        if (status_[c].count() > 0) s.active_cluster_set.push_back(c);
    return s;
}

std::vector<ModelUpdate> OlafQueue::contents() const {
    std::vector<ModelUpdate> v;
    if (in_service_) v.push_back(*segments_[*in_service_]);
    for (std::uint32_t k = 0; k < out_count_; ++k) v.push_back(*segments_[out_[(read_ptr_ + k) % params_.q_max]]);
    return v;
}

void OlafQueue::check_invariants() const {
    auto fail = [](const std::string& m) { throw ContractViolation("OlafQueue invariant: " + m); };
    const std::uint32_t occupied = out_count_ + (in_service_ ? 1 : 0);
    if (avail_count_ + occupied != params_.q_max) fail("free + occupied != q_max");
    std::uint32_t filled = 0;
    for (const auto& s : segments_) filled += s.has_value();
    if (filled != occupied) fail("segment contents disagree with registers");
    std::uint32_t total_entries = 0;
    for (ClusterId c = 0; c < params_.cluster_count; ++c) {
        const auto& cs = status_[c];
        total_entries += cs.count();
        const std::uint32_t unlocked = unlocked_entries_of(c);
        if (unlocked > 1) fail("cluster " + std::to_string(c) + " holds two unlocked updates");
        if (cs.count() > 2) fail("cluster " + std::to_string(c) + " holds more than two entries");
        if (cs.count() == 2 && unlocked != 1) fail("second entry without a locked head");
        for (std::uint32_t k = 0; k < cs.count(); ++k) {
            const auto seg = out_[cs.pos[(cs.head + k) % 3]];
            if (!segments_[seg] || segments_[seg]->cluster != c) fail("cluster pointer to foreign segment");
        }
        if (replace_[c].flag) {
            if (cs.count() != 1 || unlocked != 1) fail("replace flag without exactly one unlocked entry");
            const auto& u = *segments_[out_[cs.pos[cs.head]]];
            if (u.agg_count != 1) fail("replace flag on an aggregated entry");
        }
    }
    if (total_entries != occupied) fail("cluster entries != occupied segments");
}

EnqueueOutcome FifoQueue::enqueue(const ModelUpdate& u, SimTime) {
    if (q_max_ != kUnboundedQueue && q_.size() >= q_max_) return {Outcome::DroppedFull, std::nullopt};
    q_.push_back(u);
    q_.back().merges = 0;
    return {Outcome::Appended, static_cast<std::uint32_t>(q_.size() - 1)};
}

std::optional<ModelUpdate> FifoQueue::begin_service(SimTime) {
    if (locked_ || q_.empty()) return std::nullopt;
    locked_ = true;
    return q_.front();
}

ModelUpdate FifoQueue::complete_service(SimTime) {
    if (!locked_) throw ContractViolation("FifoQueue::complete_service: nothing in service");
    ModelUpdate done = std::move(q_.front());
    q_.pop_front();
    locked_ = false;
    return done;
}

QueueSnapshot FifoQueue::snapshot() const {
    QueueSnapshot s;
    s.q_max = q_max_;
    s.q_now = static_cast<std::uint32_t>(q_.size());
    s.full = s.q_now == s.q_max;
    for (const auto& u : q_) s.active_cluster_set.push_back(u.cluster);
    std::sort(s.active_cluster_set.begin(), s.active_cluster_set.end());
    s.active_cluster_set.erase(std::unique(s.active_cluster_set.begin(), s.active_cluster_set.end()),
                               s.active_cluster_set.end());
    return s;
}

std::unique_ptr<QueueDiscipline> make_queue(Discipline d, const OlafParams& p) {
    if (d == Discipline::Olaf) return std::make_unique<OlafQueue>(p);
    return std::make_unique<FifoQueue>(p.q_max);
}

}  // namespace olaf
