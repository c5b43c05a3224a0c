#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "olaf/core.hpp"

namespace olaf {

enum class Outcome { Appended, Replaced, Aggregated, DroppedFull, DroppedLowReward };

std::string_view to_string(Outcome o);

struct EnqueueOutcome {
    Outcome kind;
    std::optional<std::uint32_t> slot;
};

struct QueueSnapshot {
    std::uint32_t q_now = 0;
    std::uint32_t q_max = 0;
    bool full = false;
    std::vector<ClusterId> active_cluster_set;
};

class QueueDiscipline {
public:
    virtual ~QueueDiscipline() = default;
    virtual EnqueueOutcome enqueue(const ModelUpdate& u, SimTime now) = 0;
    // Locks the head for transmission. Absent when empty or already busy.
    virtual std::optional<ModelUpdate> begin_service(SimTime now) = 0;
    // Releases the locked head and returns it.
    virtual ModelUpdate complete_service(SimTime now) = 0;
    virtual QueueSnapshot snapshot() const = 0;
    virtual bool busy() const = 0;
    // Queued updates in departure order, the locked head first.
    virtual std::vector<ModelUpdate> contents() const = 0;
};

struct OlafParams {
    std::uint32_t q_max = 8;
    std::uint32_t cluster_count = 1;
    double theta = 0.1;
    MergePolicy merge;
};

class OlafQueue final : public QueueDiscipline {
public:
    explicit OlafQueue(const OlafParams& p);

    EnqueueOutcome enqueue(const ModelUpdate& u, SimTime now) override;
    std::optional<ModelUpdate> begin_service(SimTime now) override;
    ModelUpdate complete_service(SimTime now) override;
    QueueSnapshot snapshot() const override;
    bool busy() const override { return in_service_.has_value(); }
    std::vector<ModelUpdate> contents() const override;

    // Introspection for tests.
    std::uint32_t entries_of(ClusterId c) const;
    std::uint32_t unlocked_entries_of(ClusterId c) const;
    bool replace_flag(ClusterId c) const { return replace_[c].flag; }
    std::uint32_t free_segments() const { return avail_count_; }
    std::uint32_t occupied_segments() const { return params_.q_max - avail_count_; }
    // Throws ContractViolation describing the first broken invariant.
    void check_invariants() const;

private:
    // Three-column ring per cluster: positions in out_ of the cluster's entries.
    struct ClusterStatus {
        std::array<std::uint32_t, 3> pos{};
        std::uint8_t head = 0;
        std::uint8_t tail = 0;
        std::uint32_t count() const { return (tail + 3u - head) % 3u; }
    };
    struct ReplaceStatus {
        bool flag = false;
        WorkerId worker;
    };

    bool is_locked(std::uint32_t out_pos) const;
    EnqueueOutcome gated_compute(std::uint32_t seg, const ModelUpdate& u);

    OlafParams params_;
    std::vector<std::optional<ModelUpdate>> segments_;
    std::vector<std::uint32_t> avail_;  // cyclic, free segment ids
    std::vector<std::uint32_t> out_;    // cyclic, occupied segment ids in departure order
    std::uint32_t write_ptr_ = 0, append_available_addr_ = 0, avail_count_ = 0;
    std::uint32_t read_ptr_ = 0, append_out_addr_ = 0, out_count_ = 0;
    std::vector<ClusterStatus> status_;
    std::vector<ReplaceStatus> replace_;
    std::optional<std::uint32_t> in_service_;      // segment id
    std::optional<std::uint32_t> in_service_pos_;  // its former out_ position
};

inline constexpr std::uint32_t kUnboundedQueue = 0xFFFFFFFFu;

// Tail-drop FIFO with the same service locking as OlafQueue.
class FifoQueue final : public QueueDiscipline {
public:
    explicit FifoQueue(std::uint32_t q_max) : q_max_(q_max) {}

    EnqueueOutcome enqueue(const ModelUpdate& u, SimTime now) override;
    std::optional<ModelUpdate> begin_service(SimTime now) override;
    ModelUpdate complete_service(SimTime now) override;
    QueueSnapshot snapshot() const override;
    bool busy() const override { return locked_; }
    std::vector<ModelUpdate> contents() const override { return {q_.begin(), q_.end()}; }

private:
    std::uint32_t q_max_;
    std::deque<ModelUpdate> q_;
    bool locked_ = false;
};

enum class Discipline { Olaf, Fifo };

std::unique_ptr<QueueDiscipline> make_queue(Discipline d, const OlafParams& p);

}  // namespace olaf
