#pragma once

#include <optional>
#include <vector>

#include "olaf/core.hpp"

namespace olaf::aom {

struct Delivery {
    SimTime gen;
    SimTime deliver;
    // Set for an update folded into a later one before it left the queue.
    // Absorbed entries emit no peak and never refresh the age.
    bool absorbed = false;
};

struct Series {
    ClusterId cluster = 0;
    std::vector<Delivery> deliveries;
    SimTime horizon;
};

// Marks entry k absorbed when D(k) >= A(k+1); for series listing every
// arrival with the departure time of the packet that carried it.
std::vector<Delivery> from_arrivals(const std::vector<std::pair<SimTime, SimTime>>& gen_deliver);

// Age at t: t minus the freshest generation time delivered by t (cold start: t).
Duration aom_at(const Series& s, SimTime t);

std::vector<Duration> peak_aom(const Series& s);

// Exact time average over [0, horizon].
double avg_aom_seconds(const Series& s);
Duration avg_aom(const Series& s);

double avg_peak_seconds(const Series& s);

double jain_fairness(const std::vector<double>& values);

struct FairnessReport {
    std::vector<double> per_cluster_avg_aom;  // seconds
    double jain_index = 1.0;
    double max_pairwise_gap = 0.0;
};

FairnessReport fairness(const std::vector<Series>& per_cluster);

// Sawtooth breakpoints (t, age) over [0, horizon], for plotting.
std::vector<std::pair<SimTime, Duration>> breakpoints(const Series& s);

}  // namespace olaf::aom
