#include <doctest.h>

#include "olaf/errors.hpp"
#include "olaf/verify.hpp"

using namespace olaf;
using namespace olaf::verify;

namespace {

SimTime ms(double x) { return SimTime::from_seconds(x / 1000.0); }
Duration dms(double x) { return Duration::from_seconds(x / 1000.0); }

VerifierConfig base(std::uint32_t F) {
    VerifierConfig c;
    c.cluster_count = F;
    c.service = dms(2);
    c.tx = TxControlParams::make(dms(400), VMode::Urgency);
    c.epsilon = 0.1;
    return c;
}

ClusterSchedule explicit_arrivals(std::vector<double> at_ms) {
    ClusterSchedule s;
    for (double t : at_ms) s.arrivals.push_back(ms(t));
    return s;
}

VerifierConfig adversarial() { return load_config(std::string(OLAF_SCENARIO_DIR) + "/verify_adversarial.json"); }

}  // namespace

TEST_CASE("single cluster trajectory") {
    auto c = base(1);
    c.add_periodic(dms(100), Duration{}, 10);
    const auto t = trajectory(c, {});
    const auto& u = t.clusters[0].updates;
    REQUIRE(u.size() == 10);
    for (std::size_t k = 0; k < u.size(); ++k) {
        CHECK(*u[k].departure == u[k].gen + dms(2));
        CHECK(u[k].queue_at_arrival == 0);
    }
    const auto& p = t.clusters[0].peaks;
    REQUIRE(p.size() == 10);
    CHECK(p[0] == dms(2));
    for (std::size_t k = 1; k < p.size(); ++k) CHECK(p[k] == dms(102));
}

TEST_CASE("simultaneous arrivals are spaced by the service time") {
    auto c = base(2);
    c.add_periodic(dms(100), Duration{}, 5);
    c.add_periodic(dms(100), Duration{}, 5);
    const auto t = trajectory(c, {});
    for (std::size_t k = 0; k < 5; ++k) {
        const auto d0 = *t.clusters[0].updates[k].departure, d1 = *t.clusters[1].updates[k].departure;
        CHECK(d1 - d0 >= dms(2));
        CHECK(t.clusters[1].updates[k].queue_at_arrival == 1);
    }
}

TEST_CASE("two sends within one service time collapse into one departure") {
    auto c = base(2);
    c.schedules.push_back(explicit_arrivals({0.5, 1.0}));
    c.schedules.push_back(explicit_arrivals({0.0}));
    c.schedules[0].period = dms(100);
    c.schedules[1].period = dms(100);
    const auto t = trajectory(c, {});
    const auto& u = t.clusters[0].updates;
    CHECK(u[0].absorbed);
    CHECK_FALSE(u[1].absorbed);
    CHECK(*u[0].departure == ms(4));
    CHECK(*u[1].departure == ms(4));
    REQUIRE(t.clusters[0].series.deliveries.size() == 1);
    CHECK(t.clusters[0].series.deliveries[0].gen == ms(1));
    CHECK(t.clusters[0].peaks.size() == 1);
}

TEST_CASE("the queue bound drops arrivals") {
    auto c = base(3);
    c.q_max = 2;
    for (int i = 0; i < 3; ++i) c.schedules.push_back(explicit_arrivals({0.0}));
    // The entry in service holds a slot. No ACK yet, so nothing is gated.
    const auto t = trajectory(c, {});
    CHECK_FALSE(t.clusters[0].updates[0].dropped);
    CHECK_FALSE(t.clusters[1].updates[0].dropped);
    CHECK(t.clusters[2].updates[0].dropped);
    CHECK_FALSE(t.clusters[2].updates[0].departure);
}

TEST_CASE("gated decisions are validated") {
    auto c = adversarial();
    CHECK_THROWS_AS(trajectory(c, {}), ContractViolation);
    const auto needed = check_fairness([&] {
        auto loose = c;
        loose.epsilon = 100;
        return loose;
    }());
    CHECK(needed.result == Result::ObjectiveHolds);
    CHECK(needed.leaves > 1);
}

TEST_CASE("one cluster holds vacuously") {
    auto c = base(1);
    c.add_periodic(dms(100), Duration{}, 10);
    c.epsilon = 1e-12;
    CHECK(check_fairness(c).result == Result::ObjectiveHolds);
}

TEST_CASE("bundled two-cluster and single-cluster configurations hold") {
    for (const char* f : {"verify_uniform.json", "verify_hetero.json", "verify_single.json"}) {
        CAPTURE(f);
        const auto v = check_fairness(load_config(std::string(OLAF_SCENARIO_DIR) + "/" + f));
        CHECK(v.result == Result::ObjectiveHolds);
        CHECK(v.max_gap <= 0.1);
    }
}

TEST_CASE("adversarial schedule yields a replayable witness") {
    const auto c = adversarial();
    const auto v = check_fairness(c);
    REQUIRE(v.result == Result::Violated);
    REQUIRE(v.witness);
    const auto replay = trajectory(c, v.witness->decisions);
    const auto g = worst_gap(replay);
    CHECK(g.gap > c.epsilon);
    CHECK(g.gap == v.witness->gap);
    CHECK(g.u == v.witness->u);
    CHECK(g.v == v.witness->v);
    const auto log = witness_log(*v.witness);
    CHECK(log.find("# witness") == 0);
    CHECK(log.find("Generate") != std::string::npos);
}

TEST_CASE("holding at epsilon implies holding at anything larger") {
    const auto c = adversarial();
    bool held = false;
    for (double eps : {0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0}) {
        auto e = c;
        e.epsilon = eps;
        const bool holds = check_fairness(e).result == Result::ObjectiveHolds;
        if (held) CHECK(holds);
        held = held || holds;
    }
    CHECK(held);
}

TEST_CASE("threads do not change the verdict") {
    for (double eps : {0.01, 0.05, 10.0}) {
        auto a = adversarial();
        a.epsilon = eps;
        auto b = a;
        b.threads = 4;
        CHECK(check_fairness(a).result == check_fairness(b).result);
    }
}

TEST_CASE("branch cap is reported, not truncated") {
    auto c = adversarial();
    c.epsilon = 100;
    c.branch_cap = 2;
    CHECK_THROWS_AS(check_fairness(c), BoundTooLarge);
}

TEST_CASE("config parsing") {
    CHECK_THROWS_AS(parse_config("{}"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"verifier": {"clusters": 1, "schedules": [{"period_s": 0.1}], "bogus": 1}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"verifier": {"clusters": 2, "schedules": [{"period_s": 0.1}]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"verifier": {"clusters": 1, "epsilon": 0, "schedules": [{"period_s": 0.1}]}})"),
                    ConfigError);
    const auto c = parse_config(
        R"({"verifier": {"clusters": 2, "horizon": 3, "schedules": [{"period_s": 0.1}, {"arrivals_s": [0.0, 0.05]}]}})");
    CHECK(c.schedules[0].arrivals.size() == 3);
    CHECK(c.schedules[1].arrivals[1] == SimTime::from_seconds(0.05));
    CHECK(c.epsilon_mode == EpsilonMode::PeriodNormalized);
}

TEST_CASE("epsilon modes scale the same peaks") {
    auto c = base(2);
    c.add_periodic(dms(100), Duration{}, 6);
    c.add_periodic(dms(300), Duration{}, 6);
    c.epsilon_mode = EpsilonMode::Absolute;
    const auto a = trajectory(c, {});
    c.epsilon_mode = EpsilonMode::ServiceNormalized;
    const auto s = trajectory(c, {});
    c.epsilon_mode = EpsilonMode::PeriodNormalized;
    const auto p = trajectory(c, {});
    for (int k = 0; k < 2; ++k) {
        CHECK(s.clusters[k].avg_peak == doctest::Approx(a.clusters[k].avg_peak / 0.002));
        CHECK(p.clusters[k].avg_peak == doctest::Approx(a.clusters[k].avg_peak / (k ? 0.3 : 0.1)));
    }
}
