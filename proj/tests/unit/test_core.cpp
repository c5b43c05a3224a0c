#include <doctest.h>

#include <random>

#include "olaf/core.hpp"
#include "olaf/errors.hpp"

using namespace olaf;

namespace {

ModelUpdate upd(ClusterId c, std::uint32_t w, std::vector<double> g, std::uint32_t count = 1) {
    ModelUpdate u;
    u.cluster = c;
    u.worker = {c, w};
    u.gradient = std::move(g);
    u.agg_count = count;
    return u;
}

}  // namespace

TEST_CASE("time: seconds round trip and transmission time") {
    CHECK(Duration::from_seconds(1.0).ticks == kTicksPerSecond);
    CHECK(SimTime::from_seconds(0.25).ticks == kTicksPerSecond / 4);
    // 2048 bits at 40 Gb/s is 51.2 ns.
    CHECK(transmission_time(2048, 40e9).ticks == 51'200);
    CHECK(transmission_time(8192, 1e6) == Duration::from_seconds(0.008192));
    const SimTime t = SimTime::from_seconds(1) + Duration::from_seconds(0.5);
    CHECK((t - SimTime::from_seconds(1)) == Duration::from_seconds(0.5));
}

TEST_CASE("update_key projects cluster and worker") {
    auto a = upd(3, 7, {1.0});
    CHECK(update_key(a) == std::pair<ClusterId, WorkerId>{3, WorkerId{3, 7}});
    auto b = upd(3, 7, {2.0});
    CHECK(update_key(a) == update_key(b));
    auto c = upd(4, 7, {1.0});
    CHECK(update_key(a).first != update_key(c).first);
}

TEST_CASE("merge_gradients examples") {
    CHECK(merge_gradients(upd(0, 0, {1, 1}), upd(0, 1, {3, 3})) == std::vector<double>{2, 2});
    CHECK(merge_gradients(upd(0, 0, {0, 0}, 3), upd(0, 1, {4, 0}, 1)) == std::vector<double>{1, 0});
    auto a = upd(0, 0, {0.5, -2, 7});
    CHECK(merge_gradients(a, a) == a.gradient);
    CHECK_THROWS_AS(merge_gradients(upd(0, 0, {1, 2}), upd(0, 1, {1})), StructuralError);
}

TEST_CASE("merge_gradients is commutative and associative with counts") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0, 1);
    std::uniform_int_distribution<int> dimd(1, 64), cnt(1, 9);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = dimd(rng);
        auto make = [&](std::uint32_t w) {
            std::vector<double> g(d);
            for (auto& x : g) x = n(rng);
            return upd(0, w, g, static_cast<std::uint32_t>(cnt(rng)));
        };
        auto a = make(0), b = make(1), c = make(2);
        const auto ab = merge_gradients(a, b), ba = merge_gradients(b, a);
        for (int i = 0; i < d; ++i) CHECK(ab[i] == doctest::Approx(ba[i]).epsilon(1e-9));

        ModelUpdate left = a;
        merge_into(left, b);
        merge_into(left, c);
        ModelUpdate bc = b;
        merge_into(bc, c);
        ModelUpdate right = a;
        merge_into(right, bc);
        CHECK(left.agg_count == right.agg_count);
        for (int i = 0; i < d; ++i) CHECK(left.gradient[i] == doctest::Approx(right.gradient[i]).epsilon(1e-9));
    }
}

TEST_CASE("merge_into metadata policy") {
    auto a = upd(2, 0, {1});
    a.reward = 5;
    a.gen_time = SimTime::from_seconds(1);
    a.contributors = {{a.worker, 0}};
    auto b = upd(2, 1, {3}, 3);
    b.reward = 4;
    b.gen_time = SimTime::from_seconds(2);
    b.contributors = {{b.worker, 4}};

    ModelUpdate m = a;
    merge_into(m, b);
    CHECK(m.worker == a.worker);
    CHECK(m.agg_count == 4);
    CHECK(m.reward == 5);
    CHECK(m.gen_time == SimTime::from_seconds(2));
    CHECK(m.gradient[0] == doctest::Approx(2.5));
    CHECK(m.contributors.size() == 2);

    ModelUpdate w = a;
    merge_into(w, b, {RewardMerge::WeightedMean, GenTimeMerge::Newest});
    CHECK(w.reward == doctest::Approx((5.0 + 3 * 4.0) / 4));
    CHECK(w.gen_time == b.gen_time);
}
