#include <doctest.h>

#include "probagg/baselines.hpp"
#include "probagg/harness/dataset.hpp"
#include "probagg/metrics.hpp"
#include "support.hpp"

using namespace probagg;

namespace {

DataMatrix duplicate_groups(std::size_t groups, std::size_t copies, std::vector<int>& ids) {
    std::vector<double> v;
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t r = 0; r < copies; ++r) {
            v.push_back(10.0 * static_cast<double>(g));
            v.push_back(static_cast<double>(g * g));
            ids.push_back(static_cast<int>(g));
        }
    }
    return DataMatrix(groups * copies, 2, v);
}

DataMatrix translated(const DataMatrix& x, double by) {
    Matrix m = x.matrix();
    for (double& v : m.values()) v += by;
    return DataMatrix(m);
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("kmeans recovers duplicate groups with zero inertia") {
    std::vector<int> ids;
    auto x = duplicate_groups(4, 5, ids);
    KMeansConfig cfg;
    cfg.k = 4;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        cfg.seed = seed;
        auto r = kmeans_fit(x, cfg);
        CHECK(accuracy(Labels{ids, 4}, r.labels) == 1.0);
        CHECK(r.inertia_trace.back() == 0.0);
        CHECK(r.converged);
    }
}

TEST_CASE("kmeans inertia never rises") {
    harness::BlobSpec spec;
    spec.k = 5;
    spec.n_per_cluster = 40;
    spec.sigma = 3.0;
    spec.seed = 2;
    auto [x, truth] = harness::make_blobs(spec);
    KMeansConfig cfg;
    cfg.k = 5;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        cfg.seed = seed;
        auto r = kmeans_fit(x, cfg);
        for (std::size_t t = 1; t < r.inertia_trace.size(); ++t) {
            CHECK(r.inertia_trace[t] <= r.inertia_trace[t - 1] * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("kmeans is deterministic and translation invariant") {
    Rng rng(3);
    auto x = testing::random_points(60, 3, rng);
    KMeansConfig cfg;
    cfg.k = 4;
    cfg.seed = 7;
    auto a = kmeans_fit(x, cfg);
    auto b = kmeans_fit(x, cfg);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia_trace == b.inertia_trace);
    CHECK(kmeans_fit(translated(x, 100.0), cfg).labels == a.labels);
    cfg.init = CenterInit::KMeansPlusPlus;
    CHECK(kmeans_fit(x, cfg).labels == kmeans_fit(x, cfg).labels);
}

TEST_CASE("kmeans needs k distinct points") {
    DataMatrix x(4, 1, {1, 1, 1, 2});
    KMeansConfig cfg;
    cfg.k = 3;
    CHECK_THROWS_AS(kmeans_fit(x, cfg), DataError);
    cfg.k = 1;
    CHECK_THROWS_AS(kmeans_fit(x, cfg), ConfigError);
}

TEST_CASE("kmeans honours explicit initial centers") {
    DataMatrix x(4, 1, {0, 1, 10, 11});
    KMeansConfig cfg;
    cfg.k = 2;
    cfg.initial_centers = Centroids(Matrix(2, 1, std::vector<double>{11, 0}));
    auto r = kmeans_fit(x, cfg);
    CHECK(r.labels.ids == std::vector<int>{1, 1, 0, 0});
    cfg.initial_centers = Centroids(Matrix(3, 1, 0.0));
    CHECK_THROWS_AS(kmeans_fit(x, cfg), ConfigError);
}

TEST_CASE("fcm on duplicate groups gives one-hot memberships at the group points") {
    std::vector<int> ids;
    auto x = duplicate_groups(3, 4, ids);
    FcmConfig cfg;
    cfg.k = 3;
    auto r = fcm_fit(x, cfg);
    CHECK(accuracy(Labels{ids, 3}, r.labels) == 1.0);
    for (std::size_t i = 0; i < x.n(); ++i) {
        auto row = r.partition.row(i);
        CHECK(*std::max_element(row.begin(), row.end()) >= 1.0 - 1e-9);
    }
    for (std::size_t c = 0; c < 3; ++c) {
        bool at_point = false;
        for (std::size_t i = 0; i < x.n(); ++i) {
            at_point = at_point || (std::abs(r.centroids.row(c)[0] - x(i, 0)) < 1e-6 &&
                                    std::abs(r.centroids.row(c)[1] - x(i, 1)) < 1e-6);
        }
        CHECK(at_point);
    }
}

TEST_CASE("fcm objective never rises and rows stay on the simplex") {
    harness::BlobSpec spec;
    spec.k = 4;
    spec.n_per_cluster = 50;
    spec.sigma = 2.5;
    spec.seed = 5;
    auto [x, truth] = harness::make_blobs(spec);
    for (double m : {1.1, 1.5, 2.0}) {
        FcmConfig cfg;
        cfg.k = 4;
        cfg.m = m;
        cfg.seed = 1;
        auto r = fcm_fit(x, cfg);
        CHECK(validate_partition(r.partition).on_simplex());
        for (std::size_t t = 1; t < r.objective_trace.size(); ++t) {
            CHECK(r.objective_trace[t] <= r.objective_trace[t - 1] * (1.0 + 1e-8));
        }
    }
}

TEST_CASE("fcm is deterministic and translation invariant") {
    Rng rng(4);
    auto x = testing::random_points(50, 2, rng);
    FcmConfig cfg;
    cfg.k = 3;
    cfg.m = 1.5;
    cfg.seed = 2;
    auto a = fcm_fit(x, cfg);
    CHECK(a.partition == fcm_fit(x, cfg).partition);
    auto t = fcm_fit(translated(x, 50.0), cfg);
    CHECK(testing::max_abs_diff(a.partition.matrix(), t.partition.matrix()) <= 1e-8);
}

TEST_CASE("weighted centers") {
    DataMatrix x(3, 1, {0, 2, 10});
    PartitionMatrix p(3, 2);
    p(0, 0) = 1.0;
    p(1, 0) = 0.5, p(1, 1) = 0.5;
    p(2, 1) = 1.0;
    auto c = weighted_centers(x, p);
    CHECK(c.row(0)[0] == doctest::Approx(2.0 / 3.0));
    CHECK(c.row(1)[0] == doctest::Approx(11.0 / 1.5));
    auto c2 = weighted_centers(x, p, 2.0);
    CHECK(c2.row(0)[0] == doctest::Approx(0.5 / 1.25));
}

TEST_CASE("separated blobs are solved exactly by both baselines") {
    for (std::size_t k : {2u, 3u, 5u}) {
        harness::BlobSpec spec;
        spec.k = k;
        spec.n_per_cluster = 50;
        spec.spread = 10.0;
        spec.sigma = 0.5;
        spec.seed = k;
        auto [x, truth] = harness::make_blobs(spec);
        KMeansConfig km;
        km.k = k;
        km.init = CenterInit::KMeansPlusPlus;
        FcmConfig fcm;
        fcm.k = k;
        fcm.init = CenterInit::KMeansPlusPlus;
        CHECK(accuracy(truth, kmeans_fit(x, km).labels) == 1.0);
        CHECK(accuracy(truth, fcm_fit(x, fcm).labels) == 1.0);
    }
}

}
