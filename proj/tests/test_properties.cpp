// Randomized invariants. Also linked into the acceptance binary, which runs this suite as one criterion.
#include <doctest.h>

#include "probagg/baselines.hpp"
#include "probagg/harness/dataset.hpp"
#include "probagg/harness/experiment.hpp"
#include "probagg/metrics.hpp"
#include "probagg/opa.hpp"
#include "probagg/pac.hpp"
#include "support.hpp"

using namespace probagg;

namespace {

constexpr int kTrials = 40;

double score_loop(const PartitionMatrix& p, const DistanceMatrix& d, std::size_t i, std::size_t c) {
    double s = 0.0;
    for (std::size_t j = 0; j < p.n(); ++j) {
        if (j != i) s += p(j, c) * d(i, j);
    }
    return s;
}

DataMatrix noisy_blobs(std::uint64_t seed, std::size_t k) {
    harness::BlobSpec spec;
    spec.k = k;
    spec.n_per_cluster = 25;
    spec.sigma = 2.0;
    spec.seed = seed;
    return harness::make_blobs(spec).first;
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("every sweep keeps rows on the simplex") {
    for (int t = 0; t < 12; ++t) {
        const std::size_t k = 2 + static_cast<std::size_t>(t % 4);
        auto d = pairwise_distances(noisy_blobs(static_cast<std::uint64_t>(t), k), DistanceKind::SquaredEuclidean);
        SolverConfig cfg;
        cfg.k = k;
        cfg.m = std::vector<double>{1.01, 1.03, 1.3, 2.0}[static_cast<std::size_t>(t % 4)];
        cfg.seed = static_cast<std::uint64_t>(t);
        cfg.max_sweeps = 30;
        std::size_t checked = 0;
        PacOptions options;
        options.on_sweep = [&](const SweepState& st) {
            auto report = validate_partition(st.partition);
            CHECK(report.on_simplex());
            CHECK(report.max_row_sum_error <= kRowSumTolerance);
            ++checked;
        };
        auto gs = pac_fit(d, cfg, options);
        auto jac = pac_fit_jacobi(d, cfg, options);
        CHECK(checked == gs.sweeps_run + jac.sweeps_run);
    }
}

TEST_CASE("update_row is invariant to score scaling") {
    Rng rng(1);
    for (int t = 0; t < kTrials * 5; ++t) {
        const std::size_t k = 2 + rng.below(6);
        std::vector<double> s(k);
        for (double& v : s) v = std::exp(rng.uniform(-5.0, 5.0));
        const double m = 1.0 + std::exp(rng.uniform(-5.0, 1.0));
        auto base = update_row(s, m, 1e-300);
        for (double c : {0.125, 2.0, 1024.0, 0x1p-40}) {
            std::vector<double> scaled = s;
            for (double& v : scaled) v *= c;
            CHECK(update_row(scaled, m, 1e-300) == base);
        }
        for (double c : {3.0, 0.7, 1e6}) {
            std::vector<double> scaled = s;
            for (double& v : scaled) v *= c;
            auto out = update_row(scaled, m, 1e-300);
            for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(out[i] - base[i]) <= 1e-12);
        }
    }
}

TEST_CASE("pac trajectory is unchanged by scaling the distances") {
    for (int t = 0; t < 4; ++t) {
        auto d = pairwise_distances(noisy_blobs(100 + static_cast<std::uint64_t>(t), 3), DistanceKind::SquaredEuclidean);
        SolverConfig cfg;
        cfg.k = 3;
        cfg.seed = static_cast<std::uint64_t>(t);
        std::vector<PartitionMatrix> a, b;
        PacOptions ra, rb;
        ra.on_sweep = [&](const SweepState& st) { a.push_back(st.partition); };
        rb.on_sweep = [&](const SweepState& st) { b.push_back(st.partition); };
        pac_fit(d, cfg, ra);
        pac_fit(d.scaled(4.0), cfg, rb);
        CHECK(a == b);
    }
}

TEST_CASE("opa targets are invariant to scaling the distances and stay on the simplex") {
    Rng rng(2);
    for (int t = 0; t < kTrials; ++t) {
        const std::size_t b = 2 + rng.below(15);
        const std::size_t k = 2 + rng.below(4);
        auto d = testing::random_distances(b, rng);
        auto p = testing::random_partition(b, k, rng);
        const double m = rng.uniform(1.01, 3.0);
        auto q = opa_targets(d, p, m);
        CHECK(validate_partition(q.matrix()).on_simplex());
        CHECK(opa_targets(d.scaled(8.0), p, m).matrix() == q.matrix());
        CHECK(opa_targets(d.scaled(0.25), p, m).matrix() == q.matrix());
        CHECK(testing::max_abs_diff(opa_targets(d.scaled(3.3), p, m).matrix().matrix(), q.matrix().matrix()) <= 1e-12);
    }
}

TEST_CASE("matrix score form equals the loop form") {
    Rng rng(3);
    for (int t = 0; t < kTrials; ++t) {
        const std::size_t n = 2 + rng.below(20);
        const std::size_t k = 2 + rng.below(5);
        auto d = testing::random_distances(n, rng);
        auto p = testing::random_partition(n, k, rng);
        auto s = compute_scores(p, d);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c) CHECK(std::abs(s(i, c) - score_loop(p, d, i, c)) <= 1e-9);
        }
    }
}

TEST_CASE("incrementally maintained scores match a fresh computation") {
    for (int t = 0; t < 8; ++t) {
        const std::size_t k = 2 + static_cast<std::size_t>(t % 3);
        auto d = pairwise_distances(noisy_blobs(200 + static_cast<std::uint64_t>(t), k), DistanceKind::SquaredEuclidean);
        SolverConfig cfg;
        cfg.k = k;
        cfg.seed = static_cast<std::uint64_t>(t);
        cfg.order = t % 2 ? SweepOrder::Shuffled : SweepOrder::Ascending;
        double worst = 0.0;
        PacOptions options;
        options.on_sweep = [&](const SweepState& st) {
            auto fresh = compute_scores(st.partition, d);
            double scale = 1.0;
            for (double v : fresh.matrix().values()) scale = std::max(scale, std::abs(v));
            worst = std::max(worst, testing::max_abs_diff(fresh.matrix(), st.scores) / scale);
        };
        pac_fit(d, cfg, options);
        CHECK(worst <= 1e-7);
    }
}

TEST_CASE("kl loss is nonnegative and zero at equality") {
    Rng rng(4);
    for (int t = 0; t < kTrials * 5; ++t) {
        const std::size_t b = 1 + rng.below(10);
        const std::size_t k = 2 + rng.below(6);
        auto q = testing::random_partition(b, k, rng);
        auto p = testing::random_partition(b, k, rng);
        CHECK(kl_loss(BatchCodes(q), p) >= 0.0);
        CHECK(kl_loss(BatchCodes(p), p) == 0.0);
        auto hard = PartitionMatrix::one_hot(hard_labels(q).ids, k);
        CHECK(kl_loss(BatchCodes(hard), p) >= 0.0);
    }
}

TEST_CASE("kl gradient matches central differences") {
    Rng rng(5);
    const double h = 1e-5;
    for (int t = 0; t < kTrials; ++t) {
        const std::size_t b = 1 + rng.below(8);
        const std::size_t k = 2 + rng.below(4);
        Matrix logits(b, k);
        for (double& v : logits.values()) v = 1.5 * rng.normal();
        BatchCodes q(testing::random_partition(b, k, rng));
        auto g = kl_logit_gradient(q, logits);
        for (std::size_t i = 0; i < b; ++i) {
            for (std::size_t c = 0; c < k; ++c) {
                Matrix up = logits, down = logits;
                up(i, c) += h;
                down(i, c) -= h;
                double fd = (kl_loss(q, softmax_rows(up)) - kl_loss(q, softmax_rows(down))) / (2 * h);
                CHECK(std::abs(fd - g(i, c)) <= 1e-6);
            }
        }
    }
}

TEST_CASE("accuracy equals brute-force enumeration for small k") {
    Rng rng(6);
    for (int t = 0; t < kTrials * 5; ++t) {
        const std::size_t n = 1 + rng.below(30);
        const std::size_t kt = 1 + rng.below(4);
        const std::size_t kp = 1 + rng.below(4);
        auto truth = testing::random_labels(n, kt, rng);
        auto pred = testing::random_labels(n, kp, rng);
        CHECK(accuracy(truth, pred) == doctest::Approx(testing::brute_force_accuracy(truth, pred)).epsilon(1e-15));
    }
}

TEST_CASE("nmi and ari agree with their oracles") {
    Rng rng(7);
    for (int t = 0; t < kTrials * 5; ++t) {
        const std::size_t n = 2 + rng.below(60);
        auto a = testing::random_labels(n, 1 + rng.below(5), rng);
        auto b = testing::random_labels(n, 1 + rng.below(5), rng);
        CHECK(std::abs(nmi(a, b) - testing::nmi_oracle(a, b)) <= 1e-9);
        CHECK(std::abs(ari(a, b) - testing::ari_oracle(a, b)) <= 1e-9);
    }
}

TEST_CASE("hard labels ignore positive row rescaling") {
    Rng rng(8);
    for (int t = 0; t < kTrials; ++t) {
        auto p = testing::random_partition(10, 4, rng);
        PartitionMatrix q = p;
        for (std::size_t i = 0; i < 10; ++i) {
            const double c = rng.uniform(0.1, 10.0);
            double sum = 0.0;
            for (double& v : q.row(i)) sum += (v *= c);
            for (double& v : q.row(i)) v /= sum;
        }
        CHECK(hard_labels(p) == hard_labels(q));
    }
}

TEST_CASE("init_partition always validates") {
    Rng rng(9);
    for (int t = 0; t < kTrials; ++t) {
        const std::size_t n = 3 + rng.below(50);
        const std::size_t k = 2 + rng.below(n - 2);
        auto p = init_partition(n, k, rng.next_u64(), rng.uniform(0.0, 0.5));
        CHECK(validate_partition(p).valid());
    }
}

TEST_CASE("fixed seeds give bit-identical results") {
    auto x = noisy_blobs(300, 3);
    SolverConfig cfg;
    cfg.k = 3;
    cfg.seed = 17;
    cfg.order = SweepOrder::Shuffled;
    auto a = pac_fit(x, cfg);
    auto b = pac_fit(x, cfg);
    CHECK(a.partition == b.partition);
    CHECK(a.objective_trace == b.objective_trace);
    CHECK(pac_fit_jacobi(x, cfg).partition == pac_fit_jacobi(x, cfg).partition);

    KMeansConfig km;
    km.k = 3;
    km.seed = 17;
    CHECK(kmeans_fit(x, km).inertia_trace == kmeans_fit(x, km).inertia_trace);
    FcmConfig fcm;
    fcm.k = 3;
    fcm.seed = 17;
    CHECK(fcm_fit(x, fcm).partition == fcm_fit(x, fcm).partition);

    OnlineTrainConfig tc;
    tc.epochs = 10;
    tc.batch_size = 25;
    tc.seed = 17;
    CHECK(online_train(x, 3, tc).partition == online_train(x, 3, tc).partition);

    harness::ExperimentSpec spec;
    spec.solver.k = 3;
    spec.seeds = {1, 2};
    harness::BlobSpec blobs;
    blobs.sigma = 2.0;
    spec.source.synthetic = blobs;
    for (auto algo : {harness::Algorithm::Pac, harness::Algorithm::Fcm, harness::Algorithm::KMeans}) {
        spec.algorithm = algo;
        auto r1 = harness::run_experiment(spec);
        auto r2 = harness::run_experiment(spec);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(r1.records[i].acc == r2.records[i].acc);
            CHECK(r1.records[i].nmi == r2.records[i].nmi);
            CHECK(r1.records[i].ari == r2.records[i].ari);
            CHECK(r1.records[i].objective_trace == r2.records[i].objective_trace);
        }
    }
}

}
