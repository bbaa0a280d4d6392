#include <doctest.h>

#include "probagg/harness/dataset.hpp"
#include "probagg/metrics.hpp"
#include "probagg/opa.hpp"
#include "probagg/pac.hpp"
#include "support.hpp"

using namespace probagg;

namespace {

// Direct transcription of the gated contrastive loss, without max-subtraction.
double contrastive_oracle(const Matrix& z1, const Matrix& z2, const PartitionMatrix* p, double gate, double tau) {
    auto dot = [](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t f = 0; f < a.size(); ++f) s += a[f] * b[f];
        return s;
    };
    const std::size_t b = z1.rows();
    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        double denom = 0.0;
        for (std::size_t j = 0; j < b; ++j) {
            double w = p ? 1.0 - dot(p->row(i), p->row(j)) : gate;
            if (j != i) denom += w * std::exp(dot(z1.row(i), z1.row(j)) / tau);
            denom += w * std::exp(dot(z1.row(i), z2.row(j)) / tau);
        }
        total -= std::log(std::exp(dot(z1.row(i), z2.row(i)) / tau) / denom);
    }
    return total;
}

Matrix unit_rows(std::size_t b, std::size_t e, Rng& rng) {
    Matrix z(b, e);
    for (std::size_t i = 0; i < b; ++i) {
        double n = 0.0;
        for (double& v : z.row(i)) {
            v = rng.normal();
            n += v * v;
        }
        for (double& v : z.row(i)) v /= std::sqrt(n);
    }
    return z;
}

Matrix random_logits(std::size_t b, std::size_t k, Rng& rng) {
    Matrix m(b, k);
    for (double& v : m.values()) v = 2.0 * rng.normal();
    return m;
}

double kl_of_logits(const BatchCodes& q, const Matrix& logits) { return kl_loss(q, softmax_rows(logits)); }

}  // namespace

TEST_SUITE("opa") {

TEST_CASE("uniform probabilities and equal distances give uniform targets") {
    Matrix d(4, 4, 2.0);
    for (std::size_t i = 0; i < 4; ++i) d(i, i) = 0.0;
    auto q = opa_targets(DistanceMatrix::from_values(d), PartitionMatrix(4, 3, 1.0 / 3.0), 1.03);
    for (double v : q.matrix().matrix().values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("targets of the hand example") {
    auto d = DistanceMatrix::from_values(Matrix(3, 3, std::vector<double>{0, 1, 4, 1, 0, 1, 4, 1, 0}));
    std::vector<int> ids{0, 0, 1};
    auto q = opa_targets(d, PartitionMatrix::one_hot(ids, 2), 2.0);
    const std::vector<double> expected{0.8, 0.2, 0.5, 0.5, 0.0, 1.0};
    for (std::size_t i = 0; i < 6; ++i) CHECK(q.matrix().matrix().values()[i] == doctest::Approx(expected[i]).epsilon(1e-15));
}

TEST_CASE("targets equal update_row on the batch scores") {
    Rng rng(1);
    auto d = testing::random_distances(7, rng);
    auto p = testing::random_partition(7, 3, rng);
    auto q = opa_targets(d, p, 1.2);
    auto s = compute_scores(p, d);
    for (std::size_t i = 0; i < 7; ++i) {
        auto row = update_row(s.row(i), 1.2, 1e-12);
        for (std::size_t c = 0; c < 3; ++c) CHECK(q(i, c) == row[c]);
    }
}

TEST_CASE("kl loss values") {
    Rng rng(2);
    auto p = testing::random_partition(5, 3, rng);
    CHECK(kl_loss(BatchCodes(p), p) == 0.0);

    PartitionMatrix q(1, 2), half(1, 2, 0.5);
    q(0, 0) = 1.0;
    CHECK(kl_loss(BatchCodes(q), half) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    auto a = testing::random_partition(6, 4, rng);
    auto b = testing::random_partition(6, 4, rng);
    double oracle = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t c = 0; c < 4; ++c) oracle += a(i, c) * std::log(a(i, c) / b(i, c));
    }
    CHECK(std::abs(kl_loss(BatchCodes(a), b) - oracle / 6.0) <= 1e-9);
}

TEST_CASE("kl loss clamps zero predictions") {
    PartitionMatrix q(1, 2, 0.5), p(1, 2);
    p(0, 0) = 1.0;
    double v = kl_loss(BatchCodes(q), p);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(0.5 * std::log(0.5) - 0.5 * std::log(1e-12) + 0.5 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("kl gradient is zero at the stationary point and rows sum to zero") {
    Rng rng(3);
    auto logits = random_logits(4, 3, rng);
    auto g0 = kl_logit_gradient(BatchCodes(softmax_rows(logits)), logits);
    for (double v : g0.values()) CHECK(v == 0.0);

    auto q = testing::random_partition(4, 3, rng);
    auto g = kl_logit_gradient(BatchCodes(q), logits);
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (double v : g.row(i)) s += v;
        CHECK(std::abs(s) <= 1e-15);
    }
}

TEST_CASE("kl gradient matches central differences on a 4x3 instance") {
    Rng rng(4);
    auto logits = random_logits(4, 3, rng);
    BatchCodes q(testing::random_partition(4, 3, rng));
    auto g = kl_logit_gradient(q, logits);
    const double h = 1e-5;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            Matrix up = logits, down = logits;
            up(i, c) += h;
            down(i, c) -= h;
            double fd = (kl_of_logits(q, up) - kl_of_logits(q, down)) / (2 * h);
            CHECK(std::abs(fd - g(i, c)) <= 1e-6);
        }
    }
}

TEST_CASE("weighted contrastive loss with uniform probabilities scales every gate") {
    Rng rng(5);
    auto z1 = unit_rows(5, 3, rng);
    auto z2 = unit_rows(5, 3, rng);
    PartitionMatrix uniform(5, 4, 0.25);
    double weighted = weighted_contrastive_loss(z1, z2, uniform, 0.5);
    CHECK(weighted == doctest::Approx(contrastive_loss_constant_gate(z1, z2, 0.75, 0.5)).epsilon(1e-12));
    CHECK(std::abs(contrastive_loss_constant_gate(z1, z2, 1.0, 0.5) -
                   contrastive_oracle(z1, z2, nullptr, 1.0, 0.5)) <= 1e-9);
    CHECK(std::abs(weighted - contrastive_oracle(z1, z2, nullptr, 0.75, 0.5)) <= 1e-9);
}

TEST_CASE("weighted contrastive loss on a 2x2 instance matches a double loop") {
    const double r = std::sqrt(0.5);
    Matrix z1(2, 2, std::vector<double>{1, 0, r, r});
    Matrix z2(2, 2, std::vector<double>{r, r, 0, 1});
    PartitionMatrix p(2, 2);
    p(0, 0) = 0.7, p(0, 1) = 0.3;
    p(1, 0) = 0.2, p(1, 1) = 0.8;
    double v = weighted_contrastive_loss(z1, z2, p, 0.3);
    CHECK(std::abs(v - contrastive_oracle(z1, z2, &p, 0.0, 0.3)) <= 1e-9);
}

TEST_CASE("one-hot gates drop same-cluster terms") {
    Rng rng(6);
    auto z1 = unit_rows(4, 3, rng);
    auto z2 = unit_rows(4, 3, rng);
    std::vector<int> ids{0, 0, 1, 1};
    auto p = PartitionMatrix::one_hot(ids, 2);
    CHECK(std::abs(weighted_contrastive_loss(z1, z2, p, 1.0) - contrastive_oracle(z1, z2, &p, 0.0, 1.0)) <= 1e-9);

    std::vector<int> same{0, 0, 0, 0};
    auto all = PartitionMatrix::one_hot(same, 2);
    CHECK(std::isinf(weighted_contrastive_loss(z1, z2, all, 1.0)));
}

TEST_CASE("contrastive loss input checks") {
    Matrix bad(2, 2, std::vector<double>{1, 1, 0, 1});
    Matrix good(2, 2, std::vector<double>{1, 0, 0, 1});
    CHECK_THROWS_AS(contrastive_loss_constant_gate(bad, good, 1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(contrastive_loss_constant_gate(good, good, 1.0, 0.0), ConfigError);
}

TEST_CASE("standardizer") {
    DataMatrix x(4, 2, {1, 5, 3, 5, 5, 5, 7, 5});
    auto s = Standardizer::fit(x);
    CHECK(s.shift == std::vector<double>{4.0, 5.0});
    CHECK(s.scale[0] == doctest::Approx(std::sqrt(5.0)));
    CHECK(s.scale[1] == 1.0);
    auto u = s.apply(x);
    double mean = 0.0;
    for (std::size_t i = 0; i < 4; ++i) mean += u(i, 0);
    CHECK(std::abs(mean) <= 1e-15);
    CHECK(u(0, 1) == 0.0);
    CHECK(Standardizer{}.identity());
    CHECK(Standardizer{}.apply(x).matrix() == x.matrix());
}

TEST_CASE("online training recovers three separated blobs") {
    harness::BlobSpec spec;
    spec.k = 3;
    spec.n_per_cluster = 100;
    spec.d = 2;
    spec.spread = 10.0;
    spec.sigma = 0.1;
    auto [x, truth] = harness::make_blobs(spec);
    OnlineTrainConfig cfg;
    cfg.m = 1.03;
    cfg.batch_size = 60;
    cfg.epochs = 200;
    auto r = online_train(x, 3, cfg);
    CHECK(accuracy(truth, hard_labels(r.partition)) >= 0.95);
    CHECK(r.loss_trace.size() == 200);
    CHECK(validate_partition(r.partition).on_simplex());
}

TEST_CASE("zero learning rate leaves the classifier unchanged") {
    harness::BlobSpec spec;
    spec.n_per_cluster = 20;
    auto [x, truth] = harness::make_blobs(spec);
    OnlineTrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 3;
    cfg.batch_size = 10;
    auto start = LinearClassifier::random(3, 2, cfg.seed);
    auto targets = [&](const DataMatrix& b, std::span<const std::size_t>, const PartitionMatrix& p) {
        return opa_targets(batch_distances(b, cfg.distance), p, cfg.m);
    };
    auto r = train_self_labeling(x, start, cfg, targets);
    CHECK(r.classifier.weights == start.weights);
    CHECK(r.classifier.bias == start.bias);
}

TEST_CASE("online training is deterministic") {
    harness::BlobSpec spec;
    spec.n_per_cluster = 30;
    spec.sigma = 1.0;
    auto [x, truth] = harness::make_blobs(spec);
    OnlineTrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.seed = 9;
    auto a = online_train(x, 3, cfg);
    auto b = online_train(x, 3, cfg);
    CHECK(a.loss_trace == b.loss_trace);
    CHECK(a.classifier == b.classifier);
}

TEST_CASE("online training config checks") {
    DataMatrix x(4, 1, {0, 1, 2, 3});
    OnlineTrainConfig cfg;
    cfg.batch_size = 8;
    CHECK_THROWS_AS(online_train(x, 2, cfg), ConfigError);
    cfg.batch_size = 2;
    cfg.m = 1.0;
    CHECK_THROWS_AS(online_train(x, 2, cfg), ConfigError);
    cfg.m = 1.1;
    CHECK_THROWS_AS(online_train(x, 1, cfg), ConfigError);
}

}
