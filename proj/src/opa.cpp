#include "probagg/opa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "probagg/pac.hpp"

namespace probagg {

namespace {

void check_unit_rows(const Matrix& z, const char* name) {
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double s = 0.0;
        for (double v : z.row(i)) s += v * v;
        if (std::abs(std::sqrt(s) - 1.0) > 1e-6) {
            throw ConfigError(std::string("weighted_contrastive_loss: row ") + std::to_string(i) + " of " + name +
                              " is not unit-norm");
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) s += a[f] * b[f];
    return s;
}

// -sum_i log(num_i / den_i) given a gate function; shared by the gated and constant-gate forms.
template <typename Gate>
double contrastive_sum(const Matrix& z1, const Matrix& z2, double tau, Gate gate) {
    if (!(tau > 0.0)) throw ConfigError("contrastive loss: tau must be positive");
    if (z1.rows() != z2.rows() || z1.cols() != z2.cols()) throw ConfigError("contrastive loss: view shapes differ");
    check_unit_rows(z1, "z1");
    check_unit_rows(z2, "z2");
    const std::size_t b = z1.rows();
    std::vector<double> weights, args;
    weights.reserve(2 * b);
    args.reserve(2 * b);
    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        weights.clear();
        args.clear();
        for (std::size_t j = 0; j < b; ++j) {
            double w = gate(i, j);
            if (j != i) {
                weights.push_back(w);
                args.push_back(dot(z1.row(i), z1.row(j)) / tau);
            }
            weights.push_back(w);
            args.push_back(dot(z1.row(i), z2.row(j)) / tau);
        }
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < args.size(); ++t) {
            if (weights[t] > 0.0) top = std::max(top, args[t]);
        }
        if (!std::isfinite(top)) return std::numeric_limits<double>::infinity();
        double acc = 0.0;
        for (std::size_t t = 0; t < args.size(); ++t) {
            if (weights[t] > 0.0) acc += weights[t] * std::exp(args[t] - top);
        }
        double log_den = top + std::log(acc);
        double log_num = dot(z1.row(i), z2.row(i)) / tau;
        total -= log_num - log_den;
    }
    return total;
}

}  // namespace

Standardizer Standardizer::fit(const DataMatrix& x) {
    Standardizer st{std::vector<double>(x.d(), 0.0), std::vector<double>(x.d(), 1.0)};
    const double n = static_cast<double>(x.n());
    for (std::size_t f = 0; f < x.d(); ++f) {
        double mean = 0.0;
        for (std::size_t i = 0; i < x.n(); ++i) mean += x(i, f);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < x.n(); ++i) var += (x(i, f) - mean) * (x(i, f) - mean);
        double sd = std::sqrt(var / n);
        st.shift[f] = mean;
        st.scale[f] = sd > 0.0 ? sd : 1.0;
    }
    return st;
}

DataMatrix Standardizer::apply(const DataMatrix& x) const {
    if (identity()) return x;
    if (shift.size() != x.d()) throw ConfigError("standardizer: feature dimension mismatch");
    Matrix out = x.matrix();
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        for (std::size_t f = 0; f < r.size(); ++f) r[f] = (r[f] - shift[f]) / scale[f];
    }
    return DataMatrix(std::move(out));
}

LinearClassifier LinearClassifier::random(std::size_t k, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    LinearClassifier h{Matrix(k, d), std::vector<double>(k, 0.0), {}};
    for (double& w : h.weights.values()) w = 0.01 * rng.normal();
    return h;
}

Matrix LinearClassifier::logits(const DataMatrix& x) const { return logits_standardized(input.apply(x)); }

Matrix LinearClassifier::logits_standardized(const DataMatrix& x) const {
    if (x.d() != d()) throw ConfigError("classifier: feature dimension mismatch");
    Matrix out(x.n(), k());
    for (std::size_t i = 0; i < x.n(); ++i) {
        auto xi = x.row(i);
        for (std::size_t c = 0; c < k(); ++c) out(i, c) = bias[c] + dot(weights.row(c), xi);
    }
    return out;
}

PartitionMatrix LinearClassifier::predict_proba(const DataMatrix& x) const { return softmax_rows(logits(x)); }

PartitionMatrix softmax_rows(const Matrix& logits) {
    PartitionMatrix p(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto in = logits.row(i);
        auto out = p.row(i);
        double top = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            out[c] = std::exp(in[c] - top);
            sum += out[c];
        }
        for (double& v : out) v /= sum;
    }
    return p;
}

void OnlineTrainConfig::validate(std::size_t n) const {
    if (!(m > 1.0)) throw ConfigError("online training: m must be > 1");
    if (batch_size < 2) throw ConfigError("online training: batch_size must be at least 2");
    if (batch_size > n) throw ConfigError("online training: batch_size exceeds the sample count");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("online training: learning_rate must be a finite value >= 0");
    }
    if (epochs < 1) throw ConfigError("online training: epochs must be at least 1");
    if (!(score_floor > 0.0)) throw ConfigError("online training: score_floor must be positive");
}

BatchCodes opa_targets(const DistanceMatrix& d_batch, const PartitionMatrix& p_hat, double m, double score_floor) {
    if (!(m > 1.0)) throw ConfigError("opa_targets: m must be > 1");
    ScoreMatrix s = compute_scores(p_hat, d_batch);
    PartitionMatrix q(p_hat.n(), p_hat.k());
    for (std::size_t i = 0; i < q.n(); ++i) update_row(s.row(i), m, score_floor, q.row(i));
    return BatchCodes(std::move(q));
}

double kl_loss(const BatchCodes& q, const PartitionMatrix& p_hat) {
    if (q.b() != p_hat.n() || q.k() != p_hat.k()) throw ConfigError("kl_loss: shape mismatch");
    if (q.b() == 0) throw ConfigError("kl_loss: empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < q.b(); ++i) {
        for (std::size_t c = 0; c < q.k(); ++c) {
            double qv = q(i, c);
            if (qv <= 0.0) continue;
            total += qv * (std::log(qv) - std::log(std::max(p_hat(i, c), kProbabilityClamp)));
        }
    }
    return std::max(0.0, total / static_cast<double>(q.b()));
}

Matrix kl_logit_gradient(const BatchCodes& q, const Matrix& logits) {
    if (q.b() != logits.rows() || q.k() != logits.cols()) throw ConfigError("kl_logit_gradient: shape mismatch");
    PartitionMatrix p = softmax_rows(logits);
    Matrix g(q.b(), q.k());
    const double inv_b = 1.0 / static_cast<double>(q.b());
    for (std::size_t i = 0; i < q.b(); ++i) {
        for (std::size_t c = 0; c < q.k(); ++c) g(i, c) = (p(i, c) - q(i, c)) * inv_b;
    }
    return g;
}

double weighted_contrastive_loss(const Matrix& z1, const Matrix& z2, const PartitionMatrix& p_hat, double tau) {
    if (p_hat.n() != z1.rows()) throw ConfigError("weighted_contrastive_loss: partition rows differ from batch");
    return contrastive_sum(z1, z2, tau, [&](std::size_t i, std::size_t j) {
        return std::max(0.0, 1.0 - dot(p_hat.row(i), p_hat.row(j)));
    });
}

double contrastive_loss_constant_gate(const Matrix& z1, const Matrix& z2, double gate, double tau) {
    return contrastive_sum(z1, z2, tau, [gate](std::size_t, std::size_t) { return gate; });
}

OnlineTrainResult train_self_labeling(const DataMatrix& x, LinearClassifier classifier, const OnlineTrainConfig& cfg,
                                      const TargetProvider& targets, const TrainHooks& hooks) {
    cfg.validate(x.n());
    if (classifier.d() != x.d() || classifier.bias.size() != classifier.k()) {
        throw ConfigError("online training: classifier shape does not match the data");
    }
    if (cfg.standardize) classifier.input = Standardizer::fit(x);
    const DataMatrix u = classifier.input.apply(x);
    const std::size_t n = x.n(), d = x.d(), k = classifier.k();
    Rng rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    OnlineTrainResult result;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (hooks.before_epoch) hooks.before_epoch(epoch, classifier);
        if (cfg.shuffle) rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            // A trailing batch of one sample has no pairwise distances; it is skipped.
            if (stop - start < 2) break;
            std::span<const std::size_t> idx(order.data() + start, stop - start);
            DataMatrix xb = u.select_rows(idx);
            Matrix logits = classifier.logits_standardized(xb);
            PartitionMatrix probs = softmax_rows(logits);
            BatchCodes q = targets(xb, idx, probs);
            double loss = kl_loss(q, probs);
            if (!std::isfinite(loss)) {
                throw SolverError("online training diverged at epoch " + std::to_string(epoch));
            }
            loss_sum += loss;
            ++batches;
            Matrix g = kl_logit_gradient(q, logits);
            for (std::size_t c = 0; c < k; ++c) {
                auto wc = classifier.weights.row(c);
                double gb = 0.0;
                for (std::size_t r = 0; r < xb.n(); ++r) {
                    const double grc = g(r, c);
                    gb += grc;
                    auto xr = xb.row(r);
                    for (std::size_t f = 0; f < d; ++f) wc[f] -= cfg.learning_rate * grc * xr[f];
                }
                classifier.bias[c] -= cfg.learning_rate * gb;
            }
        }
        double mean_loss = loss_sum / static_cast<double>(std::max<std::size_t>(batches, 1));
        for (double w : classifier.weights.values()) {
            if (!std::isfinite(w)) throw SolverError("online training diverged: non-finite weights");
        }
        result.loss_trace.push_back(mean_loss);
        if (hooks.after_epoch) hooks.after_epoch(epoch, classifier);
    }
    result.partition = classifier.predict_proba(x);
    result.classifier = std::move(classifier);
    return result;
}

OnlineTrainResult online_train(const DataMatrix& x, std::size_t k, const OnlineTrainConfig& cfg) {
    if (k < 2) throw ConfigError("online training: k must be at least 2");
    cfg.validate(x.n());
    auto targets = [&cfg](const DataMatrix& xb, std::span<const std::size_t>, const PartitionMatrix& probs) {
        return opa_targets(batch_distances(xb, cfg.distance), probs, cfg.m, cfg.score_floor);
    };
    return train_self_labeling(x, LinearClassifier::random(k, x.d(), cfg.seed), cfg, targets);
}

}  // namespace probagg
