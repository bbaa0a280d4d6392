#ifndef PROBAGG_OPA_HPP
#define PROBAGG_OPA_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "probagg/core.hpp"
#include "probagg/geometry.hpp"

namespace probagg {

/// B x K target codes; rows on the simplex.
class BatchCodes {
public:
    BatchCodes() = default;
    explicit BatchCodes(PartitionMatrix q) : q_(std::move(q)) {}

    std::size_t b() const noexcept { return q_.n(); }
    std::size_t k() const noexcept { return q_.k(); }
    double operator()(std::size_t i, std::size_t c) const noexcept { return q_(i, c); }
    std::span<const double> row(std::size_t i) const noexcept { return q_.row(i); }
    const PartitionMatrix& matrix() const noexcept { return q_; }

private:
    PartitionMatrix q_;
};

/// Per-feature affine input map (x - shift) / scale. Empty vectors mean identity.
struct Standardizer {
    std::vector<double> shift;
    std::vector<double> scale;

    /// Mean and population standard deviation per feature; constant features keep scale 1.
    static Standardizer fit(const DataMatrix& x);
    bool identity() const noexcept { return shift.empty(); }
    DataMatrix apply(const DataMatrix& x) const;
    bool operator==(const Standardizer&) const = default;
};

/// Softmax of an affine map, p = softmax(W u + b) with u = input.apply(x). Weights are K x D.
struct LinearClassifier {
    Matrix weights;
    std::vector<double> bias;
    Standardizer input;

    std::size_t k() const noexcept { return weights.rows(); }
    std::size_t d() const noexcept { return weights.cols(); }

    /// Small seeded Gaussian weights (scale 0.01) and zero bias.
    static LinearClassifier random(std::size_t k, std::size_t d, std::uint64_t seed);

    Matrix logits(const DataMatrix& x) const;
    PartitionMatrix predict_proba(const DataMatrix& x) const;
    /// Logits for inputs that are already in the standardized space.
    Matrix logits_standardized(const DataMatrix& u) const;
    bool operator==(const LinearClassifier&) const = default;
};

/// Row-wise max-subtracted softmax.
PartitionMatrix softmax_rows(const Matrix& logits);

struct OnlineTrainConfig {
    double m = 1.03;
    std::size_t epochs = 200;
    std::size_t batch_size = 60;
    double learning_rate = 0.5;
    std::uint64_t seed = 0;
    bool shuffle = true;
    double score_floor = 1e-12;
    DistanceKind distance = DistanceKind::SquaredEuclidean;
    // Z-score features before training; the classifier keeps the map in `input`.
    bool standardize = true;

    void validate(std::size_t n) const;
};

/// Q = row-normalized (D * P_hat)^(-1/(m-1)). P_hat is treated as a constant.
BatchCodes opa_targets(const DistanceMatrix& d_batch, const PartitionMatrix& p_hat, double m,
                       double score_floor = 1e-12);

inline constexpr double kProbabilityClamp = 1e-12;

/// Mean over rows of sum_k q log(q / p_hat), with 0 log 0 = 0 and p_hat clamped at 1e-12.
double kl_loss(const BatchCodes& q, const PartitionMatrix& p_hat);

/// d kl_loss(q, softmax(logits)) / d logits = (softmax(logits) - q) / B.
Matrix kl_logit_gradient(const BatchCodes& q, const Matrix& logits);

/// Contrastive loss with negatives gated by w(i,j) = 1 - <p_i, p_j>:
///   -sum_i log( e(z1_i.z2_i) / [ sum_{j != i} w_ij e(z1_i.z1_j) + sum_j w_ij e(z1_i.z2_j) ] ),
/// with e(a) = exp(a / tau). The second sum includes j = i with gate 1 - |p_i|^2. Evaluated with
/// max-subtraction. A row whose gated denominator is zero contributes +infinity.
/// Rows of z1 and z2 must be unit-norm within 1e-6.
double weighted_contrastive_loss(const Matrix& z1, const Matrix& z2, const PartitionMatrix& p_hat, double tau);

/// The same loss with every gate replaced by `gate` (1 gives the standard ungated form).
double contrastive_loss_constant_gate(const Matrix& z1, const Matrix& z2, double gate, double tau);

/// Where the per-batch targets come from during online training.
/// Arguments: batch features (standardized when enabled), batch sample indices, current batch
/// probabilities.
using TargetProvider =
    std::function<BatchCodes(const DataMatrix&, std::span<const std::size_t>, const PartitionMatrix&)>;

struct OnlineTrainResult {
    LinearClassifier classifier;
    PartitionMatrix partition;        // classifier probabilities on the full data after training
    std::vector<double> loss_trace;   // mean batch loss per epoch
};

/// Per-epoch callbacks, given the 1-based epoch and the classifier at that point.
struct TrainHooks {
    std::function<void(std::size_t, const LinearClassifier&)> before_epoch;
    std::function<void(std::size_t, const LinearClassifier&)> after_epoch;
};

/// Mini-batch self-labeling with an identity encoder: per batch, forward softmax, compute OPA
/// targets from the batch distances and current probabilities, and take one plain gradient
/// step on the KL loss. Distances are measured in the space the classifier sees (standardized
/// by default). Throws SolverError if the loss becomes non-finite.
OnlineTrainResult online_train(const DataMatrix& x, std::size_t k, const OnlineTrainConfig& cfg);

/// Same loop with pluggable targets and an optional starting classifier.
OnlineTrainResult train_self_labeling(const DataMatrix& x, LinearClassifier classifier,
                                      const OnlineTrainConfig& cfg, const TargetProvider& targets,
                                      const TrainHooks& hooks = {});

}  // namespace probagg

#endif  // PROBAGG_OPA_HPP
