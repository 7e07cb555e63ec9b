#pragma once

#include "dyne/types.hpp"

#include <cstdint>
#include <vector>

namespace dyne {

/// Embedding rows with ground-truth class labels in [0, C). Every class must
/// appear at least once.
struct LabeledEmbedding {
    Mat y;
    std::vector<int> labels;

    static LabeledEmbedding make(Mat y, std::vector<int> labels);
    int classes() const;
};

struct ClusterMetrics {
    double acc = 0.0; // optimal cluster-to-class matching (Hungarian)
    double nmi = 0.0; // I(A;L) / sqrt(H(A) H(L)), natural logs
};

/// Best-of-restarts Lloyd's algorithm with k-means++ seeding; the restart
/// with the lowest within-cluster sum of squares wins. Deterministic per
/// seed. The objective is checked to be non-increasing every iteration.
std::vector<int> kmeans(const Mat& y, int clusters, int restarts = 10, std::uint64_t seed = 0);

/// Within-cluster sum of squares for a given assignment.
double kmeans_objective(const Mat& y, const std::vector<int>& assignments, int clusters);

ClusterMetrics clustering_metrics(const std::vector<int>& assignments,
                                  const std::vector<int>& labels);

struct ClassifierMetrics {
    double accuracy = 0.0;
    double micro_f1 = 0.0; // equals accuracy for single-label multiclass
    double macro_f1 = 0.0;
};

/// Multinomial logistic regression under stratified cross-validation:
/// full-batch gradient descent with backtracking line search, L2 penalty on
/// the weights, metrics averaged across folds.
ClassifierMetrics train_eval_classifier(const LabeledEmbedding& data, int folds = 10,
                                        std::uint64_t seed = 0, double l2 = 1e-4);

/// Mean cross-entropy of the softmax model plus 0.5 * l2 * ||W||^2 (bias row
/// excluded from the penalty). Fills grad when non-null. x is n x (p+1) with
/// the bias column appended; w is (p+1) x C. Exposed so tests can check the
/// analytic gradient against finite differences.
double softmax_loss(const Mat& x, const std::vector<int>& labels, const Mat& w, double l2,
                    Mat* grad = nullptr);

} // namespace dyne
