#include "dyne/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace dyne {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

int max_label(const std::vector<int>& v) {
    int m = -1;
    for (int x : v) {
        if (x < 0)
            throw Error("labels must be non-negative");
        m = std::max(m, x);
    }
    return m;
}

// Minimal-cost assignment of rows to columns on a square matrix
// (Kuhn-Munkres with potentials, O(m^3)). Returns the column of each row.
std::vector<int> hungarian_min(const Mat& cost) {
    const int m = static_cast<int>(cost.rows());
    std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= m; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j])
                    continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> rowToCol(m, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0)
            rowToCol[p[j] - 1] = j - 1;
    return rowToCol;
}

double entropy(const std::vector<double>& counts, double total) {
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0)
            h -= (c / total) * std::log(c / total);
    return h;
}

} // namespace

LabeledEmbedding LabeledEmbedding::make(Mat y, std::vector<int> labels) {
    if (static_cast<std::size_t>(y.rows()) != labels.size())
        throw Error("embedding rows and label count differ");
    if (labels.empty())
        throw Error("empty labeled embedding");
    const int c = max_label(labels) + 1;
    std::vector<long> count(c, 0);
    for (int l : labels)
        ++count[l];
    for (int i = 0; i < c; ++i)
        if (count[i] == 0)
            throw Error("class " + std::to_string(i) + " never appears");
    LabeledEmbedding out;
    out.y = std::move(y);
    out.labels = std::move(labels);
    return out;
}

int LabeledEmbedding::classes() const { return max_label(labels) + 1; }

double kmeans_objective(const Mat& y, const std::vector<int>& assignments, int clusters) {
    const Index n = y.rows();
    Mat centroid = Mat::Zero(clusters, y.cols());
    std::vector<long> size(clusters, 0);
    for (Index i = 0; i < n; ++i) {
        centroid.row(assignments[i]) += y.row(i);
        ++size[assignments[i]];
    }
    for (int c = 0; c < clusters; ++c)
        if (size[c] > 0)
            centroid.row(c) /= static_cast<double>(size[c]);
    double wcss = 0.0;
    for (Index i = 0; i < n; ++i)
        wcss += (y.row(i) - centroid.row(assignments[i])).squaredNorm();
    return wcss;
}

namespace {

struct LloydResult {
    std::vector<int> assignments;
    double wcss = std::numeric_limits<double>::infinity();
};

LloydResult lloyd_once(const Mat& y, int clusters, std::mt19937_64& rng) {
    const Index n = y.rows();
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // k-means++ seeding
    Mat centroid(clusters, y.cols());
    {
        std::vector<char> used(n, 0);
        const Index first = static_cast<Index>(unit(rng) * static_cast<double>(n)) % n;
        centroid.row(0) = y.row(first);
        used[first] = 1;
        Vec dist2(n);
        for (Index i = 0; i < n; ++i)
            dist2[i] = (y.row(i) - centroid.row(0)).squaredNorm();
        for (int c = 1; c < clusters; ++c) {
            const double total = dist2.sum();
            Index pick = -1;
            if (total > 0.0) {
                const double r = unit(rng) * total;
                double acc = 0.0;
                for (Index i = 0; i < n; ++i) {
                    acc += dist2[i];
                    if (acc >= r) {
                        pick = i;
                        break;
                    }
                }
                if (pick < 0)
                    pick = n - 1;
            } else {
                // all remaining mass is zero (duplicate points): take any unused
                for (Index i = 0; i < n; ++i)
                    if (!used[i]) {
                        pick = i;
                        break;
                    }
                if (pick < 0)
                    pick = static_cast<Index>(unit(rng) * static_cast<double>(n)) % n;
            }
            used[pick] = 1;
            centroid.row(c) = y.row(pick);
            for (Index i = 0; i < n; ++i)
                dist2[i] = std::min(dist2[i], (y.row(i) - centroid.row(c)).squaredNorm());
        }
    }

    std::vector<int> assign(n, 0);
    double prev = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        double wcss = 0.0;
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            double bestDist = std::numeric_limits<double>::infinity();
            for (int c = 0; c < clusters; ++c) {
                const double d = (y.row(i) - centroid.row(c)).squaredNorm();
                if (d < bestDist) {
                    bestDist = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
            wcss += bestDist;
        }
        if (wcss > prev * (1.0 + 1e-12) + 1e-12)
            throw NumericError("k-means objective increased");
        prev = wcss;

        std::vector<long> size(clusters, 0);
        Mat next = Mat::Zero(clusters, y.cols());
        for (Index i = 0; i < n; ++i) {
            next.row(assign[i]) += y.row(i);
            ++size[assign[i]];
        }
        for (int c = 0; c < clusters; ++c)
            if (size[c] > 0)
                next.row(c) /= static_cast<double>(size[c]);
        for (int c = 0; c < clusters; ++c) {
            if (size[c] > 0)
                continue;
            // relocate an empty centroid to the point farthest from its own;
            // the next assignment pass picks the membership up
            Index farthest = 0;
            double worst = -1.0;
            for (Index i = 0; i < n; ++i) {
                if (size[assign[i]] <= 1)
                    continue;
                const double d = (y.row(i) - next.row(assign[i])).squaredNorm();
                if (d > worst) {
                    worst = d;
                    farthest = i;
                }
            }
            next.row(c) = y.row(farthest);
        }
        centroid = next;
        if (!changed && iter > 0)
            break;
    }
    const double wcss = kmeans_objective(y, assign, clusters);
    return {std::move(assign), wcss};
}

} // namespace

std::vector<int> kmeans(const Mat& y, int clusters, int restarts, std::uint64_t seed) {
    const Index n = y.rows();
    if (clusters < 1)
        throw Error("cluster count must be positive");
    if (static_cast<Index>(clusters) > n)
        throw Error("cluster count exceeds point count");
    if (restarts < 1)
        throw Error("restarts must be positive");

    LloydResult best;
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r) * kGolden);
        LloydResult run = lloyd_once(y, clusters, rng);
        if (run.wcss < best.wcss)
            best = std::move(run);
    }
    return best.assignments;
}

ClusterMetrics clustering_metrics(const std::vector<int>& assignments,
                                  const std::vector<int>& labels) {
    if (assignments.size() != labels.size())
        throw Error("assignment and label lengths differ");
    if (assignments.empty())
        throw Error("empty input");
    const int ca = max_label(assignments) + 1;
    const int cl = max_label(labels) + 1;
    const int m = std::max(ca, cl);
    const double n = static_cast<double>(assignments.size());

    Mat confusion = Mat::Zero(m, m);
    for (std::size_t i = 0; i < assignments.size(); ++i)
        confusion(assignments[i], labels[i]) += 1.0;

    // ACC: maximize matched mass == minimize (max - counts)
    const double top = confusion.maxCoeff();
    Mat cost = Mat::Constant(m, m, top) - confusion;
    const std::vector<int> match = hungarian_min(cost);
    double matched = 0.0;
    for (int r = 0; r < m; ++r)
        if (match[r] >= 0)
            matched += confusion(r, match[r]);

    // NMI with sqrt normalization, natural logs
    std::vector<double> rowSum(m, 0.0), colSum(m, 0.0);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            rowSum[r] += confusion(r, c);
            colSum[c] += confusion(r, c);
        }
    const double ha = entropy(rowSum, n);
    const double hl = entropy(colSum, n);
    double mi = 0.0;
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            const double joint = confusion(r, c) / n;
            if (joint > 0.0)
                mi += joint * std::log(joint / ((rowSum[r] / n) * (colSum[c] / n)));
        }

    ClusterMetrics out;
    out.acc = matched / n;
    if (ha == 0.0 && hl == 0.0)
        out.nmi = 1.0; // both partitions constant: identical up to relabeling
    else if (ha == 0.0 || hl == 0.0)
        out.nmi = 0.0;
    else
        out.nmi = std::clamp(mi / std::sqrt(ha * hl), 0.0, 1.0);
    return out;
}

double softmax_loss(const Mat& x, const std::vector<int>& labels, const Mat& w, double l2,
                    Mat* grad) {
    const Index n = x.rows();
    const Index c = w.cols();
    Mat scores = x * w;
    const Vec rowMax = scores.rowwise().maxCoeff();
    scores.colwise() -= rowMax;
    Mat expScores = scores.array().exp();
    const Vec norm = expScores.rowwise().sum();

    double loss = 0.0;
    for (Index i = 0; i < n; ++i)
        loss -= scores(i, labels[i]) - std::log(norm[i]);
    loss /= static_cast<double>(n);

    // penalty excludes the bias row (last row of w)
    const Mat weights = w.topRows(w.rows() - 1);
    loss += 0.5 * l2 * weights.squaredNorm();

    if (grad) {
        Mat prob = expScores.array().colwise() / norm.array();
        for (Index i = 0; i < n; ++i)
            prob(i, labels[i]) -= 1.0;
        *grad = x.transpose() * prob / static_cast<double>(n);
        grad->topRows(w.rows() - 1) += l2 * weights;
    }
    (void)c;
    return loss;
}

namespace {

Mat train_softmax(const Mat& x, const std::vector<int>& labels, int classes, double l2) {
    Mat w = Mat::Zero(x.cols(), classes);
    Mat grad;
    double loss = softmax_loss(x, labels, w, l2, &grad);
    for (int iter = 0; iter < 1000; ++iter) {
        const double gnorm = grad.norm();
        if (gnorm <= 1e-7)
            break;
        // backtracking line search (Armijo)
        double step = 1.0;
        const double slope = -grad.squaredNorm();
        Mat next;
        double nextLoss;
        for (;;) {
            next = w - step * grad;
            nextLoss = softmax_loss(x, labels, next, l2, nullptr);
            if (nextLoss <= loss + 1e-4 * step * slope || step < 1e-12)
                break;
            step *= 0.5;
        }
        if (nextLoss >= loss)
            break;
        w = std::move(next);
        loss = softmax_loss(x, labels, w, l2, &grad);
    }
    return w;
}

struct FoldMetrics {
    double accuracy = 0.0, micro = 0.0, macro = 0.0;
};

FoldMetrics score_predictions(const std::vector<int>& predicted, const std::vector<int>& truth,
                              int classes) {
    const double n = static_cast<double>(predicted.size());
    std::vector<double> tp(classes, 0.0), fp(classes, 0.0), fn(classes, 0.0);
    double correct = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) {
            correct += 1.0;
            tp[predicted[i]] += 1.0;
        } else {
            fp[predicted[i]] += 1.0;
            fn[truth[i]] += 1.0;
        }
    }
    FoldMetrics m;
    m.accuracy = correct / n;

    double tpAll = 0.0, fpAll = 0.0, fnAll = 0.0;
    for (int c = 0; c < classes; ++c) {
        tpAll += tp[c];
        fpAll += fp[c];
        fnAll += fn[c];
    }
    m.micro = (2.0 * tpAll) / std::max(2.0 * tpAll + fpAll + fnAll, 1e-300);
    if (std::abs(m.micro - m.accuracy) > 1e-12)
        throw NumericError("micro-F1 must equal accuracy for single-label predictions");

    double macro = 0.0;
    for (int c = 0; c < classes; ++c) {
        const double denom = 2.0 * tp[c] + fp[c] + fn[c];
        macro += denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
    }
    m.macro = macro / static_cast<double>(classes);
    return m;
}

} // namespace

ClassifierMetrics train_eval_classifier(const LabeledEmbedding& data, int folds,
                                        std::uint64_t seed, double l2) {
    if (folds < 2)
        throw Error("folds must be >= 2");
    const int classes = data.classes();
    const Index n = data.y.rows();

    // stratified fold assignment: shuffle within class, deal round-robin
    std::vector<std::vector<Index>> byClass(classes);
    for (Index i = 0; i < n; ++i)
        byClass[data.labels[i]].push_back(i);
    for (int c = 0; c < classes; ++c)
        if (static_cast<int>(byClass[c].size()) < folds)
            throw Error("stratification: class " + std::to_string(c) + " has " +
                        std::to_string(byClass[c].size()) + " samples for " +
                        std::to_string(folds) + " folds");
    std::vector<int> fold(n, 0);
    std::mt19937_64 rng(seed);
    for (int c = 0; c < classes; ++c) {
        std::shuffle(byClass[c].begin(), byClass[c].end(), rng);
        for (std::size_t i = 0; i < byClass[c].size(); ++i)
            fold[byClass[c][i]] = static_cast<int>(i % folds);
    }

    Mat x(n, data.y.cols() + 1);
    x.leftCols(data.y.cols()) = data.y;
    x.col(data.y.cols()).setOnes();

    ClassifierMetrics out;
    for (int f = 0; f < folds; ++f) {
        std::vector<Index> trainIdx, testIdx;
        for (Index i = 0; i < n; ++i)
            (fold[i] == f ? testIdx : trainIdx).push_back(i);

        Mat xTrain(trainIdx.size(), x.cols());
        std::vector<int> yTrain(trainIdx.size());
        for (std::size_t i = 0; i < trainIdx.size(); ++i) {
            xTrain.row(i) = x.row(trainIdx[i]);
            yTrain[i] = data.labels[trainIdx[i]];
        }
        const Mat w = train_softmax(xTrain, yTrain, classes, l2);

        std::vector<int> predicted(testIdx.size()), truth(testIdx.size());
        for (std::size_t i = 0; i < testIdx.size(); ++i) {
            Index best;
            (x.row(testIdx[i]) * w).maxCoeff(&best);
            predicted[i] = static_cast<int>(best);
            truth[i] = data.labels[testIdx[i]];
        }
        const FoldMetrics m = score_predictions(predicted, truth, classes);
        out.accuracy += m.accuracy;
        out.micro_f1 += m.micro;
        out.macro_f1 += m.macro;
    }
    out.accuracy /= folds;
    out.micro_f1 /= folds;
    out.macro_f1 /= folds;
    return out;
}

} // namespace dyne
