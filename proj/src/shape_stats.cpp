#include "ssm/shape_stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <random>

#include "ssm/errors.hpp"

namespace ssm {

Eigen::VectorXd mean_shape(const Eigen::MatrixXd& shape_matrix) {
    if (shape_matrix.rows() < 1) throw Error("mean_shape needs at least one row");
    return shape_matrix.colwise().mean();
}

PcaModel pca(const Eigen::MatrixXd& shape_matrix) {
    const auto n = shape_matrix.rows();
    if (n < 2) throw Error("pca needs at least 2 shapes");
    PcaModel model;
    model.mean = mean_shape(shape_matrix);
    Eigen::MatrixXd centered = shape_matrix.rowwise() - model.mean.transpose();
    Eigen::MatrixXd gram = centered * centered.transpose() / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);

    // Ascending from Eigen; total variance includes every dual eigenvalue.
    Eigen::VectorXd all = solver.eigenvalues().cwiseMax(0.0);
    model.total_variance = all.sum();

    double cutoff = all.size() > 0 ? 1e-12 * all(all.size() - 1) : 0.0;
    std::vector<int> kept;
    for (int k = static_cast<int>(all.size()) - 1; k >= 0; --k)
        if (all(k) > cutoff && all(k) > 0.0) kept.push_back(k);

    model.eigenvalues.resize(kept.size());
    model.modes.resize(shape_matrix.cols(), kept.size());
    for (std::size_t j = 0; j < kept.size(); ++j) {
        double lambda = all(kept[j]);
        model.eigenvalues(j) = lambda;
        // Primal eigenvector: Yᵀ u / sqrt((N−1)λ)
        Eigen::VectorXd mode = centered.transpose() * solver.eigenvectors().col(kept[j]);
        mode /= std::sqrt(static_cast<double>(n - 1) * lambda);
        model.modes.col(j) = mode;
    }

    model.cumulative_explained.resize(kept.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < kept.size(); ++j) {
        acc += model.eigenvalues(j);
        model.cumulative_explained[j] = model.total_variance > 0.0 ? acc / model.total_variance : 0.0;
    }
    return model;
}

Eigen::VectorXd mode_walk(const PcaModel& model, int mode_index, double std_devs) {
    if (mode_index < 0 || mode_index >= model.modes.cols())
        throw Error("mode index " + std::to_string(mode_index) + " out of range");
    return model.mean +
           std_devs * std::sqrt(model.eigenvalues(mode_index)) * model.modes.col(mode_index);
}

Eigen::VectorXd project_to_modes(const PcaModel& model, const Eigen::VectorXd& row) {
    return model.modes.transpose() * (row - model.mean);
}

GroupLabels resolve_groups(const std::vector<std::string>& labels, const std::string& group_a,
                           const std::string& group_b) {
    GroupLabels out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == group_a) out[i] = 0;
        else if (labels[i] == group_b) out[i] = 1;
        else throw ConfigError("label '" + labels[i] + "' is neither group '" + group_a +
                               "' nor '" + group_b + "'");
    }
    return out;
}

namespace {

std::pair<Eigen::VectorXd, Eigen::VectorXd> group_means(const Eigen::MatrixXd& matrix,
                                                        const GroupLabels& groups) {
    if (static_cast<Eigen::Index>(groups.size()) != matrix.rows())
        throw Error("label count does not match shape count");
    Eigen::VectorXd mean_a = Eigen::VectorXd::Zero(matrix.cols());
    Eigen::VectorXd mean_b = Eigen::VectorXd::Zero(matrix.cols());
    int na = 0, nb = 0;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        if (groups[i] == 0) {
            mean_a += matrix.row(i).transpose();
            ++na;
        } else {
            mean_b += matrix.row(i).transpose();
            ++nb;
        }
    }
    if (na == 0 || nb == 0) throw Error("both groups must be non-empty");
    return {mean_a / na, mean_b / nb};
}

}  // namespace

GroupDifference group_difference(const Eigen::MatrixXd& shape_matrix, const GroupLabels& groups) {
    auto [mean_a, mean_b] = group_means(shape_matrix, groups);
    GroupDifference diff;
    diff.mean_a = mean_a;
    diff.mean_b = mean_b;
    const auto particles = shape_matrix.cols() / 3;
    diff.difference_vectors.reserve(particles);
    diff.magnitudes.reserve(particles);
    for (Eigen::Index p = 0; p < particles; ++p) {
        Vec3 v{mean_b(3 * p) - mean_a(3 * p), mean_b(3 * p + 1) - mean_a(3 * p + 1),
               mean_b(3 * p + 2) - mean_a(3 * p + 2)};
        diff.difference_vectors.push_back(v);
        diff.magnitudes.push_back(norm(v));
    }
    return diff;
}

ScoreModel fit_score_model(const Eigen::MatrixXd& shape_matrix, const GroupLabels& groups) {
    auto [mean_a, mean_b] = group_means(shape_matrix, groups);
    Eigen::VectorXd delta = mean_b - mean_a;
    double length = delta.norm();
    if (length <= 0.0)
        throw NumericalError("group means coincide; the discrimination direction is undefined");
    ScoreModel model;
    model.midpoint = 0.5 * (mean_a + mean_b);
    model.direction = delta / length;
    model.scale = 2.0 / length;
    return model;
}

std::vector<double> shape_scores(const Eigen::MatrixXd& shape_matrix, const GroupLabels& groups) {
    ScoreModel model = fit_score_model(shape_matrix, groups);
    std::vector<double> scores(shape_matrix.rows());
    for (Eigen::Index i = 0; i < shape_matrix.rows(); ++i)
        scores[i] = model.score(shape_matrix.row(i).transpose());
    return scores;
}

bool t_test_one_sample(const std::vector<double>& samples, double population_mean,
                       double* t_statistic, double* p_value) {
    const auto n = samples.size();
    if (n < 2) throw Error("t test needs at least 2 samples");
    // All-equal detection must not go through sum/n, which can round away
    // from the common value and fabricate one-ulp variance.
    bool all_equal = true;
    for (double s : samples)
        if (s != samples[0]) all_equal = false;
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    double variance = ss / static_cast<double>(n - 1);
    if (all_equal || variance == 0.0) {
        if (t_statistic) *t_statistic = 0.0;
        if (p_value) *p_value = 1.0;
        return false;
    }
    double t = (mean - population_mean) / std::sqrt(variance / static_cast<double>(n));
    if (t_statistic) *t_statistic = t;
    if (p_value) {
        boost::math::students_t dist(static_cast<double>(n - 1));
        *p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return true;
}

namespace {

// Stable partial Fisher-Yates: the first `k` entries of a permutation of
// `pool`, identical on every platform for a given engine state.
std::vector<int> sample_without_replacement(std::vector<int> pool, int k, std::mt19937_64& rng) {
    for (int i = 0; i < k; ++i) {
        std::uint64_t span = pool.size() - i;
        std::uint64_t j = i + static_cast<std::uint64_t>(rng() % span);  // modulo bias irrelevant here
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace

std::vector<ImbalanceRow> imbalance_test(const Eigen::MatrixXd& shape_matrix,
                                         const GroupLabels& groups,
                                         const ImbalanceOptions& options) {
    if (options.trials < 2) throw Error("imbalance test needs at least 2 trials");
    const auto n = shape_matrix.rows();

    std::vector<int> members_a, members_b;
    for (Eigen::Index i = 0; i < n; ++i) (groups[i] == 0 ? members_a : members_b).push_back(i);
    if (members_a.empty() || members_b.empty()) throw Error("both groups must be non-empty");

    const bool a_is_larger = members_a.size() >= members_b.size();
    const auto& larger = a_is_larger ? members_a : members_b;
    const auto& smaller = a_is_larger ? members_b : members_a;
    if (options.subsample < 1 || options.subsample > static_cast<int>(larger.size()))
        throw Error("subsample must lie in [1, larger group size]");

    std::vector<double> full = shape_scores(shape_matrix, groups);

    // Trial score table: trials × shapes.
    std::vector<std::vector<double>> trial_scores(n);
    for (auto& v : trial_scores) v.reserve(options.trials);

    std::mt19937_64 rng(options.seed);
    for (int trial = 0; trial < options.trials; ++trial) {
        std::vector<int> chosen = sample_without_replacement(larger, options.subsample, rng);
        std::vector<int> rows = chosen;
        rows.insert(rows.end(), smaller.begin(), smaller.end());
        std::sort(rows.begin(), rows.end());

        Eigen::MatrixXd subset(rows.size(), shape_matrix.cols());
        GroupLabels subset_groups(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            subset.row(r) = shape_matrix.row(rows[r]);
            subset_groups[r] = groups[rows[r]];
        }
        ScoreModel model = fit_score_model(subset, subset_groups);
        for (Eigen::Index i = 0; i < n; ++i)
            trial_scores[i].push_back(model.score(shape_matrix.row(i).transpose()));
    }

    std::vector<ImbalanceRow> rows(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ImbalanceRow& row = rows[i];
        row.full_score = full[i];
        const auto& scores = trial_scores[i];
        bool has_t = t_test_one_sample(scores, row.full_score, &row.t_statistic, &row.p_value);
        if (!has_t) {
            row.exact_match = true;
            row.trial_mean = scores[0];
            row.trial_stddev = 0.0;
            row.t_statistic = 0.0;
            row.p_value = 1.0;
            row.below_alpha = false;
        } else {
            double mean = 0.0;
            for (double s : scores) mean += s;
            mean /= scores.size();
            double ss = 0.0;
            for (double s : scores) ss += (s - mean) * (s - mean);
            row.trial_mean = mean;
            row.trial_stddev = std::sqrt(ss / (scores.size() - 1));
            row.below_alpha = row.p_value < options.alpha;
        }
    }
    return rows;
}

}  // namespace ssm
