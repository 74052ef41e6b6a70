// Population statistics over the optimized shape matrix (N subjects ×
// dM flattened particle coordinates): PCA modes of variation, group mean
// differences, calibrated shape-based scores, and a subsampling t-test
// that probes sensitivity to group-size imbalance.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ssm/vec3.hpp"

namespace ssm {

Eigen::VectorXd mean_shape(const Eigen::MatrixXd& shape_matrix);

struct PcaModel {
    Eigen::VectorXd mean;         // dM
    Eigen::MatrixXd modes;        // dM × K, orthonormal columns
    Eigen::VectorXd eigenvalues;  // K, descending, mm²
    std::vector<double> cumulative_explained;  // fractions of total variance
    double total_variance = 0.0;
};

/// Eigendecomposition of the sample covariance via the N×N dual; modes
/// with negligible variance (< 1e-12 of the leading one) are dropped, so
/// the retained modes span the data and reconstruction is exact.
PcaModel pca(const Eigen::MatrixXd& shape_matrix);

/// mean + std_devs · sqrt(λ_k) · mode_k
Eigen::VectorXd mode_walk(const PcaModel& model, int mode_index, double std_devs);

/// Coefficients of a row in the mode basis (for reconstruction tests).
Eigen::VectorXd project_to_modes(const PcaModel& model, const Eigen::VectorXd& row);

// Group labels: 0 selects group A (scored −1), 1 selects group B (+1).
using GroupLabels = std::vector<int>;

/// Map arbitrary string labels to {0,1} given the two group names.
GroupLabels resolve_groups(const std::vector<std::string>& labels, const std::string& group_a,
                           const std::string& group_b);

struct GroupDifference {
    Eigen::VectorXd mean_a;
    Eigen::VectorXd mean_b;
    std::vector<Vec3> difference_vectors;  // per particle, mean_b − mean_a
    std::vector<double> magnitudes;
};

GroupDifference group_difference(const Eigen::MatrixXd& shape_matrix, const GroupLabels& groups);

/// Linear discrimination along the group mean difference, affinely
/// calibrated so score(μ_a) = −1 and score(μ_b) = +1.
struct ScoreModel {
    Eigen::VectorXd midpoint;
    Eigen::VectorXd direction;  // unit vector μ_b − μ_a
    double scale = 0.0;         // 2 / ‖μ_b − μ_a‖

    double score(const Eigen::VectorXd& row) const {
        return (row - midpoint).dot(direction) * scale;
    }
};

/// Throws NumericalError when the group means coincide.
ScoreModel fit_score_model(const Eigen::MatrixXd& shape_matrix, const GroupLabels& groups);

std::vector<double> shape_scores(const Eigen::MatrixXd& shape_matrix, const GroupLabels& groups);

struct ImbalanceOptions {
    int trials = 1000;
    int subsample = 0;   // members drawn from the larger group per trial
    double alpha = 0.01;
    std::uint64_t seed = 0;
};

struct ImbalanceRow {
    double full_score = 0.0;  // score under the complete data
    double trial_mean = 0.0;
    double trial_stddev = 0.0;  // sample stddev over trials
    double t_statistic = 0.0;   // valid only when !exact_match
    double p_value = 1.0;       // two-sided
    bool below_alpha = false;
    bool exact_match = false;   // zero variance across trials
};

/// Per trial: draw `subsample` members of the larger group (plus the whole
/// smaller group), refit the score model, and score every shape. Each
/// shape's trial scores are then t-tested against its full-data score.
/// Deterministic for a fixed seed.
std::vector<ImbalanceRow> imbalance_test(const Eigen::MatrixXd& shape_matrix,
                                         const GroupLabels& groups,
                                         const ImbalanceOptions& options);

/// One-sample two-sided t-test against a fixed population mean.
/// Returns false (exact match) when the sample variance is zero.
bool t_test_one_sample(const std::vector<double>& samples, double population_mean,
                       double* t_statistic, double* p_value);

}  // namespace ssm
