#include "ssm/entropy.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ssm/errors.hpp"
#include "ssm/kernels/gaussian.hpp"

namespace ssm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinSum = 1e-300;  // keeps log(S) finite when everything is truncated

struct NeighborArrays {
    std::vector<double> xs, ys, zs;
    int own_count = 0;  // leading entries belonging to the domain itself

    std::size_t size() const { return xs.size(); }
};

NeighborArrays gather_neighbors(const ShapePositions& shape, const InteractionPolicy& policy,
                                int domain) {
    NeighborArrays arrays;
    const auto& own = shape.domains[domain];
    arrays.own_count = static_cast<int>(own.size());
    std::size_t total = own.size();
    if (policy.couples(domain)) total += shape.domains[policy.contour_domain].size();
    arrays.xs.reserve(total);
    arrays.ys.reserve(total);
    arrays.zs.reserve(total);
    auto push = [&](const Vec3& p) {
        arrays.xs.push_back(p.x);
        arrays.ys.push_back(p.y);
        arrays.zs.push_back(p.z);
    };
    for (const Vec3& p : own) push(p);
    if (policy.couples(domain))
        for (const Vec3& p : shape.domains[policy.contour_domain]) push(p);
    return arrays;
}

double cutoff_sq_for(double sigma, double cutoff_multiple) {
    if (cutoff_multiple <= 0.0) return kInf;
    double r = cutoff_multiple * sigma;
    return r * r;
}

double log_normalizer(int neighbor_count, double sigma) {
    // log of 1/(M' (2π σ²)^{3/2})
    return -std::log(static_cast<double>(neighbor_count)) -
           1.5 * std::log(2.0 * std::numbers::pi * sigma * sigma);
}

}  // namespace

double kernel_density(const ShapePositions& shape, const InteractionPolicy& policy, int domain,
                      int i, double sigma, double cutoff_multiple) {
    if (sigma <= 0.0) throw Error("kernel bandwidth must be positive");
    NeighborArrays arrays = gather_neighbors(shape, policy, domain);
    const int others = static_cast<int>(arrays.size()) - 1;
    if (others < 1) throw Error("kernel density needs at least 2 particles in the interaction set");
    const Vec3 q = shape.domains[domain][i];
    auto sums = kernels::active().moment_sums(arrays.xs.data(), arrays.ys.data(), arrays.zs.data(),
                                              arrays.size(), i, q, 1.0 / (2.0 * sigma * sigma),
                                              cutoff_sq_for(sigma, cutoff_multiple));
    return std::exp(log_normalizer(others, sigma)) * sums.weight;
}

double sampling_entropy(const ShapePositions& shape, const InteractionPolicy& policy,
                        const SigmaSet& sigmas, double cutoff_multiple) {
    double total = 0.0;
    for (int domain = 0; domain < static_cast<int>(shape.domains.size()); ++domain) {
        NeighborArrays arrays = gather_neighbors(shape, policy, domain);
        const int own = arrays.own_count;
        const int others = static_cast<int>(arrays.size()) - 1;
        if (own == 0 || others < 1) continue;  // no density defined for this domain yet
        double sum_log_p = 0.0;
        for (int i = 0; i < own; ++i) {
            double sigma = sigmas[domain][i];
            const Vec3 q = shape.domains[domain][i];
            auto sums = kernels::active().moment_sums(
                arrays.xs.data(), arrays.ys.data(), arrays.zs.data(), arrays.size(), i, q,
                1.0 / (2.0 * sigma * sigma), cutoff_sq_for(sigma, cutoff_multiple));
            sum_log_p += log_normalizer(others, sigma) + std::log(std::max(sums.weight, kMinSum));
        }
        total += -sum_log_p / own;
    }
    return total;
}

std::vector<Vec3> sampling_gradients(const ShapePositions& shape, const InteractionPolicy& policy,
                                     int domain, const SigmaSet& sigmas, double cutoff_multiple) {
    NeighborArrays arrays = gather_neighbors(shape, policy, domain);
    const int own = arrays.own_count;
    std::vector<Vec3> grad(own);
    const int others = static_cast<int>(arrays.size()) - 1;
    if (own == 0 || others < 1) return grad;

    std::vector<double> gx(own, 0.0), gy(own, 0.0), gz(own, 0.0);
    const auto& backend = kernels::active();
    for (int i = 0; i < own; ++i) {
        double sigma = sigmas[domain][i];
        double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
        double cutoff_sq = cutoff_sq_for(sigma, cutoff_multiple);
        const Vec3 q = shape.domains[domain][i];
        auto sums = backend.moment_sums(arrays.xs.data(), arrays.ys.data(), arrays.zs.data(),
                                        arrays.size(), i, q, inv_two_sigma_sq, cutoff_sq);
        if (sums.weight <= kMinSum) continue;  // isolated particle: no sampling force
        double inv_sigma_sq_s = 1.0 / (sigma * sigma * sums.weight);
        grad[i] += inv_sigma_sq_s * sums.moment;
        // Cross terms: particle i appears in the density of every
        // same-domain particle; contour entries in the tail are excluded
        // on purpose (their updates ignore surface-domain forces).
        backend.scatter_force(arrays.xs.data(), arrays.ys.data(), arrays.zs.data(), own, i, q,
                              inv_two_sigma_sq, cutoff_sq, inv_sigma_sq_s, gx.data(), gy.data(),
                              gz.data());
    }
    double norm = -1.0 / own;
    for (int m = 0; m < own; ++m) {
        grad[m].x += gx[m];
        grad[m].y += gy[m];
        grad[m].z += gz[m];
        grad[m] *= norm;
    }
    return grad;
}

Vec3 sampling_gradient(const ShapePositions& shape, const InteractionPolicy& policy, int domain,
                       int i, const SigmaSet& sigmas, double cutoff_multiple) {
    return sampling_gradients(shape, policy, domain, sigmas, cutoff_multiple)[i];
}

double correspondence_entropy(const Eigen::MatrixXd& shape_matrix, double alpha) {
    const auto n = shape_matrix.rows();
    if (n < 2) throw Error("correspondence entropy needs at least 2 shapes");
    Eigen::MatrixXd centered = shape_matrix.rowwise() - shape_matrix.colwise().mean();
    Eigen::MatrixXd gram = centered * centered.transpose() / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    double entropy = 0.0;
    for (auto lambda : solver.eigenvalues()) {
        double shifted = lambda + alpha;
        if (shifted <= 0.0)
            throw NumericalError("regularized shape covariance is not positive definite "
                                 "(alpha too small)");
        entropy += std::log(shifted);
    }
    return 0.5 * entropy;
}

Eigen::MatrixXd correspondence_gradient(const Eigen::MatrixXd& shape_matrix, double alpha) {
    const auto n = shape_matrix.rows();
    if (n < 2) throw Error("correspondence gradient needs at least 2 shapes");
    Eigen::MatrixXd centered = shape_matrix.rowwise() - shape_matrix.colwise().mean();
    Eigen::MatrixXd gram = centered * centered.transpose() / static_cast<double>(n - 1);
    gram.diagonal().array() += alpha;
    Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
        throw NumericalError("regularized shape covariance factorization failed (alpha too small)");
    return solver.solve(centered) / static_cast<double>(n - 1);
}

}  // namespace ssm
