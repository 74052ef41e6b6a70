#include "ssm/align.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "ssm/closest_point.hpp"
#include "ssm/errors.hpp"

namespace ssm {

namespace {

Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }

RigidTransform from_eigen(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
    RigidTransform xf;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) xf.rotation[i][j] = r(i, j);
    xf.translation = {t.x(), t.y(), t.z()};
    return xf;
}

// Kabsch: rotation minimizing Σ‖R p_i − q_i‖² for centered pairs.
Eigen::Matrix3d procrustes_rotation(const Eigen::Matrix3d& cross_cov) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU(), v = svd.matrixV();
    Eigen::Matrix3d r = v * u.transpose();
    if (r.determinant() < 0.0) {
        v.col(2) *= -1.0;
        r = v * u.transpose();
    }
    return r;
}

}  // namespace

AlignResult rigid_align(const TriangleMesh& moving, const TriangleMesh& reference,
                        const AlignParams& params) {
    if (moving.vertices.empty() || reference.vertices.empty())
        throw Error("rigid_align requires non-empty meshes");

    AabbTree tree(reference);
    const Eigen::Vector3d mov_centroid = to_eigen(vertex_centroid(moving));
    const Eigen::Vector3d ref_centroid = to_eigen(vertex_centroid(reference));
    const int n = moving.vertex_count();

    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    auto translation_for = [&](const Eigen::Matrix3d& r) -> Eigen::Vector3d {
        return ref_centroid - r * mov_centroid;  // pin centroids together
    };

    AlignResult result;
    std::vector<double> dists(n);
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        Eigen::Vector3d t = translation_for(rot);
        Eigen::Vector3d src_center = rot * mov_centroid + t;  // equals ref_centroid by pinning
        std::vector<Eigen::Vector3d> src(n), dst(n);
        for (int i = 0; i < n; ++i) {
            Eigen::Vector3d p = rot * to_eigen(moving.vertices[i]) + t;
            auto hit = tree.closest({p.x(), p.y(), p.z()});
            src[i] = p;
            dst[i] = to_eigen(hit.point.position);
            dists[i] = hit.distance;
        }

        double dist_cap = std::numeric_limits<double>::infinity();
        if (params.rejection_multiple > 0.0) {
            std::vector<double> sorted = dists;
            std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
            double median = sorted[n / 2];
            if (median > 0.0) dist_cap = params.rejection_multiple * median;
        }

        // The translation is pinned to the vertex centroids, so the rotation
        // must be solved about those fixed centers (not the kept-pair means):
        // minimize Σ‖U (src_i − c_ref) − (dst_i − c_ref)‖² over rotations U.
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        int kept = 0;
        for (int i = 0; i < n; ++i) {
            if (dists[i] > dist_cap) continue;
            cov += (src[i] - src_center) * (dst[i] - ref_centroid).transpose();
            ++kept;
        }
        if (kept < 3) break;
        Eigen::Matrix3d update = procrustes_rotation(cov);
        rot = update * rot;

        result.iterations = iter + 1;
        double update_angle = std::acos(std::clamp((update.trace() - 1.0) / 2.0, -1.0, 1.0));
        if (update_angle < params.rotation_tolerance) {
            result.converged = true;
            break;
        }
    }

    Eigen::Vector3d t = translation_for(rot);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        Eigen::Vector3d p = rot * to_eigen(moving.vertices[i]) + t;
        total += tree.closest({p.x(), p.y(), p.z()}).distance;
    }
    result.mean_distance = total / n;
    result.transform = from_eigen(rot, t);
    return result;
}

}  // namespace ssm
