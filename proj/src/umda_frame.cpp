#include "cephreg/umda_frame.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cephreg::umda {

namespace {

Vec3 unit(const Vec3& v, const char* what) {
    const double n = v.norm();
    if (!(n > 1e-12) || !std::isfinite(n)) throw NumericalError(what);
    return v / n;
}

Vec2 unit(const Vec2& v, const char* what) {
    const double n = v.norm();
    if (!(n > 1e-12) || !std::isfinite(n)) throw NumericalError(what);
    return v / n;
}

// Flips `v` so that its largest-magnitude component is positive.
template <typename V>
V toward_positive_axes(V v) {
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    return v[idx] < 0.0 ? V(-v) : v;
}

// Sum of squared residuals of the least-squares fit along ~ c0 + c1*u + c2*u^2,
// relative to the total variance of `along`.
double parabola_residual(const std::vector<double>& u, const std::vector<double>& along) {
    const std::size_t n = u.size();
    Eigen::MatrixXd A(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        A(r, 0) = 1.0;
        A(r, 1) = u[i];
        A(r, 2) = u[i] * u[i];
        b(r) = along[i];
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    const double sse = (A * coef - b).squaredNorm();
    const double mean = b.mean();
    const double sst = (b.array() - mean).square().sum();
    return sst > 0.0 ? sse / sst : 0.0;
}

}  // namespace

void UmdaParams::validate() const {
    if (!(crown_percentile > 0.0 && crown_percentile <= 100.0)) {
        throw DataError("crown_percentile must be in (0, 100]");
    }
    if (!(molar_fraction > 0.0 && molar_fraction < 0.5)) {
        throw DataError("molar_fraction must be in (0, 0.5)");
    }
    if (!(occlusal_reference_direction.norm() > 0.0) || !occlusal_reference_direction.allFinite()) {
        throw DataError("occlusal reference direction must be nonzero");
    }
    if (vertical_orientation && !(vertical_orientation->norm() > 0.0)) {
        throw DataError("vertical orientation must be nonzero");
    }
}

UmdaParams default_params(Jaw jaw) {
    UmdaParams p;
    p.occlusal_reference_direction = jaw == Jaw::upper ? Vec3::UnitZ() : Vec3(-Vec3::UnitZ());
    p.vertical_orientation = Vec3::UnitZ();
    return p;
}

Vec3 centroid(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) throw DataError("empty mesh");
    Vec3 sum = Vec3::Zero();
    for (const auto& v : mesh.vertices) sum += v;
    return sum / static_cast<double>(mesh.vertices.size());
}

std::vector<std::size_t> crown_candidates(const TriangleMesh& mesh, const UmdaParams& params) {
    params.validate();
    if (mesh.vertices.empty()) throw DataError("empty mesh");
    if (mesh.normals.size() != mesh.vertices.size()) throw DataError("mesh lacks normals");
    const Vec3 ref = params.occlusal_reference_direction.normalized();
    std::vector<double> score(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) score[i] = mesh.normals[i].dot(ref);
    std::vector<std::size_t> order(mesh.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto n = mesh.size();
    std::size_t keep = static_cast<std::size_t>(std::ceil(params.crown_percentile / 100.0 * static_cast<double>(n)));
    keep = std::clamp<std::size_t>(keep, std::min<std::size_t>(3, n), n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return score[a] != score[b] ? score[a] > score[b] : a < b;
                      });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

Vec3 estimate_vertical_axis(const TriangleMesh& mesh, const UmdaParams& params) {
    const auto idx = crown_candidates(mesh, params);
    if (idx.size() < 3) throw NumericalError("crown region degenerate");
    Vec3 mean = Vec3::Zero();
    for (auto i : idx) mean += mesh.vertices[i];
    mean /= static_cast<double>(idx.size());
    Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
    for (auto i : idx) {
        const Vec3 d = mesh.vertices[i] - mean;
        C += d * d.transpose();
    }
    C /= static_cast<double>(idx.size());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(C);
    if (eig.info() != Eigen::Success) throw NumericalError("crown region degenerate");
    const Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
    if (!(lambda(2) > 0.0) || lambda(1) <= 1e-12 * lambda(2)) {
        throw NumericalError("crown region degenerate");
    }
    Vec3 Z = eig.eigenvectors().col(0).normalized();
    const Vec3 orient = params.vertical_orientation.value_or(params.occlusal_reference_direction);
    const double d = Z.dot(orient);
    if (d < 0.0) {
        Z = -Z;
    } else if (d == 0.0) {
        Z = toward_positive_axes(Z);
    }
    return Z;
}

Eigen::Matrix<double, 3, 2> plane_basis(const Vec3& Z) {
    const Vec3 z = Z.normalized();
    Eigen::Index idx = 0;
    z.cwiseAbs().minCoeff(&idx);
    Vec3 helper = Vec3::Zero();
    helper[idx] = 1.0;
    const Vec3 u1 = (helper - helper.dot(z) * z).normalized();
    const Vec3 u2 = z.cross(u1);
    Eigen::Matrix<double, 3, 2> U;
    U.col(0) = u1;
    U.col(1) = u2;
    return U;
}

ArchFit fit_arch_2d(const std::vector<Vec2>& points, double molar_fraction) {
    if (points.size() < 3) throw NumericalError("arch cloud rank-deficient");
    if (!(molar_fraction > 0.0 && molar_fraction < 0.5)) {
        throw DataError("molar_fraction must be in (0, 0.5)");
    }
    Vec2 mean = Vec2::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
    for (const auto& p : points) C += (p - mean) * (p - mean).transpose();
    C /= static_cast<double>(points.size());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(C);
    const Eigen::Vector2d lambda = eig.eigenvalues();
    if (eig.info() != Eigen::Success || !(lambda(1) > 0.0) || lambda(0) <= 1e-10 * lambda(1)) {
        throw NumericalError("arch cloud rank-deficient");
    }
    const Vec2 major = toward_positive_axes(Vec2(eig.eigenvectors().col(1)));
    const Vec2 minor = toward_positive_axes(Vec2(eig.eigenvectors().col(0)));

    // The lateral axis is the principal axis along which the arch reads as a
    // parabola (the other axis sees two arms at the same depth).
    auto coords = [&](const Vec2& axis) {
        std::vector<double> c(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) c[i] = (points[i] - mean).dot(axis);
        return c;
    };
    const auto along_major = coords(major);
    const auto along_minor = coords(minor);
    const bool major_is_lateral =
        parabola_residual(along_major, along_minor) <= parabola_residual(along_minor, along_major);
    const Vec2 depth = major_is_lateral ? minor : major;
    const auto& u = major_is_lateral ? along_major : along_minor;

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
    const std::size_t tail =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(molar_fraction * static_cast<double>(points.size()))));
    Vec2 left = Vec2::Zero();
    Vec2 right = Vec2::Zero();
    for (std::size_t i = 0; i < tail; ++i) {
        left += points[order[i]];
        right += points[order[points.size() - 1 - i]];
    }
    left /= static_cast<double>(tail);
    right /= static_cast<double>(tail);

    ArchFit fit;
    fit.molar_left = left;
    fit.molar_right = right;
    fit.baseline_b = unit(Vec2(right - left), "arch cloud rank-deficient");
    fit.midpoint_m = 0.5 * (left + right);

    // Incisal reference: farthest point from m on the side of the cloud mean.
    double side = (mean - fit.midpoint_m).dot(depth);
    if (side == 0.0) side = 1.0;
    double best = -1.0;
    fit.incisal_f = fit.midpoint_m;
    for (const auto& p : points) {
        if ((p - fit.midpoint_m).dot(depth) * side <= 0.0) continue;
        const double dist = (p - fit.midpoint_m).norm();
        if (dist > best) {
            best = dist;
            fit.incisal_f = p;
        }
    }
    if (best < 0.0) throw NumericalError("arch cloud has no anterior side");
    const Vec2 fm = fit.incisal_f - fit.midpoint_m;
    fit.x2d = unit(Vec2(fm - fm.dot(fit.baseline_b) * fit.baseline_b), "incisal point lies on the molar baseline");
    fit.plane_basis = Eigen::Matrix<double, 3, 2>::Zero();
    return fit;
}

ArchFit fit_arch(const TriangleMesh& mesh, const Vec3& Z, const UmdaParams& params) {
    const auto idx = crown_candidates(mesh, params);
    const auto U = plane_basis(Z);
    std::vector<Vec2> pts;
    pts.reserve(idx.size());
    for (auto i : idx) pts.emplace_back(U.transpose() * mesh.vertices[i]);
    ArchFit fit = fit_arch_2d(pts, params.molar_fraction);
    fit.plane_basis = U;
    return fit;
}

JawAxes jaw_axes(const TriangleMesh& mesh, const UmdaParams& params) {
    JawAxes axes;
    axes.Z = estimate_vertical_axis(mesh, params);
    const ArchFit fit = fit_arch(mesh, axes.Z, params);
    axes.X0 = unit(Vec3(fit.plane_basis * fit.x2d), "anterior axis degenerate");
    axes.Y0 = unit(axes.Z.cross(axes.X0), "lateral axis degenerate");
    axes.X0 = unit(axes.Y0.cross(axes.Z), "anterior axis degenerate");
    axes.origin = centroid(mesh);
    return axes;
}

SharedFrames shared_frame(const JawAxes& upper, const JawAxes& lower) {
    Vec3 y_lo = lower.Y0;
    if (upper.Y0.dot(y_lo) < 0.0) y_lo = -y_lo;
    const Vec3 sum = upper.Y0 + y_lo;
    if (!(sum.norm() > 1e-9)) throw NumericalError("irreconcilable lateral axes");
    const Vec3 Y = sum.normalized();

    auto build = [&](const JawAxes& axes) {
        if (std::abs(Y.dot(axes.Z)) > 0.999) throw NumericalError("irreconcilable lateral axes");
        AnatomicalFrame f;
        f.Y = Y;
        // Z is re-orthogonalized against the shared lateral axis so the frame
        // stays orthonormal with Y identical across jaws.
        f.Z = (axes.Z - axes.Z.dot(Y) * Y).normalized();
        f.X = Y.cross(f.Z).normalized();
        f.origin = axes.origin;
        return f;
    };
    SharedFrames out{build(upper), build(lower)};
    validate(out.upper);
    validate(out.lower);
    return out;
}

AnatomicalFrame single_jaw_frame(const JawAxes& axes) {
    AnatomicalFrame f;
    f.X = axes.X0;
    f.Y = axes.Y0;
    f.Z = axes.Z;
    f.origin = axes.origin;
    validate(f);
    return f;
}

AnatomicalFrame centroid_frame(const TriangleMesh& mesh) {
    AnatomicalFrame f;
    f.origin = centroid(mesh);
    return f;
}

TriangleMesh to_frame_coords(const TriangleMesh& mesh, const AnatomicalFrame& frame) {
    const Eigen::Matrix3d Rt = frame.rotation().transpose();
    TriangleMesh out = mesh;
    for (auto& v : out.vertices) v = Rt * (v - frame.origin);
    for (auto& n : out.normals) n = (Rt * n).normalized();
    return out;
}

TriangleMesh from_frame_coords(const TriangleMesh& mesh, const AnatomicalFrame& frame) {
    const Eigen::Matrix3d R = frame.rotation();
    TriangleMesh out = mesh;
    for (auto& v : out.vertices) v = R * v + frame.origin;
    for (auto& n : out.normals) n = (R * n).normalized();
    return out;
}

Eigen::Matrix3d projection_axes() {
    Eigen::Matrix3d P;
    P << 0.0, -1.0, 0.0,
         1.0, 0.0, 0.0,
         0.0, 0.0, 1.0;
    return P;
}

TriangleMesh to_projection_coords(const TriangleMesh& mesh, const AnatomicalFrame& frame) {
    const Eigen::Matrix3d M = projection_axes() * frame.rotation().transpose();
    TriangleMesh out = mesh;
    for (auto& v : out.vertices) v = M * (v - frame.origin);
    for (auto& n : out.normals) n = (M * n).normalized();
    return out;
}

Vec3 to_projection_coords(const Vec3& point, const AnatomicalFrame& frame) {
    return projection_axes() * (frame.rotation().transpose() * (point - frame.origin));
}

}  // namespace cephreg::umda
