#include "cephreg/registration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "random_util.hpp"

#include "cephreg/metrics.hpp"
#include "cephreg/spatial_index.hpp"

namespace cephreg::reg {

namespace {

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

Eigen::Matrix2d rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

Vec2 flip(const Vec2& p) { return {p.x(), -p.y()}; }

Vec2 mean_of(const std::vector<Vec2>& pts) {
    Vec2 sum = Vec2::Zero();
    for (const auto& p : pts) sum += p;
    return sum / static_cast<double>(pts.size());
}

// Search parameters: scale, rotation and the image G of the pivot, from
// which t = G - s R pivot.
using Params = std::array<double, 4>;

Params to_params(const SimilarityTransform2D& t, const Vec2& pivot) {
    const Vec2 g = t.s * rotation(t.theta) * pivot + Vec2(t.tx, t.ty);
    return {t.s, t.theta, g.x(), g.y()};
}

SimilarityTransform2D from_params(const Params& p, const Vec2& pivot) {
    SimilarityTransform2D t;
    t.s = p[0];
    t.theta = p[1];
    const Vec2 tr = Vec2(p[2], p[3]) - p[0] * rotation(p[1]) * pivot;
    t.tx = tr.x();
    t.ty = tr.y();
    return t;
}

// Box of the stage around the incumbent, in search parameters.
struct Box {
    Params lo;
    Params hi;

    Params at(const Params& x) const {
        Params p;
        for (int d = 0; d < 4; ++d) p[d] = lo[d] + x[d] * (hi[d] - lo[d]);
        return p;
    }
};

Box stage_box(const Params& inc, const StageSpec& st) {
    Box b;
    b.lo = {inc[0] * (1.0 + st.scale.lo), inc[1] + st.theta.lo, inc[2] + st.tx.lo, inc[3] + st.ty.lo};
    b.hi = {inc[0] * (1.0 + st.scale.hi), inc[1] + st.theta.hi, inc[2] + st.tx.hi, inc[3] + st.ty.hi};
    return b;
}

// Position of the incumbent in normalized [0,1]^4 coordinates.
Params incumbent_unit(const StageSpec& st) {
    auto frac = [](const ParamRange& r) { return -r.lo / r.width(); };
    return {frac(st.scale), frac(st.theta), frac(st.tx), frac(st.ty)};
}

double dist2(const Params& a, const Params& b) {
    double s = 0.0;
    for (int d = 0; d < 4; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return s;
}

void check_range(const ParamRange& r, const char* what) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.lo < r.hi)) {
        throw DataError(std::string("stage range for ") + what + " must satisfy lo < hi");
    }
    if (!(r.lo <= 0.0 && r.hi >= 0.0)) {
        throw DataError(std::string("stage range for ") + what + " must contain the incumbent (0)");
    }
}

bool within(const ParamRange& inner, const ParamRange& outer) {
    const double eps = 1e-12 * std::max(1.0, outer.width());
    return inner.lo >= outer.lo - eps && inner.hi <= outer.hi + eps;
}

}  // namespace

double wrap_angle(double theta) {
    double r = std::remainder(theta, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

Eigen::Matrix2d SimilarityTransform2D::linear() const {
    Eigen::Matrix2d f;
    f << 1.0, 0.0, 0.0, -1.0;
    return s * rotation(theta) * f;
}

Vec2 SimilarityTransform2D::apply(const Vec2& p) const { return s * (rotation(theta) * flip(p)) + Vec2(tx, ty); }

Vec2 SimilarityTransform2D::inverse_apply(const Vec2& q) const {
    return flip(rotation(theta).transpose() * (q - Vec2(tx, ty)) / s);
}

void SimilarityTransform2D::validate() const {
    if (!(s > 0.0) || !std::isfinite(s)) throw DataError("similarity scale must be positive");
    if (!std::isfinite(theta) || !std::isfinite(tx) || !std::isfinite(ty)) {
        throw DataError("similarity parameters must be finite");
    }
}

Vec2 apply_similarity(const SimilarityTransform2D& t, const Vec2& p) { return t.apply(p); }

PointSet2D apply_similarity(const SimilarityTransform2D& t, const PointSet2D& set) {
    PointSet2D out;
    out.label = set.label;
    out.kind = set.kind;
    out.points.reserve(set.points.size());
    for (const auto& p : set.points) out.points.push_back(t.apply(p));
    return out;
}

void StageSpec::validate() const {
    check_range(scale, "scale");
    check_range(theta, "theta");
    check_range(tx, "tx");
    check_range(ty, "ty");
    if (!(scale.lo > -1.0)) throw DataError("stage scale range must keep s > 0");
    if (iterations <= 0) throw DataError("stage iterations must be positive");
    if (samples_per_iter <= 0) throw DataError("stage samples_per_iter must be positive");
    if (!(min_step_fraction > 0.0 && min_step_fraction < 1.0)) {
        throw DataError("stage min_step_fraction must be in (0, 1)");
    }
    if (max_polls < 0) throw DataError("stage max_polls must be nonnegative");
}

void Schedule::validate() const {
    for (std::size_t i = 0; i < stages.size(); ++i) {
        stages[i].validate();
        if (i == 0) continue;
        const auto& a = stages[i - 1];
        const auto& b = stages[i];
        if (!within(b.scale, a.scale) || !within(b.theta, a.theta) || !within(b.tx, a.tx) || !within(b.ty, a.ty)) {
            throw DataError("stage '" + b.name + "' ranges must lie within the previous stage's ranges");
        }
    }
}

namespace {

StageSpec make_stage(std::string name, double scale, double theta_deg, double t_px, int iterations) {
    StageSpec s;
    s.name = std::move(name);
    s.scale = {-scale, scale};
    s.theta = {-deg(theta_deg), deg(theta_deg)};
    s.tx = {-t_px, t_px};
    s.ty = {-t_px, t_px};
    s.iterations = iterations;
    s.samples_per_iter = 64;
    return s;
}

}  // namespace

Schedule Schedule::three_stage(double diag) {
    Schedule s;
    s.stages.push_back(make_stage("coarse", 0.30, 15.0, 0.25 * diag, 40));
    s.stages.push_back(make_stage("fine", 0.10, 5.0, 0.05 * diag, 30));
    s.stages.push_back(make_stage("super_fine", 0.02, 1.0, 0.01 * diag, 20));
    return s;
}

Schedule Schedule::single_stage(double diag) {
    Schedule s;
    s.stages.push_back(make_stage("single", 0.30, 15.0, 0.25 * diag, 80));
    return s;
}

double chamfer_loss(const PointSet2D& a, const PointSet2D& b) {
    return metrics::directed_mean(a, b) + metrics::directed_mean(b, a);
}

double one_sided_loss(const PointSet2D& a, const PointSet2D& b) { return metrics::directed_mean(a, b); }

SimilarityTransform2D initialize(const PointSet2D& ios_silhouette, const PointSet2D& cr) {
    require_usable(ios_silhouette, "silhouette");
    require_usable(cr, "CR contour");
    std::vector<Vec2> flipped;
    flipped.reserve(ios_silhouette.size());
    for (const auto& p : ios_silhouette.points) flipped.push_back(flip(p));

    auto extent = [](const std::vector<Vec2>& pts) {
        Vec2 lo = pts.front(), hi = pts.front();
        for (const auto& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        return Vec2(hi - lo);
    };
    const Vec2 e_ios = extent(flipped);
    const Vec2 e_cr = extent(cr.points);
    constexpr double tiny = 1e-12;
    const bool ok_w = e_ios.x() > tiny && e_cr.x() > tiny;
    const bool ok_h = e_ios.y() > tiny && e_cr.y() > tiny;
    double s = 1.0;
    if (ok_w && ok_h) {
        s = 0.5 * (e_cr.x() / e_ios.x() + e_cr.y() / e_ios.y());
    } else if (ok_w) {
        s = e_cr.x() / e_ios.x();
    } else if (ok_h) {
        s = e_cr.y() / e_ios.y();
    }
    SimilarityTransform2D t;
    t.s = s;
    const Vec2 tr = mean_of(cr.points) - s * mean_of(flipped);
    t.tx = tr.x();
    t.ty = tr.y();
    return t;
}

Objective::Objective(const PointSet2D& cr, const PointSet2D& ios, LossKind kind, std::optional<Lattice> cr_image)
    : kind_(kind) {
    require_usable(cr, "CR contour");
    require_usable(ios, "silhouette");
    cr_field_ = DistanceField2D::build(cr.points, 32.0, cr_image);
    ios_field_ = DistanceField2D::build(ios.points, 32.0);
    Vec2 c = mean_of(ios.points);
    pivot_ = flip(c);
}

double Objective::approx(const SimilarityTransform2D& t) const {
    const auto& ios = ios_field_.points();
    double forward = 0.0;
    for (const auto& p : ios) forward += cr_field_.query(t.apply(p));
    forward /= static_cast<double>(ios.size());
    if (kind_ == LossKind::one_sided) return forward;
    const auto& cr = cr_field_.points();
    double backward = 0.0;
    for (const auto& q : cr) backward += ios_field_.query(t.inverse_apply(q));
    return forward + t.s * backward / static_cast<double>(cr.size());
}

double Objective::exact(const SimilarityTransform2D& t) const {
    const auto& ios = ios_field_.points();
    double forward = 0.0;
    for (const auto& p : ios) forward += cr_field_.exact(t.apply(p));
    forward /= static_cast<double>(ios.size());
    if (kind_ == LossKind::one_sided) return forward;
    const auto& cr = cr_field_.points();
    double backward = 0.0;
    for (const auto& q : cr) backward += ios_field_.exact(t.inverse_apply(q));
    return forward + t.s * backward / static_cast<double>(cr.size());
}

StageResult optimize_stage(const Objective& objective, const SimilarityTransform2D& incumbent, const StageSpec& stage,
                           std::uint64_t seed, std::size_t stage_index) {
    stage.validate();
    incumbent.validate();
    const Vec2& pivot = objective.pivot();
    const Box box = stage_box(to_params(incumbent, pivot), stage);
    const Params home = incumbent_unit(stage);

    std::size_t evaluations = 0;
    auto loss_at = [&](const Params& x) {
        ++evaluations;
        return objective.approx(from_params(box.at(x), pivot));
    };

    // Strictly lower loss wins; equal loss goes to the point nearer the
    // incumbent.
    Params best = home;
    double best_loss = loss_at(home);
    auto offer = [&](const Params& x, double loss) {
        if (loss < best_loss || (loss == best_loss && dist2(x, home) < dist2(best, home))) {
            best = x;
            best_loss = loss;
            return true;
        }
        return false;
    };

    std::mt19937_64 rng = detail::make_rng(seed, stage_index);
    for (int it = 0; it < stage.iterations; ++it) {
        for (int k = 0; k < stage.samples_per_iter; ++k) {
            Params x;
            for (auto& c : x) c = detail::uniform01(rng);
            offer(x, loss_at(x));
        }
    }

    // Compass search in normalized coordinates.
    double step = 0.25;
    for (int poll = 0; poll < stage.max_polls && step >= stage.min_step_fraction; ++poll) {
        const Params centre = best;
        bool moved = false;
        for (int d = 0; d < 4; ++d) {
            for (double sign : {-1.0, 1.0}) {
                Params x = centre;
                x[d] = std::clamp(x[d] + sign * step, 0.0, 1.0);
                if (x[d] == centre[d]) continue;
                moved |= offer(x, loss_at(x));
            }
        }
        if (!moved) step *= 0.5;
    }

    SimilarityTransform2D found = from_params(box.at(best), pivot);
    found.theta = wrap_angle(found.theta);
    StageResult r;
    r.stage = stage.name;
    r.evaluations = evaluations;
    const double found_exact = objective.exact(found);
    const double incumbent_exact = objective.exact(incumbent);
    if (found_exact <= incumbent_exact) {
        r.transform = found;
        r.loss = found_exact;
    } else {
        r.transform = incumbent;
        r.loss = incumbent_exact;
    }
    return r;
}

RegistrationResult register_silhouette(const PointSet2D& cr, const PointSet2D& ios, const RegistrationOptions& options) {
    options.schedule.validate();
    const Objective objective(cr, ios, options.loss, options.cr_image);
    RegistrationResult result;
    result.initial = initialize(ios, cr);
    result.initial_loss = objective.exact(result.initial);
    result.transform = result.initial;
    result.final_loss = result.initial_loss;
    for (std::size_t i = 0; i < options.schedule.stages.size(); ++i) {
        StageResult r = optimize_stage(objective, result.transform, options.schedule.stages[i], options.seed, i);
        result.transform = r.transform;
        result.final_loss = r.loss;
        result.trace.push_back(std::move(r));
    }
    return result;
}

}  // namespace cephreg::reg
