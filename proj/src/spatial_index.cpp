#include "cephreg/spatial_index.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>

#include <iterator>

namespace cephreg {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

struct NearestNeighbor2D::Impl {
    using Point = bg::model::point<double, 2, bg::cs::cartesian>;
    using Value = std::pair<Point, std::size_t>;
    bgi::rtree<Value, bgi::rstar<16>> tree;

    explicit Impl(const std::vector<Vec2>& pts) : tree(make_values(pts)) {}

    static std::vector<Value> make_values(const std::vector<Vec2>& pts) {
        std::vector<Value> values;
        values.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) values.emplace_back(Point(pts[i].x(), pts[i].y()), i);
        return values;
    }
};

NearestNeighbor2D::NearestNeighbor2D() = default;

NearestNeighbor2D::NearestNeighbor2D(const std::vector<Vec2>& points)
    : points_(points), impl_(points.empty() ? nullptr : std::make_unique<Impl>(points)) {}

NearestNeighbor2D::~NearestNeighbor2D() = default;
NearestNeighbor2D::NearestNeighbor2D(NearestNeighbor2D&&) noexcept = default;
NearestNeighbor2D& NearestNeighbor2D::operator=(NearestNeighbor2D&&) noexcept = default;

NearestNeighbor2D::Hit NearestNeighbor2D::nearest(const Vec2& query) const {
    if (!impl_) throw DataError("nearest-neighbour query on an empty point set");
    Impl::Value found;
    impl_->tree.query(bgi::nearest(Impl::Point(query.x(), query.y()), 1), &found);
    const std::size_t idx = found.second;
    return {idx, (points_[idx] - query).norm()};
}

}  // namespace cephreg
