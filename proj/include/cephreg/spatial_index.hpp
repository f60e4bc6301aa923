#pragma once

#include <memory>
#include <vector>

#include "cephreg/mesh_model.hpp"

namespace cephreg {

/// Exact nearest-neighbour queries over a fixed 2D point list (R-tree).
class NearestNeighbor2D {
public:
    struct Hit {
        std::size_t index = 0;
        double distance = 0.0;
    };

    NearestNeighbor2D();
    explicit NearestNeighbor2D(const std::vector<Vec2>& points);
    ~NearestNeighbor2D();
    NearestNeighbor2D(NearestNeighbor2D&&) noexcept;
    NearestNeighbor2D& operator=(NearestNeighbor2D&&) noexcept;
    NearestNeighbor2D(const NearestNeighbor2D&) = delete;
    NearestNeighbor2D& operator=(const NearestNeighbor2D&) = delete;

    /// Throws DataError when the index is empty.
    Hit nearest(const Vec2& query) const;
    double distance(const Vec2& query) const { return nearest(query).distance; }

    const std::vector<Vec2>& points() const { return points_; }
    bool empty() const { return points_.empty(); }

private:
    struct Impl;
    std::vector<Vec2> points_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace cephreg
