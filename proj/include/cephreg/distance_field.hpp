#pragma once

#include <optional>
#include <vector>

#include "cephreg/mesh_model.hpp"
#include "cephreg/spatial_index.hpp"

namespace cephreg {

/// Integer-aligned lattice rectangle in pixel coordinates.
struct Lattice {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
};

/// Euclidean distance transform of a point set rasterized on a pixel lattice.
/// Every node records its nearest occupied node; the points rasterized to an
/// occupied node are kept, so queries refine to exact point distances.
class DistanceField2D {
public:
    /// Lattice covers the bounding box of `points` (united with `image`
    /// when given) grown by `margin_px`.
    static DistanceField2D build(const std::vector<Vec2>& points, double margin_px = 32.0,
                                 std::optional<Lattice> image = std::nullopt);

    const Lattice& lattice() const { return lattice_; }

    /// Distance stored at lattice node (i, j) (lattice-relative indices):
    /// distance from the node to the nearest rasterized site.
    double node_distance(int i, int j) const { return dist_[index(i, j)]; }
    /// Index of the point closest to node (i, j) among the points rasterized
    /// to its nearest occupied node.
    std::size_t node_site(int i, int j) const;

    /// Distance from `p` to the point set. On the lattice, the minimum exact
    /// distance to the points of the occupied nodes nearest to the 3x3 nodes
    /// around p; off the lattice, the exact R-tree query. Returns 0 on any
    /// input point.
    double query(const Vec2& p) const;

    /// Exact nearest distance (R-tree), used for reported values.
    double exact(const Vec2& p) const { return index_.distance(p); }

    bool contains(const Vec2& p) const;
    const std::vector<Vec2>& points() const { return index_.points(); }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(lattice_.width) + static_cast<std::size_t>(i);
    }

    Lattice lattice_;
    std::vector<double> dist_;
    std::vector<std::uint32_t> site_;        // nearest occupied node per node
    std::vector<std::uint32_t> cell_begin_;  // CSR offsets into cell_points_, per node
    std::vector<std::uint32_t> cell_points_;
    NearestNeighbor2D index_;
};

}  // namespace cephreg
