#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace oscdiff {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

double dot(Vec2 a, Vec2 b);
double norm(Vec2 a);

/// Zero-based cell index; (0,0) is the lower-left cell.
struct GridIndex {
    int i = 0;
    int j = 0;
    friend bool operator==(GridIndex, GridIndex) = default;
};

std::string to_string(GridIndex g);

/// Uniform cell-centered mesh of [-1,1]^2 with N cells per axis.
class Grid {
public:
    static constexpr double kLength = 2.0;

    explicit Grid(int n);

    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }

    double x(int i) const noexcept { return -0.5 * kLength + (i + 0.5) * h_; }
    double y(int j) const noexcept { return -0.5 * kLength + (j + 0.5) * h_; }
    Vec2 center(GridIndex g) const noexcept { return {x(g.i), y(g.j)}; }

    bool contains(GridIndex g) const noexcept {
        return g.i >= 0 && g.i < n_ && g.j >= 0 && g.j < n_;
    }
    std::size_t flat(GridIndex g) const noexcept {
        return static_cast<std::size_t>(g.j) * n_ + g.i;
    }

private:
    int n_;
    double h_;
};

/// Implicit obstacle description: positive inside the obstacle, negative outside.
class LevelSet {
public:
    virtual ~LevelSet() = default;

    virtual double value(Vec2 p) const = 0;
    /// Defaults to centered differences of value().
    virtual Vec2 gradient(Vec2 p) const;
    /// Closest point on the zero set, reached by repeated steps p -= phi grad/|grad|^2.
    virtual Vec2 project(Vec2 p) const;
};

/// phi(x,y) = R - |(x,y) - O|
class CircleLevelSet final : public LevelSet {
public:
    CircleLevelSet(double radius, Vec2 center = {});

    double radius() const noexcept { return radius_; }
    Vec2 center() const noexcept { return center_; }

    double value(Vec2 p) const override;
    Vec2 gradient(Vec2 p) const override;
    Vec2 project(Vec2 p) const override;

private:
    double radius_;
    Vec2 center_;
};

enum class PointClass : std::uint8_t { Inside, Ghost, Inactive };

class Classification {
public:
    static constexpr int kNotActive = -1;

    Classification(const Grid& grid, std::vector<PointClass> classes);

    PointClass at(GridIndex g) const { return classes_[flat(g)]; }
    int active_index(GridIndex g) const { return active_index_[flat(g)]; }
    bool is_active(GridIndex g) const { return active_index(g) != kNotActive; }

    /// Active points in index order (row-major, j outer).
    const std::vector<GridIndex>& active_points() const noexcept { return active_; }
    const std::vector<GridIndex>& ghosts() const noexcept { return ghosts_; }

    std::size_t n_inside() const noexcept { return n_inside_; }
    std::size_t n_ghost() const noexcept { return ghosts_.size(); }
    std::size_t n_inactive() const noexcept { return n_inactive_; }
    std::size_t n_active() const noexcept { return active_.size(); }
    int grid_n() const noexcept { return n_; }

private:
    std::size_t flat(GridIndex g) const {
        return static_cast<std::size_t>(g.j) * n_ + g.i;
    }

    int n_;
    std::vector<PointClass> classes_;
    std::vector<int> active_index_;
    std::vector<GridIndex> active_;
    std::vector<GridIndex> ghosts_;
    std::size_t n_inside_ = 0;
    std::size_t n_inactive_ = 0;
};

/// Obstacle points (phi > 0) with an Inside 4-neighbor become Ghost, the rest Inactive.
/// Points with phi == 0 count as fluid.
Classification classify(const Grid& grid, const LevelSet& ls);

struct GhostGeometry {
    GridIndex ghost;
    Vec2 boundary;  ///< projection B of the ghost onto the zero level
    Vec2 normal;    ///< unit normal pointing out of the fluid (into the obstacle)
    Vec2 tangent;   ///< (-n_y, n_x)
    int sx = 1;
    int sy = 1;
    double theta_x = 0.0;
    double theta_y = 0.0;
    /// 0 for a stencil starting at the ghost, -1 for one centered on it.
    int ox = 0;
    int oy = 0;
    /// stencil[mx + 3*my] = (i + sx*(mx + ox), j + sy*(my + oy))
    std::array<GridIndex, 9> stencil{};
};

/// How the nine-point stencil of a ghost is laid out along each axis.
///
/// `one_sided` always takes the ghost and the next two points towards the fluid.
/// `centered` instead takes the point behind the ghost, the ghost and the point in
/// front whenever theta < 1/2 and all nine points are active. In the second difference
/// along a centered axis the ghost carries -2/h^2 rather than +1/h^2.
enum class GhostStencil { one_sided, centered };

/// Throws ConfigurationError when the nine-point stencil leaves the grid
/// or touches an inactive point.
GhostGeometry ghost_geometry(const Grid& grid, const Classification& cls, const LevelSet& ls,
                             GridIndex ghost, GhostStencil layout = GhostStencil::one_sided);

std::vector<GhostGeometry> all_ghost_geometry(const Grid& grid, const Classification& cls,
                                              const LevelSet& ls,
                                              GhostStencil layout = GhostStencil::one_sided);

}  // namespace oscdiff
