#include "oscdiff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oscdiff/errors.hpp"

namespace oscdiff {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }

std::string to_string(GridIndex g) {
    std::ostringstream os;
    os << '(' << g.i << ',' << g.j << ')';
    return os.str();
}

Grid::Grid(int n) : n_(n), h_(kLength / n) {
    if (n < 4) {
        throw ConfigurationError("grid needs at least 4 cells per axis, got " + std::to_string(n));
    }
}

Vec2 LevelSet::gradient(Vec2 p) const {
    constexpr double step = 1e-6;
    return {(value({p.x + step, p.y}) - value({p.x - step, p.y})) / (2 * step),
            (value({p.x, p.y + step}) - value({p.x, p.y - step})) / (2 * step)};
}

Vec2 LevelSet::project(Vec2 p) const {
    Vec2 q = p;
    for (int it = 0; it < 50; ++it) {
        const double phi = value(q);
        if (std::abs(phi) <= 1e-14) break;
        const Vec2 g = gradient(q);
        const double g2 = dot(g, g);
        if (g2 == 0.0) throw ConfigurationError("level set gradient vanishes during projection");
        q = q - (phi / g2) * g;
    }
    return q;
}

CircleLevelSet::CircleLevelSet(double radius, Vec2 center) : radius_(radius), center_(center) {
    if (!(radius >= 0.0)) throw ConfigurationError("circle radius must be non-negative");
}

double CircleLevelSet::value(Vec2 p) const { return radius_ - norm(p - center_); }

Vec2 CircleLevelSet::gradient(Vec2 p) const {
    const Vec2 d = p - center_;
    const double r = norm(d);
    if (r == 0.0) return {};
    return (-1.0 / r) * d;
}

Vec2 CircleLevelSet::project(Vec2 p) const {
    const Vec2 d = p - center_;
    const double r = norm(d);
    if (r == 0.0) throw ConfigurationError("cannot project the circle center onto its boundary");
    return center_ + (radius_ / r) * d;
}

Classification::Classification(const Grid& grid, std::vector<PointClass> classes)
    : n_(grid.n()), classes_(std::move(classes)), active_index_(classes_.size(), kNotActive) {
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            const GridIndex g{i, j};
            switch (classes_[flat(g)]) {
                case PointClass::Inside:
                    ++n_inside_;
                    break;
                case PointClass::Ghost:
                    ghosts_.push_back(g);
                    break;
                case PointClass::Inactive:
                    ++n_inactive_;
                    continue;
            }
            active_index_[flat(g)] = static_cast<int>(active_.size());
            active_.push_back(g);
        }
    }
}

Classification classify(const Grid& grid, const LevelSet& ls) {
    const int n = grid.n();
    std::vector<char> in_obstacle(grid.size(), 0);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const GridIndex g{i, j};
            if (ls.value(grid.center(g)) > 0.0) {
                if (i == 0 || j == 0 || i == n - 1 || j == n - 1) {
                    throw ConfigurationError("obstacle touches the outer wall at cell " +
                                             to_string(g));
                }
                in_obstacle[grid.flat(g)] = 1;
            }
        }
    }

    std::vector<PointClass> classes(grid.size(), PointClass::Inside);
    constexpr std::array<GridIndex, 4> offsets{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const GridIndex g{i, j};
            if (!in_obstacle[grid.flat(g)]) continue;
            bool touches_fluid = false;
            for (const auto& o : offsets) {
                const GridIndex nb{i + o.i, j + o.j};
                if (grid.contains(nb) && !in_obstacle[grid.flat(nb)]) touches_fluid = true;
            }
            classes[grid.flat(g)] = touches_fluid ? PointClass::Ghost : PointClass::Inactive;
        }
    }

    Classification cls(grid, std::move(classes));
    // Validates every ghost stencil; throws on the first bad one.
    for (const GridIndex g : cls.ghosts()) (void)ghost_geometry(grid, cls, ls, g);
    return cls;
}

GhostGeometry ghost_geometry(const Grid& grid, const Classification& cls, const LevelSet& ls,
                             GridIndex ghost, GhostStencil layout) {
    if (!grid.contains(ghost) || cls.at(ghost) != PointClass::Ghost) {
        throw ConfigurationError("point " + to_string(ghost) + " is not a ghost point");
    }
    GhostGeometry geo;
    geo.ghost = ghost;
    const Vec2 g = grid.center(ghost);
    geo.boundary = ls.project(g);

    const Vec2 grad = ls.gradient(geo.boundary);
    const double gn = norm(grad);
    if (gn == 0.0) {
        throw ConfigurationError("level set gradient vanishes at the projection of " +
                                 to_string(ghost));
    }
    geo.normal = (1.0 / gn) * grad;
    geo.tangent = {-geo.normal.y, geo.normal.x};

    const double dx = geo.boundary.x - g.x;
    const double dy = geo.boundary.y - g.y;
    geo.sx = dx < 0.0 ? -1 : 1;
    geo.sy = dy < 0.0 ? -1 : 1;
    geo.theta_x = geo.sx * dx / grid.h();
    geo.theta_y = geo.sy * dy / grid.h();
    if (geo.theta_x >= 1.0 || geo.theta_y >= 1.0) {
        throw ConfigurationError("boundary projection of ghost " + to_string(ghost) +
                                 " lies more than one cell away");
    }

    auto fill = [&](int ox, int oy) {
        for (int my = 0; my < 3; ++my) {
            for (int mx = 0; mx < 3; ++mx) {
                geo.stencil[mx + 3 * my] = {ghost.i + geo.sx * (mx + ox),
                                            ghost.j + geo.sy * (my + oy)};
            }
        }
        geo.ox = ox;
        geo.oy = oy;
    };
    auto usable = [&] {
        return std::all_of(geo.stencil.begin(), geo.stencil.end(), [&](GridIndex s) {
            return grid.contains(s) && cls.is_active(s);
        });
    };

    if (layout == GhostStencil::centered) {
        const int ox = geo.theta_x < 0.5 ? -1 : 0;
        const int oy = geo.theta_y < 0.5 ? -1 : 0;
        for (const auto& [cx, cy] : {std::pair{ox, oy}, {ox, 0}, {0, oy}}) {
            if (cx == 0 && cy == 0) continue;
            fill(cx, cy);
            if (usable()) return geo;
        }
    }

    fill(0, 0);
    for (const GridIndex s : geo.stencil) {
        if (!grid.contains(s)) {
            throw ConfigurationError("stencil of ghost " + to_string(ghost) +
                                     " leaves the grid at " + to_string(s));
        }
        if (!cls.is_active(s)) {
            throw ConfigurationError("stencil of ghost " + to_string(ghost) +
                                     " touches inactive point " + to_string(s));
        }
    }
    return geo;
}

std::vector<GhostGeometry> all_ghost_geometry(const Grid& grid, const Classification& cls,
                                              const LevelSet& ls, GhostStencil layout) {
    std::vector<GhostGeometry> out;
    out.reserve(cls.n_ghost());
    for (const GridIndex g : cls.ghosts()) out.push_back(ghost_geometry(grid, cls, ls, g, layout));
    return out;
}

}  // namespace oscdiff
