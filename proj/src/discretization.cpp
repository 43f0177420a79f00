#include "oscdiff/discretization.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "oscdiff/errors.hpp"

namespace oscdiff {

namespace {

using Triplet = Eigen::Triplet<double>;

// Neighbor reference with the outer wall folded back onto the cell itself.
GridIndex fold(const Grid& grid, GridIndex self, GridIndex nb) {
    return grid.contains(nb) ? nb : self;
}

int checked_index(const Classification& cls, GridIndex g, GridIndex row) {
    const int k = cls.active_index(g);
    if (k == Classification::kNotActive) {
        throw ConfigurationError("row " + to_string(row) + " references inactive point " +
                                 to_string(g));
    }
    return k;
}

}  // namespace

SparseOperator assemble_diffusion(const Grid& grid, const Classification& cls,
                                  std::span<const GhostGeometry> geoms,
                                  const PhysicalParams& params) {
    if (!(params.diffusion > 0.0) || !(params.adsorption_length > 0.0)) {
        throw ConfigurationError("diffusion and adsorption length must be positive");
    }
    const auto n_active = static_cast<Eigen::Index>(cls.n_active());
    const double h = grid.h();
    const double d = params.diffusion;
    const double dh2 = d / (h * h);

    std::vector<Triplet> triplets;
    triplets.reserve(5 * cls.n_inside() + 9 * cls.n_ghost());

    for (const GridIndex p : cls.active_points()) {
        if (cls.at(p) != PointClass::Inside) continue;
        const int row = cls.active_index(p);
        triplets.emplace_back(row, row, -4.0 * dh2);
        const std::array<GridIndex, 4> nbs{{{p.i + 1, p.j}, {p.i - 1, p.j}, {p.i, p.j + 1},
                                            {p.i, p.j - 1}}};
        for (const GridIndex nb : nbs) {
            triplets.emplace_back(row, checked_index(cls, fold(grid, p, nb), p), dh2);
        }
    }

    const double robin = d / params.adsorption_length;
    for (const GhostGeometry& geo : geoms) {
        const int row = checked_index(cls, geo.ghost, geo.ghost);
        const auto w = boundary_interpolant(geo, h);
        const Vec2 t = geo.tangent;
        const Vec2 nrm = geo.normal;
        for (int k = 0; k < 9; ++k) {
            const double tangential =
                t.x * t.x * w.dxx[k] + 2.0 * t.x * t.y * w.dxy[k] + t.y * t.y * w.dyy[k];
            const double normal = nrm.x * w.dx[k] + nrm.y * w.dy[k];
            triplets.emplace_back(row, checked_index(cls, geo.stencil[k], geo.ghost),
                                  d * tangential - robin * normal);
        }
    }

    SparseOperator op(n_active, n_active);
    op.setFromTriplets(triplets.begin(), triplets.end());
    op.makeCompressed();
    return op;
}

SparseOperator assemble_advection(const Grid& grid, const Classification& cls,
                                  std::span<const Vec2> field) {
    if (field.size() != cls.n_active()) {
        throw ConfigurationError("advection field size does not match the active point count");
    }
    for (std::size_t k = 0; k < field.size(); ++k) {
        if (!std::isfinite(field[k].x) || !std::isfinite(field[k].y)) {
            throw NumericError("non-finite velocity at active point " +
                               to_string(cls.active_points()[k]));
        }
    }
    const auto n_active = static_cast<Eigen::Index>(cls.n_active());
    const double inv2h = 1.0 / (2.0 * grid.h());

    std::vector<Triplet> triplets;
    triplets.reserve(4 * cls.n_inside());
    for (const GridIndex p : cls.active_points()) {
        if (cls.at(p) != PointClass::Inside) continue;
        const int row = cls.active_index(p);
        auto add = [&](GridIndex nb, bool use_x, double sign) {
            const int col = checked_index(cls, fold(grid, p, nb), p);
            Vec2 a = field[static_cast<std::size_t>(col)];
            if (!grid.contains(nb)) {
                // The mirrored concentration meets the velocity extrapolated past the wall.
                const GridIndex in{2 * p.i - nb.i, 2 * p.j - nb.j};
                const Vec2 b = field[static_cast<std::size_t>(checked_index(cls, in, p))];
                a = {2.0 * a.x - b.x, 2.0 * a.y - b.y};
            }
            triplets.emplace_back(row, col, sign * (use_x ? a.x : a.y) * inv2h);
        };
        add({p.i + 1, p.j}, true, 1.0);
        add({p.i - 1, p.j}, true, -1.0);
        add({p.i, p.j + 1}, false, 1.0);
        add({p.i, p.j - 1}, false, -1.0);
    }

    SparseOperator op(n_active, n_active);
    op.setFromTriplets(triplets.begin(), triplets.end());
    op.makeCompressed();
    return op;
}

void write_coordinate(std::ostream& os, const SparseOperator& op) {
    const auto old = os.precision(17);
    for (int col = 0; col < op.outerSize(); ++col) {
        for (SparseOperator::InnerIterator it(op, col); it; ++it) {
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
    os.precision(old);
}

}  // namespace oscdiff
