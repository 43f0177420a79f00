#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "oscdiff/geometry.hpp"

namespace oscdiff {

/// Square sparse operator over the active points, indexed by Classification::active_index.
using SparseOperator = Eigen::SparseMatrix<double>;

/// Quadratic Lagrange weights on the nodes 0, h, 2h evaluated at theta*h.
struct StencilCoefficients {
    std::array<double, 3> value{};
    std::array<double, 3> first{};   ///< 1/length
    std::array<double, 3> second{};  ///< 1/length^2
};

StencilCoefficients lagrange_coeffs(double theta, double h);

/// Nine-point weights (indexed like GhostGeometry::stencil) that reproduce the value
/// and the partial derivatives of the tensor-product quadratic interpolant at B.
struct BoundaryInterpolant {
    std::array<double, 9> value{};
    std::array<double, 9> dx{};
    std::array<double, 9> dy{};
    std::array<double, 9> dxx{};
    std::array<double, 9> dxy{};
    std::array<double, 9> dyy{};
};

BoundaryInterpolant boundary_interpolant(const GhostGeometry& geo, double h);

struct PhysicalParams {
    double diffusion = 0.02;          ///< D
    double adsorption_length = 0.03;  ///< M
};

/// Lennard-Jones well used to derive the adsorption length.
struct AdsorptionWell {
    double range = 1e-2;     ///< delta
    double depth = 1.0;      ///< E / k_B T
    double cutoff = 2.0;     ///< L, in units of delta
};

/// M = delta * int_0^{L+1} exp(-depth (z^-12 - 2 z^-6)) dz, adaptive Gauss-Kronrod to 1e-12.
double adsorption_length(const AdsorptionWell& well);

/// Five-point diffusion rows for Inside points and Robin / Laplace-Beltrami rows for ghosts.
/// The outer wall is closed by mirroring the first exterior cell onto the last interior one.
SparseOperator assemble_diffusion(const Grid& grid, const Classification& cls,
                                  std::span<const GhostGeometry> geoms,
                                  const PhysicalParams& params);

/// Conservative central differences of div(a c); ghost rows are empty.
/// `field` holds a at every active point, in active-index order.
SparseOperator assemble_advection(const Grid& grid, const Classification& cls,
                                  std::span<const Vec2> field);

/// Coordinate-format dump: one "row col value" line per stored entry, 17 significant digits.
void write_coordinate(std::ostream& os, const SparseOperator& op);

}  // namespace oscdiff
