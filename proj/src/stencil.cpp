#include <cmath>
#include <stdexcept>

#include "oscdiff/discretization.hpp"

namespace oscdiff {

StencilCoefficients lagrange_coeffs(double theta, double h) {
    if (!(theta >= 0.0 && theta < 1.0)) {
        throw std::invalid_argument("stencil offset must lie in [0,1)");
    }
    if (!(h > 0.0)) throw std::invalid_argument("stencil spacing must be positive");
    const double t = theta;
    StencilCoefficients c;
    c.value = {(1 - t) * (2 - t) / 2, t * (2 - t), t * (t - 1) / 2};
    c.first = {(2 * t - 3) / (2 * h), 2 * (1 - t) / h, (2 * t - 1) / (2 * h)};
    const double ih2 = 1.0 / (h * h);
    c.second = {ih2, -2 * ih2, ih2};
    return c;
}

namespace {

// Nodes -h, 0, h evaluated at theta*h.
StencilCoefficients centered_coeffs(double theta, double h) {
    const double t = theta;
    StencilCoefficients c;
    c.value = {t * (t - 1) / 2, (1 - t) * (1 + t), t * (t + 1) / 2};
    c.first = {(2 * t - 1) / (2 * h), -2 * t / h, (2 * t + 1) / (2 * h)};
    const double ih2 = 1.0 / (h * h);
    c.second = {ih2, -2 * ih2, ih2};
    return c;
}

StencilCoefficients axis_coeffs(double theta, int offset, double h) {
    if (offset == 0) return lagrange_coeffs(theta, h);
    if (offset != -1 || !(theta >= 0.0 && theta < 1.0) || !(h > 0.0)) {
        throw std::invalid_argument("invalid centered stencil");
    }
    return centered_coeffs(theta, h);
}

}  // namespace

BoundaryInterpolant boundary_interpolant(const GhostGeometry& geo, double h) {
    const auto cx = axis_coeffs(geo.theta_x, geo.ox, h);
    const auto cy = axis_coeffs(geo.theta_y, geo.oy, h);
    BoundaryInterpolant w;
    for (int my = 0; my < 3; ++my) {
        for (int mx = 0; mx < 3; ++mx) {
            const int k = mx + 3 * my;
            w.value[k] = cx.value[mx] * cy.value[my];
            w.dx[k] = geo.sx * cx.first[mx] * cy.value[my];
            w.dy[k] = geo.sy * cx.value[mx] * cy.first[my];
            w.dxx[k] = cx.second[mx] * cy.value[my];
            w.dyy[k] = cx.value[mx] * cy.second[my];
            w.dxy[k] = geo.sx * geo.sy * cx.first[mx] * cy.first[my];
        }
    }
    return w;
}

}  // namespace oscdiff
