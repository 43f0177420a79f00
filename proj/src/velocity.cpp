#include <cmath>
#include <numbers>

#include "oscdiff/errors.hpp"
#include "oscdiff/oscillatory.hpp"

namespace oscdiff {

SeparableVelocity::SeparableVelocity(double eps, std::vector<VelocityTerm> terms)
    : eps_(eps), terms_(std::move(terms)) {
    if (!(eps > 0.0)) throw ConfigurationError("oscillation period must be positive");
    for (const auto& term : terms_) {
        if (term.field.size() != terms_.front().field.size()) {
            throw ConfigurationError("velocity terms sampled on different point sets");
        }
        for (const Vec2 a : term.field) {
            if (!std::isfinite(a.x) || !std::isfinite(a.y)) {
                throw ConfigurationError("velocity term is not finite at every active point");
            }
        }
    }
}

std::vector<double> SeparableVelocity::profile_values(double t) const {
    std::vector<double> g;
    g.reserve(terms_.size());
    for (const auto& term : terms_) g.push_back(term.profile.value(period_fraction(t, eps_)));
    return g;
}

std::vector<Vec2> SeparableVelocity::evaluate(double t) const {
    if (terms_.empty()) return {};
    std::vector<Vec2> u(terms_.front().field.size());
    const auto g = profile_values(t);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        for (std::size_t p = 0; p < u.size(); ++p) u[p] = u[p] + g[k] * terms_[k].field[p];
    }
    return u;
}

Moments compute_moments(const SeparableVelocity& velocity, double t0, double dt) {
    const auto& terms = velocity.terms();
    const std::size_t k = terms.size();
    Moments m;
    m.t0 = t0;
    m.dt = dt;
    m.i0.resize(k);
    m.j1.resize(k);
    m.j2.resize(k);
    m.j3.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    const double eps = velocity.eps();
    for (std::size_t a = 0; a < k; ++a) {
        const auto s = single_moments(terms[a].profile, t0, dt, eps);
        m.i0[a] = s.i0;
        m.j1[a] = s.j1;
        m.j2[a] = s.j2;
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            m.j3(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                a == b ? 0.5 * m.i0[a] * m.i0[a]
                       : pair_moment(terms[a].profile, terms[b].profile, t0, dt, eps);
        }
    }
    return m;
}

SeparableVelocity testcos_velocity(const Grid& grid, const Classification& cls, double amplitude,
                                   double radius, double eps) {
    const double guard = 0.5 * radius;
    std::vector<Vec2> field;
    field.reserve(cls.n_active());
    for (const GridIndex g : cls.active_points()) {
        const Vec2 p = grid.center(g);
        const double r2 = dot(p, p);
        if (r2 == 0.0 || r2 < guard * guard) {
            throw ConfigurationError("active point " + to_string(g) +
                                     " lies inside the TestCos guard radius");
        }
        field.push_back((amplitude * radius / r2) * p);
    }
    return SeparableVelocity(eps, {VelocityTerm{std::move(field), TemporalProfile::cosine()}});
}

SeparableVelocity testosc_velocity(const Grid& grid, const Classification& cls, double amplitude,
                                   double radius, double eps) {
    if (!(eps > 0.0)) throw ConfigurationError("oscillation period must be positive");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<Vec2> cos_part;
    std::vector<Vec2> sin_part;
    cos_part.reserve(cls.n_active());
    sin_part.reserve(cls.n_active());
    for (const GridIndex g : cls.active_points()) {
        const double arg = two_pi * period_fraction(grid.x(g.i), eps);
        cos_part.push_back({amplitude * radius * std::cos(arg), 0.0});
        sin_part.push_back({-amplitude * radius * std::sin(arg), 0.0});
    }
    return SeparableVelocity(eps, {VelocityTerm{std::move(cos_part), TemporalProfile::cosine()},
                                   VelocityTerm{std::move(sin_part), TemporalProfile::sine()}});
}

SeparableVelocity zero_velocity(double eps) { return SeparableVelocity(eps, {}); }

}  // namespace oscdiff
