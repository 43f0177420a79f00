#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "oscdiff/geometry.hpp"

namespace oscdiff {

/// frac(t / eps) with the remainder t - n*eps formed exactly, so that large t/eps
/// keeps full phase accuracy.
double period_fraction(double t, double eps);

/// One real harmonic a*cos(2 pi m T) + b*sin(2 pi m T) of a 1-periodic profile.
struct Harmonic {
    int order = 1;  ///< m >= 1
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

/// A 1-periodic scalar profile g(Theta), evaluated in physical time as g(t/eps).
///
/// Profiles built from a finite Fourier series have every period mean and every
/// step moment in closed form. Profiles wrapping an arbitrary callable only
/// support the period means, which then fall back to adaptive quadrature.
class TemporalProfile {
public:
    static TemporalProfile cosine();
    static TemporalProfile sine();
    static TemporalProfile fourier(double mean, std::vector<Harmonic> harmonics,
                                   std::string name = "fourier");
    static TemporalProfile from_function(std::function<double(double)> g,
                                         std::string name = "user");

    const std::string& name() const noexcept { return name_; }
    bool has_closed_form() const noexcept { return !callable_; }

    double value(double theta) const;
    /// int_0^theta g
    double antiderivative(double theta) const;
    /// int_0^t g(s/eps) ds
    double time_antiderivative(double t, double eps) const;

    /// <g>
    double mean() const;
    /// <int_0^. g>
    double mean_antiderivative() const;
    /// <outer(.) int_0^. inner>
    static double mean_product(const TemporalProfile& outer, const TemporalProfile& inner);

    /// g - <g>
    TemporalProfile fluctuation() const;

    /// Upper bound on |g|.
    double bound() const;

    /// Complex Fourier coefficients (p, c_p) with g = sum_p c_p exp(2 pi i p Theta).
    const std::vector<std::pair<int, std::complex<double>>>& modes() const { return modes_; }

private:
    TemporalProfile() = default;

    std::string name_;
    std::vector<std::pair<int, std::complex<double>>> modes_;
    std::shared_ptr<const std::function<double(double)>> callable_;
};

/// u_h(t) = sum_k field_k * profile_k(t/eps); one spatial factor per active point.
struct VelocityTerm {
    std::vector<Vec2> field;
    TemporalProfile profile;
};

class SeparableVelocity {
public:
    SeparableVelocity(double eps, std::vector<VelocityTerm> terms);

    double eps() const noexcept { return eps_; }
    const std::vector<VelocityTerm>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

    /// Profile values g_k(t/eps).
    std::vector<double> profile_values(double t) const;
    /// Pointwise velocity at time t.
    std::vector<Vec2> evaluate(double t) const;

private:
    double eps_;
    std::vector<VelocityTerm> terms_;
};

/// Exact time integrals of the profiles over [t0, t0 + dt]:
///   i0[k]    = int g_k
///   j1[k]    = int_s int_s^{t1} g_k(sigma) dsigma ds
///   j2[k]    = int (t1 - s) g_k(s) ds
///   j3(j,k)  = int g_j(s) int_s^{t1} g_k(sigma) dsigma ds
struct Moments {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> i0;
    std::vector<double> j1;
    std::vector<double> j2;
    Eigen::MatrixXd j3;
};

Moments compute_moments(const SeparableVelocity& velocity, double t0, double dt);

struct SingleMoments {
    double i0 = 0.0;
    double j1 = 0.0;
    double j2 = 0.0;
};
SingleMoments single_moments(const TemporalProfile& g, double t0, double dt, double eps);
double pair_moment(const TemporalProfile& outer, const TemporalProfile& inner, double t0,
                   double dt, double eps);

/// A R_B (x,y)/(x^2+y^2) with a cosine profile. Active points closer than R_B/2 to
/// the obstacle center are rejected.
SeparableVelocity testcos_velocity(const Grid& grid, const Classification& cls, double amplitude,
                                   double radius, double eps);

/// A R_B cos(2 pi (t + x)/eps) (1,0), split into a cosine and a sine term.
SeparableVelocity testosc_velocity(const Grid& grid, const Classification& cls, double amplitude,
                                   double radius, double eps);

SeparableVelocity zero_velocity(double eps = 1.0);

}  // namespace oscdiff
