#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oscdiff/errors.hpp"
#include "oscdiff/oscillatory.hpp"

namespace oscdiff {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr cplx kI{0.0, 1.0};
constexpr double kSeriesRadius = 0.5;
constexpr int kSeriesTerms = 24;

// E(z) = int_0^1 exp(i z x) dx
cplx unit_exp_integral(double z) {
    if (std::abs(z) < kSeriesRadius) {
        cplx term = 1.0;
        cplx sum = 1.0;
        for (int n = 1; n < kSeriesTerms; ++n) {
            term *= kI * z / static_cast<double>(n + 1);
            sum += term;
        }
        return sum;
    }
    return (std::exp(kI * z) - 1.0) / (kI * z);
}

// T(a,b) = int_{0<x<y<1} exp(i a x + i b y) dx dy
cplx unit_triangle_integral(double a, double b) {
    if (std::max(std::abs(a), std::abs(b)) < kSeriesRadius) {
        // sum_{p,q} (ia)^p (ib)^q / (p! q! (p+1)(p+q+2))
        cplx sum = 0.0;
        cplx ap = 1.0;
        for (int p = 0; p < kSeriesTerms; ++p) {
            cplx bq = 1.0;
            for (int q = 0; q < kSeriesTerms; ++q) {
                sum += ap * bq / static_cast<double>((p + 1) * (p + q + 2));
                bq *= kI * b / static_cast<double>(q + 1);
            }
            ap *= kI * a / static_cast<double>(p + 1);
        }
        return sum;
    }
    if (std::abs(a) >= std::abs(b)) {
        return (unit_exp_integral(a + b) - unit_exp_integral(b)) / (kI * a);
    }
    return (std::exp(kI * b) * unit_exp_integral(a) - unit_exp_integral(a + b)) / (kI * b);
}

double frac(double x) { return x - std::floor(x); }

cplx phase(int p, double periods) { return std::polar(1.0, kTwoPi * p * frac(periods)); }

using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;

template <class F>
double quad01(F&& f) {
    double err = 0.0;
    const double v = Quad::integrate(f, 0.0, 1.0, 20, 1e-13, &err);
    if (err > 1e-12) throw NumericError("profile mean quadrature did not converge");
    return v;
}

}  // namespace

double period_fraction(double t, double eps) {
    double n = std::floor(t / eps);
    double r = std::fma(-n, eps, t);
    if (r < 0.0) {
        r += eps;
    } else if (r >= eps) {
        r -= eps;
    }
    const double f = r / eps;
    return f < 1.0 ? f : 0.0;
}

TemporalProfile TemporalProfile::cosine() { return fourier(0.0, {{1, 1.0, 0.0}}, "cosine"); }

TemporalProfile TemporalProfile::sine() { return fourier(0.0, {{1, 0.0, 1.0}}, "sine"); }

TemporalProfile TemporalProfile::fourier(double mean, std::vector<Harmonic> harmonics,
                                         std::string name) {
    TemporalProfile g;
    g.name_ = std::move(name);
    if (mean != 0.0) g.modes_.emplace_back(0, cplx{mean, 0.0});
    for (const Harmonic& h : harmonics) {
        if (h.order < 1) throw ConfigurationError("harmonic order must be at least 1");
        const cplx c{0.5 * h.cos_coeff, -0.5 * h.sin_coeff};
        g.modes_.emplace_back(h.order, c);
        g.modes_.emplace_back(-h.order, std::conj(c));
    }
    return g;
}

TemporalProfile TemporalProfile::from_function(std::function<double(double)> fn,
                                               std::string name) {
    TemporalProfile g;
    g.name_ = std::move(name);
    g.callable_ = std::make_shared<const std::function<double(double)>>(std::move(fn));
    return g;
}

double TemporalProfile::value(double theta) const {
    if (callable_) return (*callable_)(frac(theta));
    cplx sum = 0.0;
    for (const auto& [p, c] : modes_) sum += c * phase(p, theta);
    return sum.real();
}

double TemporalProfile::antiderivative(double theta) const {
    if (callable_) {
        const double whole = std::floor(theta);
        const auto& f = *callable_;
        double err = 0.0;
        const double rest = Quad::integrate(f, 0.0, theta - whole, 20, 1e-13, &err);
        return whole * quad01(f) + rest;
    }
    double sum = 0.0;
    for (const auto& [p, c] : modes_) {
        if (p == 0) {
            sum += c.real() * theta;
        } else {
            sum += (c * (phase(p, theta) - 1.0) / (kI * kTwoPi * static_cast<double>(p))).real();
        }
    }
    return sum;
}

double TemporalProfile::time_antiderivative(double t, double eps) const {
    // Split t/eps into whole periods (each contributing the mean) and a fraction.
    const double f = period_fraction(t, eps);
    const double whole = std::round(t / eps - f);
    return eps * (whole * mean() + antiderivative(f));
}

double TemporalProfile::mean() const {
    if (callable_) return quad01(*callable_);
    for (const auto& [p, c] : modes_) {
        if (p == 0) return c.real();
    }
    return 0.0;
}

double TemporalProfile::mean_antiderivative() const {
    if (callable_) {
        const auto& f = *callable_;
        return quad01([&f](double s) { return (1.0 - s) * f(s); });
    }
    // <int_0^. g> = int_0^1 (1 - s) g(s) ds = sum_p c_p T(2 pi p, 0)
    cplx sum = 0.0;
    for (const auto& [p, c] : modes_) sum += c * unit_triangle_integral(kTwoPi * p, 0.0);
    return sum.real();
}

double TemporalProfile::mean_product(const TemporalProfile& outer, const TemporalProfile& inner) {
    if (outer.callable_ || inner.callable_) {
        return quad01([&](double theta) { return outer.value(theta) * inner.antiderivative(theta); });
    }
    cplx sum = 0.0;
    for (const auto& [q, cq] : inner.modes_) {
        for (const auto& [p, cp] : outer.modes_) {
            sum += cq * cp * unit_triangle_integral(kTwoPi * q, kTwoPi * p);
        }
    }
    return sum.real();
}

TemporalProfile TemporalProfile::fluctuation() const {
    if (callable_) {
        const double m = mean();
        auto fn = callable_;
        return from_function([fn, m](double theta) { return (*fn)(theta) - m; },
                             name_ + "-fluctuation");
    }
    TemporalProfile g = *this;
    g.name_ += "-fluctuation";
    std::erase_if(g.modes_, [](const auto& mode) { return mode.first == 0; });
    return g;
}

double TemporalProfile::bound() const {
    if (callable_) {
        double m = 0.0;
        for (int k = 0; k <= 1000; ++k) m = std::max(m, std::abs(value(k / 1000.0)));
        return m;
    }
    double m = 0.0;
    for (const auto& [p, c] : modes_) m += std::abs(c);
    return m;
}

SingleMoments single_moments(const TemporalProfile& g, double t0, double dt, double eps) {
    if (!g.has_closed_form()) {
        throw ConfigurationError("profile '" + g.name() + "' has no closed-form step moments");
    }
    const double periods = period_fraction(t0, eps);
    cplx i0 = 0.0, j1 = 0.0, j2 = 0.0;
    for (const auto& [p, c] : g.modes()) {
        const double a = kTwoPi * p * dt / eps;
        const cplx w = c * phase(p, periods);
        i0 += w * unit_exp_integral(a);
        j1 += w * unit_triangle_integral(0.0, a);
        j2 += w * unit_triangle_integral(a, 0.0);
    }
    return {dt * i0.real(), dt * dt * j1.real(), dt * dt * j2.real()};
}

double pair_moment(const TemporalProfile& outer, const TemporalProfile& inner, double t0,
                   double dt, double eps) {
    if (!outer.has_closed_form() || !inner.has_closed_form()) {
        throw ConfigurationError("pair moments need closed-form profiles");
    }
    const double periods = period_fraction(t0, eps);
    cplx sum = 0.0;
    for (const auto& [p, cp] : outer.modes()) {
        for (const auto& [q, cq] : inner.modes()) {
            sum += cp * cq * phase(p + q, periods) *
                   unit_triangle_integral(kTwoPi * p * dt / eps, kTwoPi * q * dt / eps);
        }
    }
    return dt * dt * sum.real();
}

}  // namespace oscdiff
