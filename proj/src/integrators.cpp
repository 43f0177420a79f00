#include "oscdiff/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "oscdiff/errors.hpp"

namespace oscdiff {

Scheme parse_scheme(std::string_view name) {
    if (name == "ua1") return Scheme::ua1;
    if (name == "ua2") return Scheme::ua2;
    if (name == "cn") return Scheme::cn;
    if (name == "ua2-forward") return Scheme::ua2_forward_expansion;
    throw ConfigurationError("unknown scheme '" + std::string(name) + "'");
}

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::ua1: return "ua1";
        case Scheme::ua2: return "ua2";
        case Scheme::cn: return "cn";
        case Scheme::ua2_forward_expansion: return "ua2-forward";
    }
    return "?";
}

SolveSettings::Method parse_solve_method(std::string_view name) {
    if (name == "direct") return SolveSettings::Method::direct;
    if (name == "krylov") return SolveSettings::Method::krylov;
    throw ConfigurationError("unknown solver '" + std::string(name) + "'");
}

SchemeOperators::SchemeOperators(SparseOperator diffusion, std::vector<SparseOperator> advection)
    : diffusion_(std::move(diffusion)), advection_(std::move(advection)) {
    if (diffusion_.rows() != diffusion_.cols()) throw ConfigurationError("L_h must be square");
    for (const auto& q : advection_) {
        if (q.rows() != diffusion_.rows() || q.cols() != diffusion_.cols()) {
            throw ConfigurationError("advection operator size mismatch");
        }
    }
}

Eigen::VectorXd SchemeOperators::apply(const Eigen::VectorXd& c,
                                       const std::vector<double>& g) const {
    Eigen::VectorXd out = diffusion_ * c;
    for (std::size_t k = 0; k < advection_.size(); ++k) out += g[k] * (advection_[k] * c);
    return out;
}

namespace {

bool second_order(Scheme s) {
    return s == Scheme::ua2 || s == Scheme::ua2_forward_expansion;
}

}  // namespace

// Term layout: I, L, [L^2], Q_k..., [L Q_k..., Q_k L..., Q_j Q_k...]
// The leading `fixed` terms only depend on dt; their combination is cached.
struct Integrator::Impl {
    std::vector<SparseOperator> terms;
    std::size_t fixed = 0;
    SparseOperator pattern;
    std::vector<Eigen::VectorXd> fixed_aligned;  // fixed terms scattered onto the pattern
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> varying_aligned;

    Eigen::VectorXd fixed_values;
    std::vector<double> fixed_coeffs;

    Eigen::SparseLU<SparseOperator, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    std::vector<double> factored_coeffs;

    Eigen::BiCGSTAB<SparseOperator, Eigen::DiagonalPreconditioner<double>> krylov;

    void build_pattern() {
        const Eigen::Index n = terms.front().rows();
        std::vector<Eigen::Triplet<double>> trip;
        for (const auto& t : terms) {
            for (int col = 0; col < t.outerSize(); ++col) {
                for (SparseOperator::InnerIterator it(t, col); it; ++it) {
                    trip.emplace_back(static_cast<int>(it.row()), col, 1.0);
                }
            }
        }
        pattern.resize(n, n);
        pattern.setFromTriplets(trip.begin(), trip.end());
        pattern.makeCompressed();

        const Eigen::Index nnz = pattern.nonZeros();
        const int* outer = pattern.outerIndexPtr();
        const int* inner = pattern.innerIndexPtr();
        fixed_aligned.assign(fixed, Eigen::VectorXd::Zero(nnz));
        varying_aligned.setZero(nnz, static_cast<Eigen::Index>(terms.size() - fixed));
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const auto& t = terms[k];
            for (int col = 0; col < t.outerSize(); ++col) {
                for (SparseOperator::InnerIterator it(t, col); it; ++it) {
                    const int* pos = std::lower_bound(inner + outer[col], inner + outer[col + 1],
                                                      static_cast<int>(it.row()));
                    if (k < fixed) {
                        fixed_aligned[k][pos - inner] += it.value();
                    } else {
                        varying_aligned(pos - inner, static_cast<Eigen::Index>(k - fixed)) +=
                            it.value();
                    }
                }
            }
        }
    }

    const SparseOperator& assemble(const std::vector<double>& coeffs) {
        const std::vector<double> head(coeffs.begin(), coeffs.begin() + fixed);
        if (head != fixed_coeffs) {
            fixed_values.setZero(pattern.nonZeros());
            for (std::size_t k = 0; k < fixed; ++k) fixed_values += head[k] * fixed_aligned[k];
            fixed_coeffs = head;
        }
        double* values = pattern.valuePtr();
        const Eigen::Index nnz = pattern.nonZeros();
        const Eigen::Index width = varying_aligned.cols();
        const double* c = coeffs.data() + fixed;
        const double* row = varying_aligned.data();
        for (Eigen::Index e = 0; e < nnz; ++e, row += width) {
            double v = fixed_values[e];
            for (Eigen::Index k = 0; k < width; ++k) v += c[k] * row[k];
            values[e] = v;
        }
        return pattern;
    }
};

Integrator::Integrator(Scheme scheme, std::shared_ptr<const SchemeOperators> ops,
                       SeparableVelocity velocity, SolveSettings settings)
    : scheme_(scheme),
      ops_(std::move(ops)),
      velocity_(std::move(velocity)),
      settings_(settings),
      impl_(std::make_unique<Impl>()) {
    if (!ops_) throw ConfigurationError("integrator needs operators");
    if (velocity_.size() != ops_->advection().size()) {
        throw ConfigurationError("velocity has " + std::to_string(velocity_.size()) +
                                 " terms but " + std::to_string(ops_->advection().size()) +
                                 " advection operators were assembled");
    }
    if (!(settings_.tolerance > 0.0)) throw ConfigurationError("solver tolerance must be positive");

    const Eigen::Index n = ops_->size();
    SparseOperator identity(n, n);
    identity.setIdentity();
    const auto& l = ops_->diffusion();
    const auto& q = ops_->advection();

    auto& terms = impl_->terms;
    terms.push_back(identity);
    terms.push_back(l);
    if (second_order(scheme_)) terms.push_back(SparseOperator(l * l));
    impl_->fixed = terms.size();
    for (const auto& qk : q) terms.push_back(qk);
    if (second_order(scheme_)) {
        for (const auto& qk : q) terms.push_back(SparseOperator(l * qk));
        for (const auto& qk : q) terms.push_back(SparseOperator(qk * l));
        for (const auto& qj : q) {
            for (const auto& qk : q) terms.push_back(SparseOperator(qj * qk));
        }
    }
    impl_->build_pattern();
    impl_->krylov.setTolerance(settings_.tolerance);
    impl_->krylov.setMaxIterations(settings_.max_iterations);
}

Integrator::~Integrator() = default;
Integrator::Integrator(Integrator&&) noexcept = default;
Integrator& Integrator::operator=(Integrator&&) noexcept = default;

std::vector<double> Integrator::coefficients(double t0, double dt) const {
    const std::size_t k = velocity_.size();
    std::vector<double> c;
    c.reserve(impl_->terms.size());
    c.push_back(1.0);

    if (scheme_ == Scheme::cn) {
        c.push_back(-0.5 * dt);
        for (const double g : velocity_.profile_values(t0 + dt)) c.push_back(-0.5 * dt * g);
        return c;
    }

    const Moments m = compute_moments(velocity_, t0, dt);
    c.push_back(-dt);
    if (scheme_ == Scheme::ua2) c.push_back(0.5 * dt * dt);
    if (scheme_ == Scheme::ua2_forward_expansion) c.push_back(-0.5 * dt * dt);
    for (std::size_t a = 0; a < k; ++a) c.push_back(-m.i0[a]);
    if (second_order(scheme_)) {
        for (std::size_t a = 0; a < k; ++a) c.push_back(m.j1[a]);
        for (std::size_t a = 0; a < k; ++a) c.push_back(m.j2[a]);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                c.push_back(m.j3(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
            }
        }
    }
    return c;
}

SparseOperator Integrator::step_matrix(double t0, double dt) {
    return impl_->assemble(coefficients(t0, dt));
}

StateVector Integrator::step(const StateVector& state, double dt) {
    if (!(dt > 0.0)) throw StepError("time step must be positive", 0.0);
    if (state.values.size() != ops_->size()) {
        throw ConfigurationError("state size does not match the operators");
    }

    Eigen::VectorXd rhs = state.values;
    if (scheme_ == Scheme::cn) {
        rhs += (0.5 * dt) * ops_->apply(state.values, velocity_.profile_values(state.time));
    }

    const auto coeffs = coefficients(state.time, dt);
    const SparseOperator* a = nullptr;
    Eigen::VectorXd x;

    auto solve_direct = [&] {
        if (!impl_->analyzed || coeffs != impl_->factored_coeffs) {
            if (!impl_->analyzed) {
                impl_->lu.analyzePattern(*a);
                impl_->analyzed = true;
            }
            impl_->lu.factorize(*a);
            if (impl_->lu.info() != Eigen::Success) {
                impl_->factored_coeffs.clear();
                throw StepError("step matrix is singular: " + impl_->lu.lastErrorMessage(),
                                std::numeric_limits<double>::infinity());
            }
            impl_->factored_coeffs = coeffs;
        }
        x = impl_->lu.solve(rhs);
    };
    const double bnorm = rhs.norm();
    // Normwise backward error, with the 1-norm of A standing in for its 2-norm.
    auto residual = [&] {
        double anorm = 0.0;
        for (Eigen::Index r = 0; r < a->outerSize(); ++r) {
            double sum = 0.0;
            for (SparseOperator::InnerIterator it(*a, r); it; ++it) sum += std::abs(it.value());
            anorm = std::max(anorm, sum);
        }
        const double scale = anorm * x.norm() + bnorm;
        return scale > 0.0 ? (*a * x - rhs).norm() / scale : 0.0;
    };
    auto acceptable = [&](double r) { return std::isfinite(r) && r <= settings_.tolerance; };

    a = &impl_->assemble(coeffs);
    if (settings_.method == SolveSettings::Method::direct) {
        solve_direct();
        last_residual_ = residual();
    } else {
        impl_->krylov.compute(*a);
        x = impl_->krylov.solveWithGuess(rhs, state.values);
        last_iterations_ = impl_->krylov.iterations();
        const bool converged = impl_->krylov.info() == Eigen::Success;
        last_residual_ = converged ? residual() : impl_->krylov.error();
        if (!acceptable(last_residual_) && settings_.direct_fallback) {
            solve_direct();
            last_residual_ = residual();
        } else if (!converged) {
            throw StepError("Krylov solve did not converge", impl_->krylov.error());
        }
    }

    if (!acceptable(last_residual_)) {
        std::ostringstream msg;
        msg << "step residual " << std::scientific << std::setprecision(3) << last_residual_
            << " exceeds the solver tolerance";
        throw StepError(msg.str(), last_residual_);
    }
    return {std::move(x), state.time + dt};
}

IntegrationResult integrate(Integrator& integrator, const StateVector& c0, double dt,
                            double t_fin, const std::vector<Probe>& probes) {
    if (!(dt > 0.0) || !(t_fin >= 0.0)) {
        throw ConfigurationError("integration needs dt > 0 and t_fin >= 0");
    }
    const long steps = std::lround(t_fin / dt);
    IntegrationResult result;
    result.state = c0;
    result.steps = steps;
    result.dt = steps > 0 ? t_fin / static_cast<double>(steps) : dt;
    for (const auto& p : probes) p(result.state);
    for (long n = 0; n < steps; ++n) {
        try {
            result.state = integrator.step(result.state, result.dt);
        } catch (const StepError& e) {
            throw StepError(std::string(e.what()) + " at step " + std::to_string(n + 1),
                            e.residual(), static_cast<std::size_t>(n + 1));
        }
        // Pin the clock to the exact grid time so long runs do not drift.
        result.state.time = c0.time + static_cast<double>(n + 1) * result.dt;
        for (const auto& p : probes) p(result.state);
    }
    return result;
}

}  // namespace oscdiff
