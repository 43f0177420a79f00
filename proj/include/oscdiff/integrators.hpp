#pragma once

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "oscdiff/discretization.hpp"
#include "oscdiff/oscillatory.hpp"

namespace oscdiff {

struct StateVector {
    Eigen::VectorXd values;
    double time = 0.0;
};

enum class Scheme {
    ua1,  ///< (I - dt L - sum I0_k Q_k) c+ = c
    ua2,  ///< (I - M) c+ = c, with -dt^2 L^2 / 2 inside M
    cn,   ///< trapezoidal rule with endpoint velocities
    /// UA2 with +dt^2 L^2 / 2 inside M, the expansion obtained by iterating the
    /// forward integral form. Kept only to demonstrate its instability.
    ua2_forward_expansion,
};

Scheme parse_scheme(std::string_view name);
std::string_view scheme_name(Scheme s);

struct SolveSettings {
    enum class Method { direct, krylov };
    Method method = Method::direct;
    double tolerance = 1e-12;  ///< |Ax - b| / (|A| |x| + |b|)
    int max_iterations = 2000;
    /// Krylov only: retry a step that misses the tolerance with a sparse LU solve.
    bool direct_fallback = true;
};

SolveSettings::Method parse_solve_method(std::string_view name);

/// L_h and the advection operators Q_k of each velocity term, plus the products
/// the second-order schemes need (built on first use).
class SchemeOperators {
public:
    SchemeOperators(SparseOperator diffusion, std::vector<SparseOperator> advection);

    Eigen::Index size() const noexcept { return diffusion_.rows(); }
    const SparseOperator& diffusion() const noexcept { return diffusion_; }
    const std::vector<SparseOperator>& advection() const noexcept { return advection_; }

    /// Applies L + sum_k g_k Q_k.
    Eigen::VectorXd apply(const Eigen::VectorXd& c, const std::vector<double>& g) const;

private:
    SparseOperator diffusion_;
    std::vector<SparseOperator> advection_;
};

/// One implicit scheme bound to its operators and velocity. Stepping is sequential;
/// use one instance per integration.
class Integrator {
public:
    Integrator(Scheme scheme, std::shared_ptr<const SchemeOperators> ops,
               SeparableVelocity velocity, SolveSettings settings = {});
    ~Integrator();
    Integrator(Integrator&&) noexcept;
    Integrator& operator=(Integrator&&) noexcept;

    Scheme scheme() const noexcept { return scheme_; }
    const SeparableVelocity& velocity() const noexcept { return velocity_; }
    const SchemeOperators& operators() const noexcept { return *ops_; }

    /// Advances by dt > 0. Throws StepError on a singular or unconverged solve.
    StateVector step(const StateVector& state, double dt);

    /// Left-hand matrix of the step from t0 to t0 + dt.
    SparseOperator step_matrix(double t0, double dt);

    /// Residual of the most recent solve.
    double last_residual() const noexcept { return last_residual_; }
    /// Krylov iterations of the most recent solve (0 for the direct method).
    long last_iterations() const noexcept { return last_iterations_; }

private:
    struct Impl;

    std::vector<double> coefficients(double t0, double dt) const;

    Scheme scheme_;
    std::shared_ptr<const SchemeOperators> ops_;
    SeparableVelocity velocity_;
    SolveSettings settings_;
    std::unique_ptr<Impl> impl_;
    double last_residual_ = 0.0;
    long last_iterations_ = 0;
};

/// Called with the initial state and after every step.
using Probe = std::function<void(const StateVector&)>;

struct IntegrationResult {
    StateVector state;
    long steps = 0;
    double dt = 0.0;  ///< t_fin / steps actually used
};

/// Takes round(t_fin / dt) steps of size t_fin / steps from c0.
IntegrationResult integrate(Integrator& integrator, const StateVector& c0, double dt,
                            double t_fin, const std::vector<Probe>& probes = {});

}  // namespace oscdiff
