#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "oscdiff/config.hpp"
#include "oscdiff/csv.hpp"
#include "oscdiff/geometry.hpp"
#include "oscdiff/integrators.hpp"
#include "oscdiff/oscillatory.hpp"

namespace oscdiff {

/// Grid, classification, operators and velocity of one (test, N, eps) instance.
struct Problem {
    Grid grid;
    Classification cls;
    std::shared_ptr<const SchemeOperators> ops;
    SeparableVelocity velocity;
};

Problem make_problem(const StudyConfig& cfg, int n, double eps);

/// Gaussian exp(-(x^2 + (y - y0)^2) / (2 sigma^2)) at every active point.
Eigen::VectorXd initial_condition(const Grid& grid, const Classification& cls, double sigma,
                                  double y0);

/// ||reference - candidate|| / ||reference||; NumericError if the reference vanishes.
double relative_error(const Eigen::VectorXd& candidate, const Eigen::VectorXd& reference);

/// Bilinear weights of the four cell centers surrounding a point.
struct BilinearStencil {
    std::array<int, 4> index{};  ///< active indices
    std::array<double, 4> weight{};
};

/// Throws ConfigurationError if the point is outside the square or a corner is inactive.
BilinearStencil bilinear_stencil(const Grid& grid, const Classification& cls, Vec2 p);

/// Samples a fine solution at the Inside points of a coarser grid with tensor cubic
/// interpolation. Where the sixteen-point stencil would touch a ghost or inactive point
/// it falls back to bilinear weights; coarse points whose bilinear cell touches an
/// inactive point are left out.
class Restriction {
public:
    Restriction(const Grid& fine, const Classification& fine_cls, const Grid& coarse,
                const Classification& coarse_cls);

    /// Coarse active indices that are compared, in increasing order.
    const std::vector<int>& coarse_rows() const noexcept { return rows_; }
    std::size_t skipped() const noexcept { return skipped_; }
    /// Compared points that use the bilinear fallback.
    std::size_t bilinear() const noexcept { return bilinear_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& fine_values) const;
    Eigen::VectorXd select(const Eigen::VectorXd& coarse_values) const;

private:
    std::vector<int> rows_;
    std::vector<std::size_t> offsets_;
    std::vector<int> index_;
    std::vector<double> weight_;
    std::size_t skipped_ = 0;
    std::size_t bilinear_ = 0;
};

/// Relative error between solutions of two problems. Equal grids compare every active
/// point; otherwise the finer solution is restricted onto the coarser Inside points.
double relative_error(const Problem& candidate, const Eigen::VectorXd& c, const Problem& reference,
                      const Eigen::VectorXd& r);

/// Point probe recording the bilinear interpolant of the state at P.
class Detector {
public:
    Detector(const Grid& grid, const Classification& cls, Vec2 p);
    double sample(const Eigen::VectorXd& values) const;

private:
    BilinearStencil stencil_;
};

/// Linear interpolation of a trace in time; the trace must be sorted and cover t.
double trace_at(const std::vector<TraceRow>& trace, double t);

/// Largest |c - r| / |r| over the samples of `candidate`.
double max_relative_deviation(const std::vector<TraceRow>& candidate,
                              const std::vector<TraceRow>& reference);

struct RunResult {
    StateVector state;            ///< physical concentration at the final time
    std::vector<TraceRow> trace;  ///< detector samples, empty unless requested
    long steps = 0;
    double dt = 0.0;
};

/// One integration of `scheme` (ua1, ua2, cn, ua2-forward, twoscale1, twoscale2) from the
/// configured initial condition. Two-scale schemes integrate the averaged model with UA2
/// steps and report the reconstructed concentration.
RunResult run_scheme(const StudyConfig& cfg, const Problem& problem, std::string_view scheme,
                     double dt, double t_fin, const SolveSettings& settings,
                     bool record_trace = false);

SolveSettings solve_settings(const StudyConfig& cfg, bool reference);

/// Key of the reference run for `eps`, and its on-disk cache name (FNV-1a of the key).
std::string reference_key(const StudyConfig& cfg, double eps, int n);
std::string reference_cache_name(const std::string& key);

/// Reference state at t_fin computed with ref_scheme, dt_ref and grid `n`; read from or
/// written to cfg.cache_dir when it is set.
Eigen::VectorXd reference_solution(const StudyConfig& cfg, const Problem& problem, double eps);

struct FittedOrder {
    double eps = 0.0;
    double order = 0.0;
};

struct ConvergenceStudy {
    std::vector<ErrorRow> rows;  ///< sorted by (eps, dt, N)
    std::vector<FittedOrder> orders;
};

/// Least-squares slope of log(error) against log(step).
double fitted_order(const std::vector<double>& step, const std::vector<double>& error);

/// Every (eps, dt) at N against the (N_ref, dt_ref) reference.
ConvergenceStudy time_convergence(const StudyConfig& cfg);
/// Every (eps, N in N_list) at dt[0] against the (N_ref, dt_ref) reference; orders in h.
ConvergenceStudy space_convergence(const StudyConfig& cfg);

/// max over eps / min over eps of the error at each dt, in dt order.
std::vector<std::pair<double, double>> uniformity_ratios(const std::vector<ErrorRow>& rows);

struct TraceComparison {
    std::vector<TraceRow> reference;
    std::vector<TraceRow> ua2;
    std::vector<TraceRow> cn;
    double ua2_deviation = 0.0;
    double cn_deviation = 0.0;
};

/// Detector traces of UA2 and CN at dt[0] against a dt_ref reference, eps[0], grid N.
TraceComparison compare_cn(const StudyConfig& cfg);

/// Error of the averaged models of each order against the dt_ref reference at t_fin, per eps.
std::vector<AsymptoticRow> twoscale_study(const StudyConfig& cfg,
                                          const std::vector<int>& orders = {1, 2});

/// Classical RK4 on the dense system. Requires N <= 40 and dt_sub <= eps/50; throws
/// NumericError when the norm exceeds 1e6.
Eigen::VectorXd dense_oracle(const Problem& problem, const Eigen::VectorXd& c0, double t_fin,
                             double dt_sub);

/// Scheme cfg.scheme at every (eps, dt) against the dense oracle at t_fin on grid N.
std::vector<ErrorRow> oracle_study(const StudyConfig& cfg);

/// Runs fn(0..count-1) on up to `threads` workers (0 = hardware); rethrows the first failure.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace oscdiff
