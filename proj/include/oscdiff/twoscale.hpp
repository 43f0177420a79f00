#pragma once

#include <Eigen/Core>

#include "oscdiff/integrators.hpp"

namespace oscdiff {

/// Averaged (slow) dynamics d/dt Cbar = generator * Cbar.
///
/// Order 1 is L + sum_k <g_k> Q_k. Order 2 adds the eps corrections obtained by
/// feeding the first corrector C1 back into the average. With `centered` the
/// corrector is C1 = sum_k (Gt_k - <Gt_k>) Q_k Cbar, Gt_k = int_0^Theta (g_k - <g_k>);
/// otherwise the uncentered C1 = sum_k int_0^Theta g_k Q_k Cbar is used.
struct AveragedOperator {
    int order = 1;
    bool centered = true;
    SparseOperator generator;
};

AveragedOperator averaged_model(int order, const SchemeOperators& ops,
                                const SeparableVelocity& velocity, bool centered = true);

/// Cbar(0) such that the reconstruction at Theta = 0 returns c0:
/// c0 + eps sum_k <Gt_k> Q_k c0 when centered, c0 itself otherwise (C1 vanishes at 0).
Eigen::VectorXd corrected_initial(const Eigen::VectorXd& c0, const SchemeOperators& ops,
                                  const SeparableVelocity& velocity, bool centered = true);

/// C(t, Theta) = (I + eps C1(Theta)) Cbar(t), centered or not as above.
Eigen::VectorXd reconstruct(const Eigen::VectorXd& cbar, const SchemeOperators& ops,
                            const SeparableVelocity& velocity, double theta,
                            bool centered = true);

/// Scalar coefficient multiplying Q_k in the corrector at Theta, divided by eps.
double corrector_coefficient(const TemporalProfile& g, double theta, bool centered = true);

}  // namespace oscdiff
