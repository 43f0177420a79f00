#include "oscdiff/twoscale.hpp"

#include "oscdiff/errors.hpp"

namespace oscdiff {

AveragedOperator averaged_model(int order, const SchemeOperators& ops,
                                const SeparableVelocity& velocity, bool centered) {
    if (order != 1 && order != 2) throw ConfigurationError("averaged model order must be 1 or 2");
    const auto& q = ops.advection();
    const auto& terms = velocity.terms();
    if (terms.size() != q.size()) throw ConfigurationError("velocity/operator term mismatch");

    AveragedOperator avg;
    avg.order = order;
    avg.centered = centered;
    avg.generator = ops.diffusion();
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double m = terms[k].profile.mean();
        if (m != 0.0) avg.generator += m * q[k];
    }
    if (order == 1) return avg;

    const double eps = velocity.eps();
    const auto& l = ops.diffusion();
    for (std::size_t k = 0; k < q.size(); ++k) {
        const TemporalProfile& gk = terms[k].profile;
        const TemporalProfile inner = centered ? gk.fluctuation() : gk;
        if (!centered) {
            const double lq = gk.mean_antiderivative();
            if (lq != 0.0) avg.generator += (eps * lq) * SparseOperator(l * q[k]);
        }
        for (std::size_t j = 0; j < q.size(); ++j) {
            const TemporalProfile& gj = terms[j].profile;
            double coeff = TemporalProfile::mean_product(gj, inner);
            if (centered) coeff -= gj.mean() * inner.mean_antiderivative();
            if (coeff != 0.0) avg.generator += (eps * coeff) * SparseOperator(q[j] * q[k]);
        }
    }
    avg.generator.makeCompressed();
    return avg;
}

Eigen::VectorXd corrected_initial(const Eigen::VectorXd& c0, const SchemeOperators& ops,
                                  const SeparableVelocity& velocity, bool centered) {
    Eigen::VectorXd out = c0;
    if (!centered) return out;
    const auto& q = ops.advection();
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double coeff = velocity.terms()[k].profile.fluctuation().mean_antiderivative();
        if (coeff != 0.0) out += (velocity.eps() * coeff) * (q[k] * c0);
    }
    return out;
}

double corrector_coefficient(const TemporalProfile& g, double theta, bool centered) {
    if (!centered) return g.antiderivative(theta);
    const TemporalProfile fl = g.fluctuation();
    return fl.antiderivative(theta) - fl.mean_antiderivative();
}

Eigen::VectorXd reconstruct(const Eigen::VectorXd& cbar, const SchemeOperators& ops,
                            const SeparableVelocity& velocity, double theta, bool centered) {
    Eigen::VectorXd out = cbar;
    const auto& q = ops.advection();
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double coeff = corrector_coefficient(velocity.terms()[k].profile, theta, centered);
        if (coeff != 0.0) out += (velocity.eps() * coeff) * (q[k] * cbar);
    }
    return out;
}

}  // namespace oscdiff
