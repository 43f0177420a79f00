#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oscdiff/discretization.hpp"
#include "oscdiff/errors.hpp"

namespace oscdiff {

double adsorption_length(const AdsorptionWell& well) {
    if (!(well.range > 0.0)) throw ConfigurationError("potential range must be positive");
    if (!(well.cutoff >= 1.0)) throw ConfigurationError("potential cutoff must be at least 1");

    const double depth = well.depth;
    auto boltzmann = [depth](double z) {
        if (z <= 0.0) return 0.0;
        const double z6 = std::pow(z, -6.0);
        return std::exp(-depth * (z6 * z6 - 2.0 * z6));
    };

    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    double total = 0.0;
    double total_err = 0.0;
    // The well minimum sits at z = 1; splitting there keeps both panels smooth.
    for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{1.0, well.cutoff + 1.0}}) {
        double err = 0.0;
        const double part = Quad::integrate(boltzmann, a, b, 30, 1e-14, &err);
        if (!std::isfinite(part)) throw NumericError("adsorption integral diverged");
        total += part;
        total_err += err;
    }
    if (total_err > 1e-12) {
        throw NumericError("adsorption integral did not converge (error estimate " +
                           std::to_string(total_err) + ")");
    }
    return well.range * total;
}

}  // namespace oscdiff
