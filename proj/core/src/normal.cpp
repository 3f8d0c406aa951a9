#include "qquant/normal.hpp"

#include <boost/math/distributions/normal.hpp>

#include "qquant/error.hpp"

namespace qquant {

namespace {
const boost::math::normal_distribution<double> kStandardNormal(0.0, 1.0);
}

double normal_pdf(double z) noexcept { return boost::math::pdf(kStandardNormal, z); }

double normal_cdf(double z) noexcept { return boost::math::cdf(kStandardNormal, z); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(Errc::invalid_argument, "normal quantile needs p in (0, 1)");
  return boost::math::quantile(kStandardNormal, p);
}

}  // namespace qquant
