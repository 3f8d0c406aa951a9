#pragma once

namespace qquant {

/// Standard normal density, distribution function and quantile function.
double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;
double normal_quantile(double p);

}  // namespace qquant
