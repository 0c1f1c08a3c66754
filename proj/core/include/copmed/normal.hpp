#pragma once

namespace copmed {

// Standard normal density, CDF, upper tail and inverse CDF.  The inverse uses
// Wichura's PPND16 rational approximations (relative error ~1e-15 across the
// full double range), so quantile/cdf round trips hold to ~1e-12 even in the
// tails.

double norm_pdf(double x);
double norm_logpdf(double x);
double norm_cdf(double x);
// P(X > x), accurate in the right tail (erfc based).
double norm_sf(double x);
double norm_quantile(double p);

// Copula transforms clamp CDF values to [kCdfClamp, 1-kCdfClamp] before the
// inverse so latent scores stay finite.
inline constexpr double kCdfClamp = 1e-12;
double clamped_norm_quantile(double p);

}  // namespace copmed
