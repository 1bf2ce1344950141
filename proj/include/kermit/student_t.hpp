#pragma once

namespace kermit::stats {

/// Regularized incomplete beta I_x(a, b). `one_minus_x` is passed separately
/// so callers can supply it without cancellation.
double incomplete_beta(double a, double b, double x, double one_minus_x);

/// Upper tail P(T > t) of Student's t with (possibly fractional) `dof`.
double student_t_sf(double t, double dof);

double student_t_pdf(double t, double dof);

/// Standard normal quantile.
double normal_quantile(double p);

/// Critical value c > 0 with P(|T| > c) == alpha.
double student_t_two_sided_critical(double dof, double alpha);

}  // namespace kermit::stats
