#ifndef SABCI_NUMERIC_HPP
#define SABCI_NUMERIC_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sabci::numeric {

// Natural cubic spline (zero second derivative at the end knots) through
// strictly increasing abscissae. Two knots degenerate to a straight line.
class CubicSpline {
public:
    CubicSpline(std::span<const double> x, std::span<const double> y);

    double operator()(double t) const;

private:
    std::vector<double> x_, y_, m_; // m_ = second derivatives at knots
};

// In-place radix-2 Cooley-Tukey; length must be a power of two.
// inverse=true applies the 1/N scaling.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

double normal_cdf(double z);
// Acklam's rational approximation, |relative error| < 1.2e-9 on (0,1).
double inverse_normal_cdf(double p);

double mean(std::span<const double> v);
double population_stdev(std::span<const double> v);
double sum_sq(std::span<const double> v);
double pearson_correlation(std::span<const double> a, std::span<const double> b);

// Sign changes, zeros carried over to the previous nonzero sign.
std::size_t zero_crossings(std::span<const double> v);

// Midranks of v (average rank for ties), 1-based.
std::vector<double> midranks(std::span<const double> v);

} // namespace sabci::numeric

#endif
