#include "sabci/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sabci/error.hpp"
#include "sabci/matrix.hpp"

namespace sabci {

std::vector<std::string> default_channel_names(std::size_t n) {
    // front-to-back montage used throughout: index 0 is the most frontal site
    static const char* kMontage8[] = {"Fp1", "Fp2", "Fz", "Cz", "P3", "Pz", "P4", "Oz"};
    std::vector<std::string> names;
    names.reserve(n);
    if (n == 8) {
        for (const char* s : kMontage8) names.emplace_back(s);
    } else {
        for (std::size_t i = 0; i < n; ++i) names.push_back("ch" + std::to_string(i + 1));
    }
    return names;
}

} // namespace sabci

namespace sabci::numeric {

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        fail(ErrorKind::invalid_argument, "spline needs at least two matching knots");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x[i] > x[i - 1]))
            fail(ErrorKind::invalid_argument, "spline knots must be strictly increasing");

    x_.assign(x.begin(), x.end());
    y_.assign(y.begin(), y.end());
    m_.assign(n, 0.0);
    if (n == 2) return; // linear segment, second derivatives stay zero

    // Tridiagonal system for interior second derivatives, natural ends.
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    diag[0] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    diag[n - 1] = 1.0;

    // Thomas algorithm; lower diagonal at row i is h0 (same as upper[i-1]'s h).
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double factor = h0 / diag[i - 1];
        diag[i] -= factor * upper[i - 1];
        rhs[i] -= factor * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
        if (i == 1) break;
    }
}

double CubicSpline::operator()(double t) const {
    const std::size_t n = x_.size();
    // clamp to the outermost segments for (rare) evaluation beyond the knots
    std::size_t hi = std::upper_bound(x_.begin(), x_.end(), t) - x_.begin();
    if (hi < 1) hi = 1;
    if (hi > n - 1) hi = n - 1;
    const std::size_t lo = hi - 1;

    const double h = x_[hi] - x_[lo];
    const double a = (x_[hi] - t) / h;
    const double b = (t - x_[lo]) / h;
    return a * y_[lo] + b * y_[hi] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * (h * h) / 6.0;
}

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        fail(ErrorKind::invalid_argument, "fft length must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= scale;
    }
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        fail(ErrorKind::invalid_argument, "inverse normal cdf requires p in (0,1)");

    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;

    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double mean(std::span<const double> v) {
    if (v.empty()) fail(ErrorKind::invalid_argument, "mean of empty range");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_stdev(std::span<const double> v) {
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double sum_sq(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        fail(ErrorKind::invalid_argument, "correlation needs equal nonempty ranges");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        fail(ErrorKind::numeric, "correlation undefined for constant series");
    return sab / std::sqrt(saa * sbb);
}

std::size_t zero_crossings(std::span<const double> v) {
    std::size_t count = 0;
    int last_sign = 0;
    for (double x : v) {
        const int s = (x > 0.0) - (x < 0.0);
        if (s != 0) {
            if (last_sign != 0 && s != last_sign) ++count;
            last_sign = s;
        }
    }
    return count;
}

std::vector<double> midranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0; // average of ranks i+1..j+1
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

} // namespace sabci::numeric
