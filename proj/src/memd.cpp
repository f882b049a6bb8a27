#include "sabci/memd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sabci/error.hpp"
#include "sabci/numeric.hpp"

namespace sabci::memd {

namespace {

constexpr std::uint64_t kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                     41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
constexpr std::size_t kPrimeCount = sizeof(kPrimes) / sizeof(kPrimes[0]);

// Interpolates the multivariate points (t_i, s(t_i)) at the projection's
// maxima. The two outermost extrema are mirrored beyond each end so the
// spline covers the whole epoch without divergence.
void accumulate_envelope(const Matrix& signal, const std::vector<Extremum>& maxima,
                         Matrix& accumulator) {
    const std::size_t n_max = maxima.size();
    const double last = static_cast<double>(signal.samples() - 1);

    std::vector<double> knots_t;
    knots_t.reserve(n_max + 4);
    knots_t.push_back(-static_cast<double>(maxima[1].index));
    knots_t.push_back(-static_cast<double>(maxima[0].index));
    for (const Extremum& m : maxima) knots_t.push_back(static_cast<double>(m.index));
    knots_t.push_back(2.0 * last - static_cast<double>(maxima[n_max - 1].index));
    knots_t.push_back(2.0 * last - static_cast<double>(maxima[n_max - 2].index));

    std::vector<double> knots_y(knots_t.size());
    for (std::size_t c = 0; c < signal.channels(); ++c) {
        knots_y[0] = signal(c, maxima[1].index);
        knots_y[1] = signal(c, maxima[0].index);
        for (std::size_t i = 0; i < n_max; ++i) knots_y[2 + i] = signal(c, maxima[i].index);
        knots_y[n_max + 2] = signal(c, maxima[n_max - 1].index);
        knots_y[n_max + 3] = signal(c, maxima[n_max - 2].index);

        const numeric::CubicSpline spline(knots_t, knots_y);
        auto row = accumulator.row(c);
        for (std::size_t t = 0; t < signal.samples(); ++t)
            row[t] += spline(static_cast<double>(t));
    }
}

double sum_sq(const Matrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += m.data()[i] * m.data()[i];
    return acc;
}

} // namespace

double radical_inverse(std::uint64_t base, std::uint64_t index) {
    double result = 0.0;
    double inv = 1.0 / static_cast<double>(base);
    double scale = inv;
    while (index > 0) {
        result += static_cast<double>(index % base) * scale;
        index /= base;
        scale *= inv;
    }
    return result;
}

DirectionSet hammersley_directions(std::size_t count, std::size_t dims) {
    if (dims < 2)
        fail(ErrorKind::invalid_argument, "direction sampling needs at least 2 dimensions");
    if (count < 1)
        fail(ErrorKind::invalid_argument, "direction count must be at least 1");
    if (dims - 1 > kPrimeCount)
        fail(ErrorKind::invalid_argument, "too many channels for the prime table");

    DirectionSet set;
    set.dims = dims;
    set.vectors = Matrix(count, dims);

    if (dims == 2) {
        for (std::size_t i = 0; i < count; ++i) {
            const double angle =
                2.0 * M_PI * static_cast<double>(i) / static_cast<double>(count);
            set.vectors(i, 0) = std::cos(angle);
            set.vectors(i, 1) = std::sin(angle);
        }
        return set;
    }

    // Antithetic completion: base Hammersley points plus their negations.
    // Maxima-only projections then see every envelope from both sides, so
    // the direction set is symmetric under sign flip just like the circle
    // map is for n == 2.
    const std::size_t base_count = (count + 1) / 2;
    for (std::size_t i = 0; i < base_count; ++i) {
        const std::uint64_t index = static_cast<std::uint64_t>(i) + 1;
        auto row = set.vectors.row(i);
        // first coordinate (2i-1)/(2K) keeps the ratio strictly inside (0,1)
        row[0] =
            (2.0 * static_cast<double>(index) - 1.0) / (2.0 * static_cast<double>(base_count));
        for (std::size_t d = 1; d < dims; ++d)
            row[d] = radical_inverse(kPrimes[d - 1], index);

        double norm_sq = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            row[d] = numeric::inverse_normal_cdf(row[d]);
            norm_sq += row[d] * row[d];
        }
        const double norm = std::sqrt(norm_sq);
        if (norm == 0.0) fail(ErrorKind::numeric, "degenerate direction vector");
        for (std::size_t d = 0; d < dims; ++d) row[d] /= norm;
    }
    for (std::size_t i = base_count; i < count; ++i) {
        const auto base = set.vectors.row(i - base_count);
        auto row = set.vectors.row(i);
        for (std::size_t d = 0; d < dims; ++d) row[d] = -base[d];
    }
    return set;
}

std::vector<double> project(const Matrix& signal, std::span<const double> direction) {
    if (direction.size() != signal.channels())
        fail(ErrorKind::invalid_argument, "direction dimension does not match channel count");
    std::vector<double> proj(signal.samples(), 0.0);
    for (std::size_t c = 0; c < signal.channels(); ++c) {
        const double w = direction[c];
        if (w == 0.0) continue;
        const auto row = signal.row(c);
        for (std::size_t t = 0; t < proj.size(); ++t) proj[t] += w * row[t];
    }
    return proj;
}

std::vector<Extremum> find_maxima(std::span<const double> series) {
    std::vector<Extremum> maxima;
    const std::size_t n = series.size();
    if (n < 3) return maxima;

    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && series[j + 1] == series[i]) ++j;
        const bool rises_into = i > 0 && series[i - 1] < series[i];
        const bool falls_after = j + 1 < n && series[j + 1] < series[i];
        if (rises_into && falls_after) maxima.push_back({(i + j) / 2, series[i]});
        i = j + 1;
    }
    return maxima;
}

void SiftConfig::validate(std::size_t n_channels) const {
    if (direction_count < 2 * n_channels)
        fail(ErrorKind::invalid_configuration,
             "direction count must be at least twice the channel count (" +
                 std::to_string(2 * n_channels) + ")");
    if (sd_threshold <= 0.0)
        fail(ErrorKind::invalid_configuration, "SD threshold must be positive");
    if (max_sift_iters < 1 || max_imfs < 1)
        fail(ErrorKind::invalid_configuration, "iteration limits must be positive");
}

Matrix envelope_mean(const Matrix& signal, const DirectionSet& directions) {
    if (directions.dims != signal.channels())
        fail(ErrorKind::invalid_argument, "direction set dimension mismatch");

    Matrix acc(signal.channels(), signal.samples());
    for (std::size_t k = 0; k < directions.count(); ++k) {
        const std::vector<double> proj = project(signal, directions.vectors.row(k));
        const std::vector<Extremum> maxima = find_maxima(proj);
        if (maxima.size() < 2)
            fail(ErrorKind::insufficient_extrema,
                 "projection " + std::to_string(k) + " has fewer than 2 maxima");
        accumulate_envelope(signal, maxima, acc);
    }
    acc *= 1.0 / static_cast<double>(directions.count());
    return acc;
}

SiftResult sift(const Matrix& signal, const DirectionSet& directions,
                const SiftConfig& config) {
    config.validate(signal.channels());

    Matrix detail = signal;
    for (std::size_t iter = 0; iter < config.max_sift_iters; ++iter) {
        Matrix m;
        try {
            m = envelope_mean(detail, directions);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::insufficient_extrema && iter > 0)
                break; // ran out of extrema mid-sift: keep the current detail
            throw;     // iter == 0: the input itself is residue-like
        }
        const double denom = sum_sq(detail);
        detail -= m;
        const double sd = denom > 0.0 ? sum_sq(m) / denom : 0.0;
        if (sd < config.sd_threshold) break;
    }
    return {detail, signal - detail};
}

Matrix IMFStack::reconstruct() const {
    Matrix sum = residue;
    for (const Matrix& imf : imfs) sum += imf;
    return sum;
}

IMFStack memd_decompose(const Matrix& signal, const SiftConfig& config) {
    return memd_decompose(signal, hammersley_directions(config.direction_count,
                                                        signal.channels()),
                          config);
}

IMFStack memd_decompose(const Matrix& signal, const DirectionSet& directions,
                        const SiftConfig& config) {
    if (signal.channels() < 2)
        fail(ErrorKind::invalid_argument, "joint decomposition needs at least 2 channels");
    if (signal.samples() < 16)
        fail(ErrorKind::invalid_argument, "signal too short to decompose (needs >= 16 samples)");
    config.validate(signal.channels());

    IMFStack stack;
    stack.residue = signal;
    while (stack.imfs.size() < config.max_imfs) {
        SiftResult result;
        try {
            result = sift(stack.residue, directions, config);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::insufficient_extrema) break; // residue reached
            throw;
        }
        stack.imfs.push_back(std::move(result.imf));
        stack.residue = std::move(result.remainder);
    }
    return stack;
}

CleanResult remove_artifact_imfs(const IMFStack& stack, double threshold_uv) {
    if (threshold_uv < 0.0)
        fail(ErrorKind::invalid_argument, "peak-to-peak threshold must be nonnegative");

    const std::size_t channels = stack.residue.channels();
    const std::size_t samples = stack.residue.samples();

    auto peak_to_peak = [](std::span<const double> row) {
        const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        return *hi - *lo;
    };

    CleanResult result;
    result.cleaned = Matrix(channels, samples);
    result.surviving.imfs.assign(stack.imfs.size(), Matrix(channels, samples));
    result.surviving.residue = Matrix(channels, samples);
    result.removed.assign(stack.imfs.size(), std::vector<bool>(channels, false));
    result.residue_removed.assign(channels, false);

    for (std::size_t m = 0; m < stack.imfs.size(); ++m) {
        for (std::size_t c = 0; c < channels; ++c) {
            const auto row = stack.imfs[m].row(c);
            if (peak_to_peak(row) > threshold_uv) {
                result.removed[m][c] = true;
                ++result.removed_count;
            } else {
                auto out = result.cleaned.row(c);
                auto keep = result.surviving.imfs[m].row(c);
                for (std::size_t t = 0; t < samples; ++t) {
                    out[t] += row[t];
                    keep[t] = row[t];
                }
            }
        }
    }
    for (std::size_t c = 0; c < channels; ++c) {
        const auto row = stack.residue.row(c);
        if (peak_to_peak(row) > threshold_uv) {
            result.residue_removed[c] = true;
            ++result.removed_count;
        } else {
            auto out = result.cleaned.row(c);
            auto keep = result.surviving.residue.row(c);
            for (std::size_t t = 0; t < samples; ++t) {
                out[t] += row[t];
                keep[t] = row[t];
            }
        }
    }
    return result;
}

} // namespace sabci::memd
