#ifndef SABCI_MEMD_HPP
#define SABCI_MEMD_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sabci/matrix.hpp"

namespace sabci::memd {

// Van der Corput radical inverse in the given base, i >= 1.
double radical_inverse(std::uint64_t base, std::uint64_t index);

// K projection directions on the unit (n-1)-sphere from the Hammersley
// point set. For n == 2 the first Hammersley coordinate maps directly to
// the circle angle 2*pi*(i-1)/K; for n >= 3 each hypercube coordinate is
// pushed through the inverse normal CDF and the vector normalized, which
// distributes the low-discrepancy set uniformly over the sphere.
struct DirectionSet {
    std::size_t dims = 0;
    Matrix vectors; // K x n, one unit vector per row

    std::size_t count() const { return vectors.channels(); }
};

DirectionSet hammersley_directions(std::size_t count, std::size_t dims);

// p(t) = <s(t), direction>
std::vector<double> project(const Matrix& signal, std::span<const double> direction);

struct Extremum {
    std::size_t index = 0;
    double value = 0.0;
};

// Strict interior local maxima; a plateau yields its midpoint index
// (rounded down); series endpoints never qualify.
std::vector<Extremum> find_maxima(std::span<const double> series);

struct SiftConfig {
    std::size_t direction_count = 64;
    std::size_t max_sift_iters = 50;
    double sd_threshold = 0.075;
    std::size_t max_imfs = 12;

    void validate(std::size_t n_channels) const;
};

// Mean of the K direction envelopes. Each envelope interpolates the signal
// at the projection's maxima with natural cubic splines per channel, after
// mirroring the two outermost extrema beyond each end. Throws
// insufficient-extrema when any projection has fewer than two maxima.
Matrix envelope_mean(const Matrix& signal, const DirectionSet& directions);

struct SiftResult {
    Matrix imf;
    Matrix remainder;
};

// Extracts one multivariate IMF: d <- d - m(d) until the SD criterion
// sum||m||^2 / sum||d||^2 drops below the threshold or iterations run out.
// Running out of extrema mid-sift terminates normally; an input that
// already lacks extrema is residue-like and propagates the error.
SiftResult sift(const Matrix& signal, const DirectionSet& directions, const SiftConfig& config);

struct IMFStack {
    std::vector<Matrix> imfs;
    Matrix residue;

    std::size_t count() const { return imfs.size(); }
    Matrix reconstruct() const;
};

// Repeated sifting on successive remainders until the residue's projections
// no longer contain enough extrema (or max_imfs is reached). Every channel
// receives the same number of IMFs by construction.
IMFStack memd_decompose(const Matrix& signal, const SiftConfig& config = SiftConfig{});
IMFStack memd_decompose(const Matrix& signal, const DirectionSet& directions,
                        const SiftConfig& config);

struct CleanResult {
    Matrix cleaned;                           // surviving contributions + residue
    std::vector<std::vector<bool>> removed;   // removed[imf][channel]
    std::vector<bool> residue_removed;        // per channel
    std::size_t removed_count = 0;

    // stack with the removed contributions zeroed; cleaning it again
    // reproduces `cleaned` byte for byte
    IMFStack surviving;
};

// Zeroes every per-channel IMF contribution whose peak-to-peak amplitude
// exceeds the threshold (residue drift included) and reconstructs the rest.
CleanResult remove_artifact_imfs(const IMFStack& stack, double threshold_uv = 20.0);

} // namespace sabci::memd

#endif
