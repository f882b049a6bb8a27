#ifndef SABCI_DSP_HPP
#define SABCI_DSP_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "sabci/matrix.hpp"
#include "sabci/protocol.hpp"

namespace sabci::dsp {

enum class FilterKind { lowpass, highpass };

struct FilterSpec {
    int order = 5;
    double cutoff_hz = 0.0;
    FilterKind kind = FilterKind::lowpass;
};

// One second-order (or first-order, b2 = a2 = 0) section.
struct Biquad {
    double b0 = 0, b1 = 0, b2 = 0;
    double a1 = 0, a2 = 0;
};

// Cascade of biquads; applied causally (single pass, zero initial state).
struct IirCascade {
    std::vector<Biquad> sections;

    std::vector<double> apply(std::span<const double> x) const;
    void apply_in_place(std::span<double> x) const;

    // frequency response at w rad/sample
    std::complex<double> response(double w) const;
    double magnitude_at_hz(double hz, double sample_rate_hz) const;

    // per-section pole magnitudes, for stability checks
    std::vector<double> pole_magnitudes() const;
};

// Butterworth design via the bilinear transform with frequency prewarping,
// factored into second-order sections.
IirCascade design_butterworth(const FilterSpec& spec, double sample_rate_hz);

// Highpass 0.5 Hz then lowpass 20 Hz, both 5th-order Butterworth, applied
// causally per channel; output length equals input length.
MultichannelRecording bandlimit(const MultichannelRecording& rec, double highpass_hz = 0.5,
                                double lowpass_hz = 20.0, int order = 5);

// Event-locked window cut from a recording. Window spans -pre..post around
// the stimulus onset; samples(c, onset_index) is the onset sample.
struct Epoch {
    Matrix samples; // C x T, microvolts
    std::size_t onset_index = 0;
    double sample_rate_hz = 0.0;
    protocol::StimulusEvent event;
};

struct EpochWindow {
    double pre_ms = 100.0;
    double post_ms = 800.0;
};

std::size_t window_pre_samples(double sample_rate_hz, const EpochWindow& w = EpochWindow{});
std::size_t window_post_samples(double sample_rate_hz, const EpochWindow& w = EpochWindow{});

std::vector<Epoch> segment_epochs(const MultichannelRecording& rec,
                                  std::span<const protocol::StimulusEvent> events,
                                  const EpochWindow& window = EpochWindow{});

// Subtract the pre-stimulus mean per channel.
Epoch baseline_correct(const Epoch& epoch);

} // namespace sabci::dsp

#endif
