#ifndef SABCI_SYNTH_HPP
#define SABCI_SYNTH_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sabci/matrix.hpp"
#include "sabci/protocol.hpp"

namespace sabci::synth {

struct SynthSpec {
    std::uint64_t seed = 1;
    std::size_t n_channels = 8;
    double sample_rate_hz = 256.0;

    double p300_amplitude_uv = 5.0;
    double p300_latency_ms = 300.0; // bump center after each target onset
    double p300_width_ms = 45.0;    // gaussian sigma

    double noise_sigma_uv = 10.0;
    double noise_exponent = 1.0; // spectral slope, amplitude ~ f^(-exponent/2)

    double blink_amplitude_uv = 0.0;
    double blink_rate_per_min = 0.0;

    double drift_amplitude_uv = 0.0;
    double drift_freq_hz = 0.2;

    void validate() const;
};

// Everything the verification chain needs: the artifact-free signal, each
// injected component kept separately, and the session-clock event list.
// contaminated == clean + blinks + drift holds exactly as stored.
struct GroundTruth {
    MultichannelRecording clean;  // background noise + P300 deflections
    MultichannelRecording p300;   // P300 component alone (already part of clean)
    MultichannelRecording blinks;
    MultichannelRecording drift;
    std::vector<protocol::StimulusEvent> events; // onsets on the recording clock
};

// Deterministic synthetic EEG for a session plan: 1/f-shaped background
// noise, a fixed-topography P300 bump after every target, frontal-weighted
// biphasic blink templates at the configured rate, optional slow drift.
std::pair<MultichannelRecording, GroundTruth> synth_session(const protocol::SessionPlan& plan,
                                                            const SynthSpec& spec);

// Simulated subject: presses at target onset + latency with probability
// hit_prob, on the session-plan clock.
protocol::ResponseLog synth_response_log(const protocol::SessionPlan& plan, double latency_ms,
                                         double hit_prob, std::uint64_t seed);

} // namespace sabci::synth

#endif
