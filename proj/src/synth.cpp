#include "sabci/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "sabci/dsp.hpp"
#include "sabci/error.hpp"
#include "sabci/numeric.hpp"
#include "sabci/rng.hpp"

namespace sabci::synth {

namespace {

constexpr std::int64_t kLeadInMs = 1000; // room for the pre-stimulus window

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Spectrally shaped noise: unit-amplitude random-phase spectrum scaled by
// f^(-exponent/2), inverse-transformed and renormalized to sigma.
std::vector<double> shaped_noise(std::size_t length, double sample_rate_hz, double sigma,
                                 double exponent, DetRng& rng) {
    if (sigma <= 0.0) return std::vector<double>(length, 0.0);

    const std::size_t m = next_pow2(std::max<std::size_t>(length, 64));
    std::vector<std::complex<double>> spectrum(m, {0.0, 0.0});
    for (std::size_t k = 1; k < m / 2; ++k) {
        const double freq = static_cast<double>(k) * sample_rate_hz / static_cast<double>(m);
        const double amplitude = std::pow(freq, -exponent / 2.0);
        const double phase = 2.0 * M_PI * rng.uniform01();
        spectrum[k] = std::polar(amplitude, phase);
        spectrum[m - k] = std::conj(spectrum[k]);
    }
    spectrum[m / 2] = {0.0, 0.0};

    numeric::fft_radix2(spectrum, true);
    std::vector<double> noise(length);
    for (std::size_t t = 0; t < length; ++t) noise[t] = spectrum[t].real();

    const double measured = numeric::population_stdev(noise);
    if (measured > 0.0) {
        const double scale = sigma / measured;
        for (double& v : noise) v *= scale;
    }
    return noise;
}

// topography helpers; channel 0 is the most frontal site
double p300_weight(std::size_t channel, std::size_t n_channels) {
    if (n_channels == 1) return 1.0;
    const double frac = static_cast<double>(channel) / static_cast<double>(n_channels - 1);
    return 0.5 + 0.5 * frac; // parietal-dominant ramp, 0.5 front to 1.0 back
}

double blink_weight(std::size_t channel, std::size_t n_channels) {
    if (n_channels == 1) return 1.0;
    const double frac = static_cast<double>(channel) / static_cast<double>(n_channels - 1);
    return (3.0 - 2.0 * frac) / 3.0; // 3:1 frontal over posterior
}

void add_gaussian_bump(Matrix& m, double sample_rate_hz, double center_ms, double sigma_ms,
                       double amplitude, double (*weight)(std::size_t, std::size_t)) {
    const double sigma_samples = sigma_ms / 1000.0 * sample_rate_hz;
    const double center = center_ms / 1000.0 * sample_rate_hz;
    const std::int64_t lo =
        std::max<std::int64_t>(0, std::llround(center - 4.0 * sigma_samples));
    const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(m.samples()) - 1,
                                                   std::llround(center + 4.0 * sigma_samples));
    for (std::size_t c = 0; c < m.channels(); ++c) {
        const double w = weight(c, m.channels());
        auto row = m.row(c);
        for (std::int64_t t = lo; t <= hi; ++t) {
            const double d = (static_cast<double>(t) - center) / sigma_samples;
            row[t] += amplitude * w * std::exp(-0.5 * d * d);
        }
    }
}

// Smooth biphasic blink: difference of Gaussians tapered by a Hann window
// so the template is exactly zero outside its 400 ms support.
void add_blink(Matrix& m, double sample_rate_hz, double center_ms, double amplitude) {
    const double half_samples = 200.0 / 1000.0 * sample_rate_hz;
    const double sigma_a = 60.0 / 1000.0 * sample_rate_hz;
    const double sigma_b = 120.0 / 1000.0 * sample_rate_hz;
    const double center = center_ms / 1000.0 * sample_rate_hz;
    const std::int64_t lo = std::max<std::int64_t>(0, std::llround(center - half_samples));
    const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(m.samples()) - 1,
                                                   std::llround(center + half_samples));
    const double peak = 1.0 - 0.6; // template value at the center
    for (std::size_t c = 0; c < m.channels(); ++c) {
        const double w = blink_weight(c, m.channels());
        auto row = m.row(c);
        for (std::int64_t t = lo; t <= hi; ++t) {
            const double d = static_cast<double>(t) - center;
            if (std::abs(d) >= half_samples) continue;
            const double dog = std::exp(-0.5 * (d / sigma_a) * (d / sigma_a)) -
                               0.6 * std::exp(-0.5 * (d / sigma_b) * (d / sigma_b));
            const double hann = 0.5 * (1.0 + std::cos(M_PI * d / half_samples));
            row[t] += amplitude * w * dog * hann / peak;
        }
    }
}

MultichannelRecording blank_like(double fs, const std::vector<std::string>& names,
                                 std::size_t channels, std::size_t length) {
    MultichannelRecording rec;
    rec.sample_rate_hz = fs;
    rec.channel_names = names;
    rec.samples = Matrix(channels, length);
    return rec;
}

} // namespace

void SynthSpec::validate() const {
    if (n_channels < 1) fail(ErrorKind::invalid_configuration, "need at least one channel");
    if (!(sample_rate_hz > 0.0))
        fail(ErrorKind::invalid_configuration, "sample rate must be positive");
    if (p300_amplitude_uv < 0.0 || blink_amplitude_uv < 0.0 || drift_amplitude_uv < 0.0 ||
        noise_sigma_uv < 0.0)
        fail(ErrorKind::invalid_configuration, "amplitudes must be nonnegative");
    const dsp::EpochWindow window;
    if (p300_latency_ms <= 0.0 || p300_latency_ms >= window.post_ms)
        fail(ErrorKind::invalid_configuration,
             "P300 latency must fall inside the post-stimulus epoch window");
}

std::pair<MultichannelRecording, GroundTruth> synth_session(const protocol::SessionPlan& plan,
                                                            const SynthSpec& spec) {
    spec.validate();
    if (plan.trials.empty())
        fail(ErrorKind::invalid_configuration, "session plan has no trials");

    // session-clock events, shifted by the lead-in
    std::vector<protocol::StimulusEvent> events;
    std::int64_t last_onset_ms = 0;
    for (const protocol::TrialPlan& trial : plan.trials) {
        for (const protocol::StimulusEvent& e : trial.events) {
            protocol::StimulusEvent shifted = e;
            shifted.onset_ms = trial.start_ms + e.onset_ms + kLeadInMs;
            last_onset_ms = std::max(last_onset_ms, shifted.onset_ms);
            events.push_back(shifted);
        }
    }
    const std::int64_t total_ms = last_onset_ms + 1500; // post-window + margin
    const std::size_t length = static_cast<std::size_t>(
        std::llround(static_cast<double>(total_ms) / 1000.0 * spec.sample_rate_hz));

    const std::vector<std::string> names = default_channel_names(spec.n_channels);
    GroundTruth truth;
    truth.events = events;
    truth.clean = blank_like(spec.sample_rate_hz, names, spec.n_channels, length);
    truth.p300 = blank_like(spec.sample_rate_hz, names, spec.n_channels, length);
    truth.blinks = blank_like(spec.sample_rate_hz, names, spec.n_channels, length);
    truth.drift = blank_like(spec.sample_rate_hz, names, spec.n_channels, length);

    // background noise, one deterministic substream per channel
    for (std::size_t c = 0; c < spec.n_channels; ++c) {
        DetRng rng(derive_seed(spec.seed, 1000 + c));
        const std::vector<double> noise = shaped_noise(length, spec.sample_rate_hz,
                                                       spec.noise_sigma_uv,
                                                       spec.noise_exponent, rng);
        std::copy(noise.begin(), noise.end(), truth.clean.samples.row(c).begin());
    }

    // P300 bump after every target onset
    if (spec.p300_amplitude_uv > 0.0) {
        for (const protocol::StimulusEvent& e : events) {
            if (!e.is_target) continue;
            add_gaussian_bump(truth.p300.samples, spec.sample_rate_hz,
                              static_cast<double>(e.onset_ms) + spec.p300_latency_ms,
                              spec.p300_width_ms, spec.p300_amplitude_uv, p300_weight);
        }
    }
    truth.clean.samples += truth.p300.samples;

    // blinks at the configured rate, exponential inter-arrival times
    if (spec.blink_amplitude_uv > 0.0 && spec.blink_rate_per_min > 0.0) {
        DetRng rng(derive_seed(spec.seed, 2));
        const double rate_per_ms = spec.blink_rate_per_min / 60000.0;
        double t_ms = 500.0 + rng.exponential(rate_per_ms);
        while (t_ms < static_cast<double>(total_ms) - 500.0) {
            add_blink(truth.blinks.samples, spec.sample_rate_hz, t_ms, spec.blink_amplitude_uv);
            t_ms += rng.exponential(rate_per_ms);
        }
    }

    // slow sinusoidal drift, random phase per channel
    if (spec.drift_amplitude_uv > 0.0) {
        DetRng rng(derive_seed(spec.seed, 3));
        for (std::size_t c = 0; c < spec.n_channels; ++c) {
            const double phase = 2.0 * M_PI * rng.uniform01();
            auto row = truth.drift.samples.row(c);
            for (std::size_t t = 0; t < length; ++t)
                row[t] = spec.drift_amplitude_uv *
                         std::sin(2.0 * M_PI * spec.drift_freq_hz *
                                      static_cast<double>(t) / spec.sample_rate_hz +
                                  phase);
        }
    }

    MultichannelRecording contaminated = truth.clean;
    contaminated.samples += truth.blinks.samples;
    contaminated.samples += truth.drift.samples;
    return {std::move(contaminated), std::move(truth)};
}

protocol::ResponseLog synth_response_log(const protocol::SessionPlan& plan, double latency_ms,
                                         double hit_prob, std::uint64_t seed) {
    if (!plan.trials.empty() && latency_ms >= static_cast<double>(plan.trials.front().soa_ms))
        fail(ErrorKind::invalid_argument, "latency must be shorter than the SOA");
    if (!(hit_prob >= 0.0 && hit_prob <= 1.0))
        fail(ErrorKind::invalid_argument, "hit probability must lie in [0, 1]");

    DetRng rng(seed);
    protocol::ResponseLog log;
    for (const protocol::TrialPlan& trial : plan.trials) {
        for (const protocol::StimulusEvent& e : trial.events) {
            if (!e.is_target) continue;
            if (rng.bernoulli(hit_prob))
                log.presses_ms.push_back(trial.start_ms + e.onset_ms +
                                         static_cast<std::int64_t>(std::llround(latency_ms)));
        }
    }
    std::sort(log.presses_ms.begin(), log.presses_ms.end());
    return log;
}

} // namespace sabci::synth
