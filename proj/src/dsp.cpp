#include "sabci/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sabci/error.hpp"
#include "sabci/numeric.hpp"

namespace sabci::dsp {

namespace {

using cplx = std::complex<double>;

struct Zpk {
    std::vector<cplx> zeros;
    std::vector<cplx> poles;
    double gain = 1.0;
};

Zpk analog_butterworth(const FilterSpec& spec, double warped_rad) {
    const int n = spec.order;
    Zpk zpk;
    zpk.poles.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double angle = M_PI * (2.0 * k + n + 1.0) / (2.0 * n);
        zpk.poles.emplace_back(std::cos(angle), std::sin(angle)); // left half-plane
    }
    if (spec.kind == FilterKind::lowpass) {
        for (cplx& p : zpk.poles) p *= warped_rad;
        zpk.gain = std::pow(warped_rad, n);
    } else {
        for (cplx& p : zpk.poles) p = warped_rad / p;
        zpk.zeros.assign(n, cplx(0.0, 0.0));
        zpk.gain = 1.0;
    }
    return zpk;
}

// bilinear transform s -> 2*fs*(z-1)/(z+1); zeros at infinity map to z = -1
Zpk bilinear(const Zpk& analog, double fs) {
    const double fs2 = 2.0 * fs;
    Zpk digital;
    cplx num(1.0, 0.0), den(1.0, 0.0);
    for (const cplx& z : analog.zeros) {
        digital.zeros.push_back((fs2 + z) / (fs2 - z));
        num *= fs2 - z;
    }
    for (const cplx& p : analog.poles) {
        digital.poles.push_back((fs2 + p) / (fs2 - p));
        den *= fs2 - p;
    }
    while (digital.zeros.size() < digital.poles.size())
        digital.zeros.emplace_back(-1.0, 0.0);
    digital.gain = analog.gain * (num / den).real();
    return digital;
}

// Split conjugate-symmetric roots into conjugate pairs plus reals.
void partition_roots(const std::vector<cplx>& roots, std::vector<cplx>& pairs,
                     std::vector<double>& reals) {
    constexpr double kImagTol = 1e-10;
    std::vector<cplx> complexes;
    for (const cplx& r : roots) {
        if (std::abs(r.imag()) <= kImagTol)
            reals.push_back(r.real());
        else if (r.imag() > 0.0)
            complexes.push_back(r); // keep upper-half representative
    }
    pairs = std::move(complexes);
}

} // namespace

std::vector<double> IirCascade::apply(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    apply_in_place(y);
    return y;
}

void IirCascade::apply_in_place(std::span<double> x) const {
    for (const Biquad& s : sections) {
        double s1 = 0.0, s2 = 0.0; // direct form II transposed state
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + s1;
            s1 = s.b1 * in - s.a1 * out + s2;
            s2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

std::complex<double> IirCascade::response(double w) const {
    const cplx z1 = std::exp(cplx(0.0, -w));
    const cplx z2 = z1 * z1;
    cplx h(1.0, 0.0);
    for (const Biquad& s : sections)
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
}

double IirCascade::magnitude_at_hz(double hz, double sample_rate_hz) const {
    return std::abs(response(2.0 * M_PI * hz / sample_rate_hz));
}

std::vector<double> IirCascade::pole_magnitudes() const {
    std::vector<double> mags;
    for (const Biquad& s : sections) {
        if (s.a2 == 0.0 && s.a1 == 0.0) continue;
        if (s.a2 == 0.0) {
            mags.push_back(std::abs(-s.a1)); // first-order section
            continue;
        }
        const double disc = s.a1 * s.a1 - 4.0 * s.a2;
        if (disc < 0.0) {
            mags.push_back(std::sqrt(s.a2)); // conjugate pair, |p|^2 = a2
            mags.push_back(std::sqrt(s.a2));
        } else {
            const double root = std::sqrt(disc);
            mags.push_back(std::abs((-s.a1 + root) / 2.0));
            mags.push_back(std::abs((-s.a1 - root) / 2.0));
        }
    }
    return mags;
}

IirCascade design_butterworth(const FilterSpec& spec, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0))
        fail(ErrorKind::invalid_argument, "sample rate must be positive");
    if (spec.order < 1)
        fail(ErrorKind::invalid_argument, "filter order must be at least 1");
    if (!(spec.cutoff_hz > 0.0) || spec.cutoff_hz >= sample_rate_hz / 2.0)
        fail(ErrorKind::invalid_argument,
             "cutoff " + std::to_string(spec.cutoff_hz) + " Hz must lie in (0, Nyquist) at fs=" +
                 std::to_string(sample_rate_hz));

    const double warped =
        2.0 * sample_rate_hz * std::tan(M_PI * spec.cutoff_hz / sample_rate_hz);
    const Zpk digital = bilinear(analog_butterworth(spec, warped), sample_rate_hz);

    std::vector<cplx> pole_pairs, zero_pairs;
    std::vector<double> real_poles, real_zeros;
    partition_roots(digital.poles, pole_pairs, real_poles);
    partition_roots(digital.zeros, zero_pairs, real_zeros);

    IirCascade cascade;
    for (std::size_t i = 0; i < pole_pairs.size(); ++i) {
        const cplx p = pole_pairs[i];
        const cplx z = zero_pairs[i];
        Biquad s;
        s.b0 = 1.0;
        s.b1 = -2.0 * z.real();
        s.b2 = std::norm(z);
        s.a1 = -2.0 * p.real();
        s.a2 = std::norm(p);
        cascade.sections.push_back(s);
    }
    for (std::size_t i = 0; i < real_poles.size(); ++i) {
        Biquad s;
        s.b0 = 1.0;
        s.b1 = -real_zeros[i];
        s.a1 = -real_poles[i];
        cascade.sections.push_back(s);
    }
    if (cascade.sections.empty())
        fail(ErrorKind::numeric, "filter design produced no sections");
    Biquad& first = cascade.sections.front();
    first.b0 *= digital.gain;
    first.b1 *= digital.gain;
    first.b2 *= digital.gain;
    return cascade;
}

MultichannelRecording bandlimit(const MultichannelRecording& rec, double highpass_hz,
                                double lowpass_hz, int order) {
    rec.validate();
    if (!(rec.sample_rate_hz > 2.0 * lowpass_hz))
        fail(ErrorKind::invalid_argument,
             "sample rate too low for the requested band (needs fs > " +
                 std::to_string(2.0 * lowpass_hz) + " Hz)");

    const IirCascade hp =
        design_butterworth({order, highpass_hz, FilterKind::highpass}, rec.sample_rate_hz);
    const IirCascade lp =
        design_butterworth({order, lowpass_hz, FilterKind::lowpass}, rec.sample_rate_hz);

    MultichannelRecording out = rec;
    for (std::size_t c = 0; c < out.channels(); ++c) {
        hp.apply_in_place(out.samples.row(c));
        lp.apply_in_place(out.samples.row(c));
    }
    return out;
}

std::size_t window_pre_samples(double sample_rate_hz, const EpochWindow& w) {
    return static_cast<std::size_t>(std::llround(w.pre_ms / 1000.0 * sample_rate_hz));
}

std::size_t window_post_samples(double sample_rate_hz, const EpochWindow& w) {
    return static_cast<std::size_t>(std::llround(w.post_ms / 1000.0 * sample_rate_hz));
}

std::vector<Epoch> segment_epochs(const MultichannelRecording& rec,
                                  std::span<const protocol::StimulusEvent> events,
                                  const EpochWindow& window) {
    rec.validate();
    const std::size_t pre = window_pre_samples(rec.sample_rate_hz, window);
    const std::size_t post = window_post_samples(rec.sample_rate_hz, window);
    const std::size_t total = pre + post;

    std::vector<Epoch> epochs;
    epochs.reserve(events.size());
    for (const protocol::StimulusEvent& event : events) {
        const std::int64_t onset_sample =
            std::llround(static_cast<double>(event.onset_ms) / 1000.0 * rec.sample_rate_hz);
        const std::int64_t start = onset_sample - static_cast<std::int64_t>(pre);
        const std::int64_t stop = onset_sample + static_cast<std::int64_t>(post);
        if (start < 0 || stop > static_cast<std::int64_t>(rec.length()))
            fail(ErrorKind::boundary,
                 "epoch for event at " + std::to_string(event.onset_ms) +
                     " ms falls outside the recording");

        Epoch epoch;
        epoch.samples = Matrix(rec.channels(), total);
        epoch.onset_index = pre;
        epoch.sample_rate_hz = rec.sample_rate_hz;
        epoch.event = event;
        for (std::size_t c = 0; c < rec.channels(); ++c) {
            const auto src = rec.samples.row(c);
            std::copy(src.begin() + start, src.begin() + stop, epoch.samples.row(c).begin());
        }
        epochs.push_back(std::move(epoch));
    }
    return epochs;
}

Epoch baseline_correct(const Epoch& epoch) {
    if (epoch.onset_index == 0)
        fail(ErrorKind::invalid_argument, "baseline correction needs a pre-stimulus window");
    Epoch out = epoch;
    for (std::size_t c = 0; c < out.samples.channels(); ++c) {
        const auto row = out.samples.row(c);
        const double baseline =
            numeric::mean(std::span<const double>(row.data(), epoch.onset_index));
        for (double& v : row) v -= baseline;
    }
    return out;
}

} // namespace sabci::dsp
