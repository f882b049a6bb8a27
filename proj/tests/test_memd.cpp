#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sabci/error.hpp"
#include "sabci/memd.hpp"
#include "sabci/numeric.hpp"
#include "sabci/rng.hpp"

using namespace sabci;
using namespace sabci::memd;

namespace {

constexpr double kFs = 256.0;

Matrix multichannel_tone(std::size_t channels, std::size_t samples, double freq,
                         std::span<const double> amplitudes, double phase = 0.0) {
    Matrix m(channels, samples);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t t = 0; t < samples; ++t)
            m(c, t) = amplitudes[c] *
                      std::sin(2.0 * M_PI * freq * static_cast<double>(t) / kFs + phase);
    return m;
}

Matrix seeded_noise(std::size_t channels, std::size_t samples, std::uint64_t seed) {
    DetRng rng(seed);
    Matrix m(channels, samples);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t t = 0; t < samples; ++t) m(c, t) = rng.normal();
    return m;
}

double rel_error(const Matrix& a, const Matrix& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        num += d * d;
        den += a.data()[i] * a.data()[i];
    }
    return std::sqrt(num / den);
}

double norm_of(const Matrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += m.data()[i] * m.data()[i];
    return std::sqrt(acc);
}

// independent plateau-rule oracle for small series
std::vector<std::size_t> maxima_indices_oracle(const std::vector<double>& v) {
    std::vector<std::size_t> result;
    const std::size_t n = v.size();
    for (std::size_t s = 1; s + 1 < n; ++s) {
        if (s > 0 && v[s - 1] == v[s]) continue; // not the start of a run
        std::size_t e = s;
        while (e + 1 < n && v[e + 1] == v[s]) ++e;
        const bool interior = s >= 1 && e + 1 < n;
        if (interior && v[s - 1] < v[s] && v[e + 1] < v[s]) result.push_back((s + e) / 2);
    }
    return result;
}

} // namespace

TEST_CASE("radical inverse reverses the digits") {
    CHECK(radical_inverse(2, 1) == doctest::Approx(0.5));
    CHECK(radical_inverse(2, 2) == doctest::Approx(0.25));
    CHECK(radical_inverse(2, 3) == doctest::Approx(0.75));
    CHECK(radical_inverse(3, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(radical_inverse(3, 5) == doctest::Approx(2.0 / 3.0 + 1.0 / 9.0));
}

TEST_CASE("hammersley directions are unit length and deterministic") {
    const DirectionSet set = hammersley_directions(64, 8);
    REQUIRE(set.count() == 64);
    for (std::size_t k = 0; k < set.count(); ++k) {
        double norm_sq = 0.0;
        for (double v : set.vectors.row(k)) norm_sq += v * v;
        CHECK(std::abs(std::sqrt(norm_sq) - 1.0) < 1e-12);
    }
    const DirectionSet again = hammersley_directions(64, 8);
    CHECK(set.vectors == again.vectors);
    CHECK_THROWS_AS(hammersley_directions(64, 1), Error);
}

TEST_CASE("two-dimensional directions follow the circle map") {
    const DirectionSet set = hammersley_directions(4, 2);
    const double expected[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(set.vectors(k, 0) == doctest::Approx(expected[k][0]).epsilon(1e-12));
        CHECK(set.vectors(k, 1) == doctest::Approx(expected[k][1]).epsilon(1e-12));
    }
}

TEST_CASE("direction sets are symmetric under negation") {
    for (std::size_t dims : {3u, 8u}) {
        const DirectionSet set = hammersley_directions(16, dims);
        for (std::size_t k = 0; k < 8; ++k)
            for (std::size_t d = 0; d < dims; ++d)
                CHECK(set.vectors(k, d) == doctest::Approx(-set.vectors(k + 8, d)));
    }
}

TEST_CASE("project computes per-sample inner products") {
    Matrix signal(2, 5);
    for (std::size_t t = 0; t < 5; ++t) {
        signal(0, t) = static_cast<double>(t);
        signal(1, t) = static_cast<double>(t);
    }

    SUBCASE("basis vector extracts a channel") {
        const std::vector<double> basis = {1.0, 0.0};
        const std::vector<double> p = project(signal, basis);
        for (std::size_t t = 0; t < 5; ++t) CHECK(p[t] == doctest::Approx(signal(0, t)));
    }
    SUBCASE("zero signal projects to zero") {
        Matrix zero(2, 5);
        const std::vector<double> dir = {0.6, 0.8};
        for (double v : project(zero, dir)) CHECK(v == 0.0);
    }
    SUBCASE("diagonal direction scales a common signal by sqrt(2)") {
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        const std::vector<double> dir = {inv_sqrt2, inv_sqrt2};
        const std::vector<double> p = project(signal, dir);
        for (std::size_t t = 0; t < 5; ++t)
            CHECK(p[t] == doctest::Approx(signal(0, t) * std::sqrt(2.0)));
    }
    SUBCASE("dimension mismatch is rejected") {
        const std::vector<double> bad = {1.0, 0.0, 0.0};
        CHECK_THROWS_AS(project(signal, bad), Error);
    }
}

TEST_CASE("find_maxima handles spikes, monotone series, and plateaus") {
    const std::vector<double> spike = {0, 1, 0};
    auto m = find_maxima(spike);
    REQUIRE(m.size() == 1);
    CHECK(m[0].index == 1);
    CHECK(m[0].value == 1.0);

    const std::vector<double> monotone = {0, 1, 2, 3, 4};
    CHECK(find_maxima(monotone).empty());

    const std::vector<double> plateau = {0, 2, 2, 0};
    m = find_maxima(plateau);
    REQUIRE(m.size() == 1);
    CHECK(m[0].index == 1); // midpoint, rounded down
    CHECK(m[0].value == 2.0);
}

TEST_CASE("find_maxima agrees with the oracle on every small series") {
    // exhaustive over length-6 series with values in {0,1,2}
    std::vector<double> v(6);
    for (int code = 0; code < 729; ++code) {
        int c = code;
        for (std::size_t i = 0; i < 6; ++i) {
            v[i] = static_cast<double>(c % 3);
            c /= 3;
        }
        const auto got = find_maxima(v);
        const auto expected = maxima_indices_oracle(v);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].index == expected[i]);
    }
}

TEST_CASE("envelope_mean rejects signals without enough extrema") {
    const DirectionSet dirs = hammersley_directions(16, 2);
    Matrix constant(2, 64, 3.0);
    try {
        envelope_mean(constant, dirs);
        FAIL("expected insufficient-extrema");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::insufficient_extrema);
    }
    Matrix zero(2, 64);
    CHECK_THROWS_AS(envelope_mean(zero, dirs), Error);
}

TEST_CASE("envelope mean of a symmetric oscillation is near zero") {
    const std::vector<double> amplitudes(8, 1.0);
    const Matrix tone = multichannel_tone(8, 512, 5.0, amplitudes);
    const DirectionSet dirs = hammersley_directions(64, 8);
    const Matrix m = envelope_mean(tone, dirs);
    CHECK(norm_of(m) <= 0.05 * norm_of(tone));
}

TEST_CASE("sift returns an exact additive split") {
    const Matrix noise = seeded_noise(4, 256, 7);
    const DirectionSet dirs = hammersley_directions(16, 4);
    const SiftResult result = sift(noise, dirs, SiftConfig{16});
    for (std::size_t i = 0; i < noise.size(); ++i)
        CHECK(result.imf.data()[i] + result.remainder.data()[i] ==
              doctest::Approx(noise.data()[i]).epsilon(1e-15));
}

TEST_CASE("sifting a pure tone keeps it in the first IMF") {
    std::vector<double> amplitudes = {1.0, 0.8, 1.3, 0.6, 1.1, 0.9, 1.2, 0.7};
    const Matrix tone = multichannel_tone(8, 512, 10.0, amplitudes);
    const SiftResult result = sift(tone, hammersley_directions(64, 8), SiftConfig{});
    for (std::size_t c = 0; c < 8; ++c) {
        const auto imf = result.imf.row(c);
        const auto src = tone.row(c);
        CHECK(numeric::pearson_correlation(imf, src) > 0.99);
    }
}

TEST_CASE("sift is deterministic") {
    const Matrix noise = seeded_noise(4, 256, 21);
    const DirectionSet dirs = hammersley_directions(16, 4);
    const SiftResult a = sift(noise, dirs, SiftConfig{16});
    const SiftResult b = sift(noise, dirs, SiftConfig{16});
    CHECK(a.imf == b.imf);
    CHECK(a.remainder == b.remainder);
}

TEST_CASE("decomposing a zero signal yields no IMFs and a zero residue") {
    Matrix zero(8, 128);
    const IMFStack stack = memd_decompose(zero, SiftConfig{});
    CHECK(stack.count() == 0);
    CHECK(stack.residue == zero);
}

TEST_CASE("decomposition is complete on seeded random input") {
    const Matrix noise = seeded_noise(8, 512, 12345);
    const IMFStack stack = memd_decompose(noise, SiftConfig{64});
    CHECK(rel_error(noise, stack.reconstruct()) < 1e-8);
    for (const Matrix& imf : stack.imfs) {
        CHECK(imf.channels() == 8);
        CHECK(imf.samples() == 512);
    }
    CHECK(stack.residue.channels() == 8);
}

TEST_CASE("decomposition is bit-for-bit deterministic") {
    const Matrix noise = seeded_noise(8, 256, 999);
    const IMFStack a = memd_decompose(noise, SiftConfig{});
    const IMFStack b = memd_decompose(noise, SiftConfig{});
    REQUIRE(a.count() == b.count());
    for (std::size_t m = 0; m < a.count(); ++m) CHECK(a.imfs[m] == b.imfs[m]);
    CHECK(a.residue == b.residue);
}

TEST_CASE("a 2 Hz + 10 Hz two-tone separates into aligned IMFs") {
    std::vector<double> amp_fast = {1.0, 0.8, 1.3, 0.6, 1.1, 0.9, 1.2, 0.7};
    std::vector<double> amp_slow = {0.9, 1.2, 0.7, 1.1, 0.8, 1.3, 0.6, 1.0};
    const Matrix fast = multichannel_tone(8, 512, 10.0, amp_fast);
    const Matrix slow = multichannel_tone(8, 512, 2.0, amp_slow, 0.7);
    const Matrix mix = fast + slow;

    const IMFStack stack = memd_decompose(mix, SiftConfig{});
    REQUIRE(stack.count() >= 2);

    for (std::size_t c = 0; c < 8; ++c) {
        double best_fast = -1.0, best_slow = -1.0;
        std::size_t arg_fast = 0, arg_slow = 0;
        for (std::size_t m = 0; m < stack.count(); ++m) {
            const double corr_fast =
                numeric::pearson_correlation(stack.imfs[m].row(c), fast.row(c));
            const double corr_slow =
                numeric::pearson_correlation(stack.imfs[m].row(c), slow.row(c));
            if (corr_fast > best_fast) {
                best_fast = corr_fast;
                arg_fast = m;
            }
            if (corr_slow > best_slow) {
                best_slow = corr_slow;
                arg_slow = m;
            }
        }
        CHECK(best_fast > 0.95);
        CHECK(best_slow > 0.95);
        CHECK(arg_fast < arg_slow); // faster oscillation extracted first
    }
}

TEST_CASE("broadband noise decomposes into a quasi-dyadic filter bank") {
    const Matrix noise = seeded_noise(8, 1024, 2024);
    const IMFStack stack = memd_decompose(noise, SiftConfig{});
    REQUIRE(stack.count() >= 3);
    std::vector<double> mean_crossings;
    for (const Matrix& imf : stack.imfs) {
        double acc = 0.0;
        for (std::size_t c = 0; c < imf.channels(); ++c)
            acc += static_cast<double>(numeric::zero_crossings(imf.row(c)));
        mean_crossings.push_back(acc / static_cast<double>(imf.channels()));
    }
    for (std::size_t k = 1; k < mean_crossings.size(); ++k)
        CHECK(mean_crossings[k] < mean_crossings[k - 1]);
}

TEST_CASE("remove_artifact_imfs") {
    SUBCASE("reconstruction is a no-op when everything stays below threshold") {
        const Matrix noise = seeded_noise(8, 256, 5) * 0.5; // well under 20 uV
        const IMFStack stack = memd_decompose(noise, SiftConfig{});
        const CleanResult result = remove_artifact_imfs(stack, 20.0);
        CHECK(result.removed_count == 0);
        CHECK(rel_error(noise, result.cleaned) < 1e-8);
    }
    SUBCASE("an injected blink-sized component is removed") {
        std::vector<double> amplitudes(8, 3.0);
        Matrix signal = multichannel_tone(8, 512, 8.0, amplitudes);
        // 100 uV smooth bump confined to channel 2
        for (std::size_t t = 0; t < 512; ++t) {
            const double d = (static_cast<double>(t) - 256.0) / 40.0;
            signal(2, t) += 100.0 * std::exp(-0.5 * d * d);
        }
        const IMFStack stack = memd_decompose(signal, SiftConfig{});
        const CleanResult result = remove_artifact_imfs(stack, 20.0);
        CHECK(result.removed_count > 0);
        const auto row = result.cleaned.row(2);
        const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        CHECK(*hi - *lo < 20.0);
        // untouched channels keep their tone
        CHECK(numeric::pearson_correlation(result.cleaned.row(0), signal.row(0)) > 0.99);
    }
    SUBCASE("threshold zero removes every oscillating component") {
        const Matrix noise = seeded_noise(4, 128, 77);
        const IMFStack stack = memd_decompose(noise, SiftConfig{16});
        const CleanResult result = remove_artifact_imfs(stack, 0.0);
        for (std::size_t i = 0; i < result.cleaned.size(); ++i)
            CHECK(result.cleaned.data()[i] == 0.0);
    }
    SUBCASE("cleaning is idempotent on the surviving stack") {
        Matrix signal = seeded_noise(4, 256, 31) * 4.0;
        for (std::size_t t = 0; t < 256; ++t) {
            const double d = (static_cast<double>(t) - 128.0) / 30.0;
            signal(1, t) += 60.0 * std::exp(-0.5 * d * d);
        }
        const IMFStack stack = memd_decompose(signal, SiftConfig{16});
        const CleanResult once = remove_artifact_imfs(stack, 20.0);
        const CleanResult twice = remove_artifact_imfs(once.surviving, 20.0);
        CHECK(once.cleaned == twice.cleaned);
        CHECK(twice.removed_count == 0);
    }
}
