#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "sabci/error.hpp"
#include "sabci/numeric.hpp"
#include "sabci/protocol.hpp"
#include "sabci/rng.hpp"
#include "sabci/stats.hpp"
#include "sabci/synth.hpp"

using namespace sabci;
using namespace sabci::stats;

namespace {

constexpr double kFs = 256.0;

dsp::Epoch make_epoch(std::size_t channels, std::function<double(std::size_t, std::size_t)> f) {
    dsp::Epoch epoch;
    epoch.samples = Matrix(channels, 231);
    epoch.onset_index = 26;
    epoch.sample_rate_hz = kFs;
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t t = 0; t < 231; ++t) epoch.samples(c, t) = f(c, t);
    return epoch;
}

dsp::Epoch bump_epoch(double amplitude, double latency_ms, double sigma_ms,
                      double noise_sigma, DetRng& rng) {
    return make_epoch(2, [&](std::size_t, std::size_t t) {
        const double t_ms = (static_cast<double>(t) - 26.0) * 1000.0 / kFs;
        const double d = (t_ms - latency_ms) / sigma_ms;
        return amplitude * std::exp(-0.5 * d * d) + noise_sigma * rng.normal();
    });
}

ERPAverage avg_of(std::vector<dsp::Epoch> epochs, Condition c) {
    return grand_average(epochs, c);
}

// brute-force oracle: enumerate every n1-subset of the combined midranks
struct BruteForceRankSum {
    double statistic;
    double p_two_sided;

    BruteForceRankSum(const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> combined(a);
        combined.insert(combined.end(), b.begin(), b.end());
        const std::vector<double> ranks = numeric::midranks(combined);
        const std::size_t n = combined.size(), n1 = a.size();

        statistic = 0.0;
        for (std::size_t i = 0; i < n1; ++i) statistic += ranks[i];

        std::vector<bool> mask(n, false);
        std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n1), true);
        std::sort(mask.begin(), mask.end()); // start from the lexicographically first
        std::size_t count_le = 0, count_ge = 0, total = 0;
        do {
            double w = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask[i]) w += ranks[i];
            ++total;
            if (w <= statistic + 1e-9) ++count_le;
            if (w >= statistic - 1e-9) ++count_ge;
        } while (std::next_permutation(mask.begin(), mask.end()));
        p_two_sided = std::min(
            1.0, 2.0 * std::min(static_cast<double>(count_le) / static_cast<double>(total),
                                static_cast<double>(count_ge) / static_cast<double>(total)));
    }
};

} // namespace

TEST_CASE("grand_average basics") {
    DetRng rng(3);
    SUBCASE("one epoch averages to itself") {
        const dsp::Epoch epoch = bump_epoch(5.0, 300.0, 50.0, 1.0, rng);
        const ERPAverage erp = avg_of({epoch}, Condition::target);
        CHECK(erp.n_epochs == 1);
        CHECK(erp.mean == epoch.samples);
    }
    SUBCASE("an epoch and its negation cancel") {
        const dsp::Epoch epoch = bump_epoch(5.0, 300.0, 50.0, 1.0, rng);
        dsp::Epoch negated = epoch;
        negated.samples *= -1.0;
        const ERPAverage erp = avg_of({epoch, negated}, Condition::target);
        for (std::size_t i = 0; i < erp.mean.size(); ++i)
            CHECK(erp.mean.data()[i] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("100 noisy bump epochs recover the bump within 3 SEM") {
        const double noise_sigma = 10.0;
        std::vector<dsp::Epoch> epochs;
        for (int i = 0; i < 100; ++i)
            epochs.push_back(bump_epoch(5.0, 300.0, 50.0, noise_sigma, rng));
        const ERPAverage erp = grand_average(epochs, Condition::target);
        const std::size_t peak_index = 26 + static_cast<std::size_t>(std::llround(0.3 * kFs));
        const double sem = noise_sigma / std::sqrt(100.0);
        CHECK(std::abs(erp.mean(0, peak_index) - 5.0) < 3.0 * sem);
    }
    SUBCASE("averaging is permutation invariant") {
        std::vector<dsp::Epoch> epochs;
        for (int i = 0; i < 7; ++i) epochs.push_back(bump_epoch(4.0, 280.0, 40.0, 5.0, rng));
        auto shuffled = epochs;
        std::rotate(shuffled.begin(), shuffled.begin() + 3, shuffled.end());
        const ERPAverage a = grand_average(epochs, Condition::target);
        const ERPAverage b = grand_average(shuffled, Condition::target);
        for (std::size_t i = 0; i < a.mean.size(); ++i)
            CHECK(a.mean.data()[i] == doctest::Approx(b.mean.data()[i]).epsilon(1e-12));
    }
    SUBCASE("mismatched shapes are rejected") {
        dsp::Epoch small;
        small.samples = Matrix(1, 100);
        small.onset_index = 26;
        small.sample_rate_hz = kFs;
        const dsp::Epoch normal = bump_epoch(1.0, 300.0, 50.0, 0.0, rng);
        CHECK_THROWS_AS(avg_of({normal, small}, Condition::target), Error);
        CHECK_THROWS_AS(avg_of({}, Condition::target), Error);
    }
}

TEST_CASE("p300_score") {
    DetRng rng(5);
    SUBCASE("flat ERP scores zero with the latency tie broken earliest") {
        const dsp::Epoch flat = make_epoch(2, [](std::size_t, std::size_t) { return 0.0; });
        const ERPAverage erp = avg_of({flat}, Condition::target);
        const P300Score score = p300_score(erp);
        for (double m : score.per_channel_mean_uv) CHECK(m == 0.0);
        for (double lat : score.peak_latency_ms) CHECK(lat == doctest::Approx(250.0));
    }
    SUBCASE("gaussian bump peaks at its center") {
        const dsp::Epoch epoch = bump_epoch(5.0, 300.0, 40.0, 0.0, rng);
        const ERPAverage erp = avg_of({epoch}, Condition::target);
        const P300Score score = p300_score(erp);
        const double one_sample_ms = 1000.0 / kFs;
        for (double lat : score.peak_latency_ms)
            CHECK(std::abs(lat - 300.0) <= one_sample_ms + 1e-9);
        for (double m : score.per_channel_mean_uv) CHECK(m > 0.0);
    }
    SUBCASE("negated bump mirrors the window mean") {
        const dsp::Epoch epoch = bump_epoch(5.0, 300.0, 40.0, 0.0, rng);
        dsp::Epoch negated = epoch;
        negated.samples *= -1.0;
        const P300Score pos = p300_score(avg_of({epoch}, Condition::target));
        const P300Score neg = p300_score(avg_of({negated}, Condition::target));
        CHECK(neg.per_channel_mean_uv[0] ==
              doctest::Approx(-pos.per_channel_mean_uv[0]).epsilon(1e-12));
    }
    SUBCASE("window outside the epoch is rejected") {
        const dsp::Epoch epoch = bump_epoch(5.0, 300.0, 40.0, 0.0, rng);
        const ERPAverage erp = avg_of({epoch}, Condition::target);
        CHECK_THROWS_AS(p300_score(erp, 250.0, 900.0), Error);
        CHECK_THROWS_AS(p300_score(erp, -50.0, 200.0), Error);
    }
    SUBCASE("window mean ignores signal outside the window") {
        const dsp::Epoch base = bump_epoch(5.0, 300.0, 30.0, 0.0, rng);
        dsp::Epoch spiked = base;
        spiked.samples(0, 10) += 100.0; // pre-stimulus, outside [250, 500]
        const P300Score a = p300_score(avg_of({base}, Condition::target));
        const P300Score b = p300_score(avg_of({spiked}, Condition::target));
        CHECK(a.per_channel_mean_uv[0] == doctest::Approx(b.per_channel_mean_uv[0]));
    }
}

TEST_CASE("wilcoxon_rank_sum worked examples") {
    SUBCASE("identical multisets give maximal p") {
        const std::vector<double> a = {1, 2, 3};
        const RankTestResult r = wilcoxon_rank_sum(a, a);
        CHECK(r.p_value >= 0.99);
    }
    SUBCASE("a={1,2}, b={3,4} has exact two-sided p = 1/3") {
        const RankTestResult r = wilcoxon_rank_sum(std::vector<double>{1, 2},
                                                   std::vector<double>{3, 4});
        CHECK(r.exact);
        CHECK(r.statistic == doctest::Approx(3.0)); // ranks 1+2
        CHECK(r.p_value == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
    }
    SUBCASE("scaling both samples leaves the test unchanged") {
        const std::vector<double> a = {0.3, 1.2, 2.7, 0.9};
        const std::vector<double> b = {1.5, 2.2, 0.4};
        const RankTestResult r1 = wilcoxon_rank_sum(a, b);
        std::vector<double> a10(a), b10(b);
        for (double& v : a10) v *= 10.0;
        for (double& v : b10) v *= 10.0;
        const RankTestResult r2 = wilcoxon_rank_sum(a10, b10);
        CHECK(r1.statistic == doctest::Approx(r2.statistic));
        CHECK(r1.p_value == doctest::Approx(r2.p_value));
    }
    SUBCASE("empty samples are rejected") {
        CHECK_THROWS_AS(wilcoxon_rank_sum({}, std::vector<double>{1.0}), Error);
    }
}

TEST_CASE("exact wilcoxon matches brute-force enumeration for n1+n2 <= 10") {
    DetRng rng(17);
    for (std::size_t n1 = 1; n1 <= 9; ++n1) {
        for (std::size_t n2 = 1; n1 + n2 <= 10; ++n2) {
            for (int rep = 0; rep < 8; ++rep) {
                std::vector<double> a(n1), b(n2);
                // small integer alphabet so ties are exercised
                for (double& v : a) v = static_cast<double>(rng.below(5));
                for (double& v : b) v = static_cast<double>(rng.below(5));
                const RankTestResult r = wilcoxon_rank_sum(a, b);
                const BruteForceRankSum oracle(a, b);
                REQUIRE(r.exact);
                CHECK(r.statistic == doctest::Approx(oracle.statistic).epsilon(1e-12));
                CHECK(r.p_value == doctest::Approx(oracle.p_two_sided).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("large-sample wilcoxon approximates the exact tail") {
    DetRng rng(23);
    std::vector<double> a(30), b(40);
    for (double& v : a) v = rng.normal() + 1.0;
    for (double& v : b) v = rng.normal();
    const RankTestResult r = wilcoxon_rank_sum(a, b);
    CHECK_FALSE(r.exact);
    CHECK(r.p_value < 0.01); // unit shift at these sizes is highly significant
    CHECK(r.p_value > 0.0);
}

TEST_CASE("auc conventions") {
    SUBCASE("worked examples") {
        CHECK(auc(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}) ==
              doctest::Approx(1.0));
        CHECK(auc(std::vector<double>{4, 5, 6}, std::vector<double>{1, 2, 3}) ==
              doctest::Approx(0.0));
        const std::vector<double> same = {2, 2, 2};
        CHECK(auc(same, same) == doctest::Approx(0.5));
    }
    SUBCASE("auc(a,b) + auc(b,a) == 1") {
        DetRng rng(9);
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> a(6), b(9);
            for (double& v : a) v = static_cast<double>(rng.below(4));
            for (double& v : b) v = static_cast<double>(rng.below(4));
            CHECK(auc(a, b) + auc(b, a) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("separability scores window features") {
    DetRng rng(31);
    std::vector<dsp::Epoch> targets, nontargets;
    SUBCASE("identical distributions give AUC 0.5") {
        const dsp::Epoch flat = make_epoch(2, [](std::size_t, std::size_t) { return 1.5; });
        targets = {flat, flat, flat};
        nontargets = {flat, flat, flat};
        const SeparabilityResult r = separability(targets, nontargets);
        CHECK(r.auc == doctest::Approx(0.5));
        CHECK(r.rank_test.p_value >= 0.99);
    }
    SUBCASE("strong bumps separate perfectly") {
        for (int i = 0; i < 5; ++i) {
            targets.push_back(bump_epoch(20.0, 350.0, 60.0, 0.5, rng));
            nontargets.push_back(bump_epoch(0.0, 350.0, 60.0, 0.5, rng));
        }
        const SeparabilityResult r = separability(targets, nontargets);
        CHECK(r.auc == doctest::Approx(1.0));
        CHECK(r.rank_test.p_value < 0.05);
    }
    SUBCASE("insufficient epochs are rejected") {
        targets = {bump_epoch(1.0, 300.0, 50.0, 1.0, rng)};
        nontargets = {bump_epoch(0.0, 300.0, 50.0, 1.0, rng)};
        CHECK_THROWS_AS(separability(targets, nontargets), Error);
    }
}

TEST_CASE("psychophysics_table groups scored trials") {
    using namespace sabci::protocol;
    SessionConfig config;
    config.timbres = {Timbre::white_noise, Timbre::midi};
    config.systems = {SoundSystem::real};
    config.repetitions = 1;
    const SessionPlan plan = build_session(config);

    SUBCASE("fixed 500 ms latency scores AR 100, ART 500, sigma 0 everywhere") {
        const ResponseLog log = synth::synth_response_log(plan, 500.0, 1.0, 77);
        std::vector<ResponseLog> per_trial(plan.trials.size());
        for (std::size_t i = 0; i < plan.trials.size(); ++i) {
            const std::int64_t lo = plan.trials[i].start_ms;
            const std::int64_t hi = lo + 16000;
            for (std::int64_t press : log.presses_ms)
                if (press > lo && press <= hi) per_trial[i].presses_ms.push_back(press);
        }
        const auto rows = psychophysics_table(plan.trials, per_trial, GroupBy::direction);
        CHECK(rows.size() == 8);
        for (const TableRow& row : rows) {
            CHECK(row.ar_percent == doctest::Approx(100.0));
            CHECK(*row.art_ms == doctest::Approx(500.0));
            CHECK(*row.sigma_ms == doctest::Approx(0.0));
        }
        const auto by_timbre = psychophysics_table(plan.trials, per_trial, GroupBy::timbre);
        CHECK(by_timbre.size() == 2);
    }
    SUBCASE("empty session gives an empty table") {
        const auto rows = psychophysics_table({}, {}, GroupBy::direction);
        CHECK(rows.empty());
    }
}
