#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "sabci/error.hpp"
#include "sabci/io.hpp"
#include "sabci/protocol.hpp"

using namespace sabci;
using namespace sabci::protocol;

namespace {

std::multiset<std::pair<double, double>> event_multiset(const TrialPlan& trial) {
    std::multiset<std::pair<double, double>> set;
    for (const StimulusEvent& e : trial.events) set.insert({e.direction_deg, e.depth_c});
    return set;
}

std::multiset<std::pair<double, double>> canonical_multiset() {
    std::multiset<std::pair<double, double>> set;
    const SessionConfig config;
    for (double dir : config.directions_deg)
        for (double depth : config.depths) set.insert({dir, depth});
    return set;
}

const StimulusEvent& target_of(const TrialPlan& trial) {
    for (const StimulusEvent& e : trial.events)
        if (e.is_target) return e;
    throw std::runtime_error("no target in trial");
}

} // namespace

TEST_CASE("trials hold the canonical 16 stimuli at exact SOA spacing") {
    const auto canonical = canonical_multiset();
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const TrialPlan trial = build_trial({45.0, 0.2}, Timbre::white_noise, seed);
        REQUIRE(trial.events.size() == 16);
        CHECK(event_multiset(trial) == canonical);

        int targets = 0;
        for (std::size_t i = 0; i < trial.events.size(); ++i) {
            CHECK(trial.events[i].onset_ms == static_cast<std::int64_t>(i) * 1000);
            CHECK(trial.events[i].duration_ms == 500);
            CHECK(trial.events[i].duration_ms <= trial.soa_ms);
            targets += trial.events[i].is_target ? 1 : 0;
        }
        CHECK(targets == 1);
    }
}

TEST_CASE("identical seeds give identical permutations") {
    const TrialPlan a = build_trial({0.0, 1.0}, Timbre::midi, 42);
    const TrialPlan b = build_trial({0.0, 1.0}, Timbre::midi, 42);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].direction_deg == b.events[i].direction_deg);
        CHECK(a.events[i].depth_c == b.events[i].depth_c);
    }
    // different seeds almost surely differ
    const TrialPlan c = build_trial({0.0, 1.0}, Timbre::midi, 43);
    bool any_differ = false;
    for (std::size_t i = 0; i < a.events.size(); ++i)
        any_differ |= a.events[i].direction_deg != c.events[i].direction_deg ||
                      a.events[i].depth_c != c.events[i].depth_c;
    CHECK(any_differ);
}

TEST_CASE("unknown target keys are rejected") {
    try {
        build_trial({30.0, 1.0}, Timbre::white_noise, 1);
        FAIL("expected invalid-argument");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_argument);
    }
    CHECK_THROWS_AS(build_trial({0.0, 0.7}, Timbre::white_noise, 1), Error);
}

TEST_CASE("session defaults follow the 12-trials-per-target schedule") {
    const SessionPlan plan = build_session(SessionConfig{});
    // 2 systems x 3 timbres x 2 repetitions = 12 trials per target key
    CHECK(plan.trials.size() == 12 * 16);
    std::map<std::pair<double, double>, int> per_key;
    for (const TrialPlan& trial : plan.trials)
        ++per_key[{trial.target_key.direction_deg, trial.target_key.depth_c}];
    CHECK(per_key.size() == 16);
    for (const auto& [key, count] : per_key) CHECK(count == 12);
}

TEST_CASE("minimal session sweeps the 16 targets once") {
    SessionConfig config;
    config.timbres = {Timbre::white_noise};
    config.systems = {SoundSystem::virtual_vbap};
    config.repetitions = 1;
    const SessionPlan plan = build_session(config);
    CHECK(plan.trials.size() == 16);
    std::set<std::pair<double, double>> keys;
    for (const TrialPlan& trial : plan.trials)
        keys.insert({trial.target_key.direction_deg, trial.target_key.depth_c});
    CHECK(keys.size() == 16);
}

TEST_CASE("same master seed reproduces a byte-identical serialized plan") {
    SessionConfig config;
    config.master_seed = 7;
    const std::string a = io::session_plan_to_json(build_session(config));
    const std::string b = io::session_plan_to_json(build_session(config));
    CHECK(a == b);
    config.master_seed = 8;
    CHECK(a != io::session_plan_to_json(build_session(config)));
}

TEST_CASE("empty session configs are rejected") {
    SessionConfig config;
    config.timbres.clear();
    try {
        build_session(config);
        FAIL("expected invalid-configuration");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_configuration);
    }
}

TEST_CASE("score_responses handles the worked examples") {
    const TrialPlan trial = build_trial({-90.0, 1.0}, Timbre::white_noise, 11);
    const std::int64_t target_onset = target_of(trial).onset_ms;

    SUBCASE("single press 574 ms after the target") {
        ResponseLog log{{target_onset + 574}};
        const ScoreResult score = score_responses(trial, log);
        CHECK(score.targets == 1);
        CHECK(score.ar_percent == doctest::Approx(100.0));
        REQUIRE(score.art_ms.has_value());
        CHECK(*score.art_ms == doctest::Approx(574.0));
        CHECK(*score.sigma_ms == doctest::Approx(0.0));
        CHECK(score.false_alarms == 0);
    }
    SUBCASE("no presses at all") {
        const ScoreResult score = score_responses(trial, ResponseLog{});
        CHECK(score.ar_percent == doctest::Approx(0.0));
        CHECK_FALSE(score.art_ms.has_value());
        CHECK_FALSE(score.sigma_ms.has_value());
    }
    SUBCASE("press 999 ms after a non-target only") {
        std::int64_t nontarget_onset = -1;
        for (const StimulusEvent& e : trial.events)
            if (!e.is_target) {
                nontarget_onset = e.onset_ms;
                break;
            }
        ResponseLog log{{nontarget_onset + 999}};
        const ScoreResult score = score_responses(trial, log);
        CHECK(score.ar_percent == doctest::Approx(0.0));
        CHECK(score.false_alarms == 1);
    }
    SUBCASE("empty trial is invalid") {
        TrialPlan empty;
        CHECK_THROWS_AS(score_responses(empty, ResponseLog{}), Error);
    }
    SUBCASE("window outside (0, SOA] is invalid") {
        CHECK_THROWS_AS(score_responses(trial, ResponseLog{}, {0, 1500}), Error);
        CHECK_THROWS_AS(score_responses(trial, ResponseLog{}, {500, 400}), Error);
    }
}

TEST_CASE("accuracy is invariant when the log follows the target around") {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        const TrialPlan trial = build_trial({135.0, 0.2}, Timbre::effect, seed);
        ResponseLog log{{target_of(trial).onset_ms + 431}};
        const ScoreResult score = score_responses(trial, log);
        CHECK(score.ar_percent == doctest::Approx(100.0));
        CHECK(*score.art_ms == doctest::Approx(431.0));
    }
}

TEST_CASE("fixed-latency responder scores ART = L with zero spread") {
    SessionConfig config;
    config.timbres = {Timbre::white_noise};
    config.systems = {SoundSystem::real};
    config.repetitions = 1;
    const SessionPlan plan = build_session(config);
    for (const TrialPlan& trial : plan.trials) {
        ResponseLog log{{trial.start_ms + target_of(trial).onset_ms + 500}};
        const ScoreResult score = score_responses(trial, log);
        CHECK(score.ar_percent == doctest::Approx(100.0));
        CHECK(*score.art_ms == doctest::Approx(500.0));
        CHECK(*score.sigma_ms == doctest::Approx(0.0));
    }
}

TEST_CASE("trial start offsets place sessions on a single clock") {
    SessionConfig config;
    config.timbres = {Timbre::white_noise};
    config.systems = {SoundSystem::real};
    config.repetitions = 1;
    const SessionPlan plan = build_session(config);
    for (std::size_t i = 0; i < plan.trials.size(); ++i)
        CHECK(plan.trials[i].start_ms == static_cast<std::int64_t>(i) * 16000);
}
