#include "sabci/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "sabci/error.hpp"
#include "sabci/numeric.hpp"
#include "sabci/rng.hpp"
#include "sabci/vbap.hpp"

namespace sabci::protocol {

namespace {

constexpr double kKeyTolerance = 1e-9;

bool key_matches(const TargetKey& key, double direction_deg, double depth_c) {
    return std::abs(vbap::normalize_azimuth(key.direction_deg) -
                    vbap::normalize_azimuth(direction_deg)) <= kKeyTolerance &&
           std::abs(key.depth_c - depth_c) <= kKeyTolerance;
}

void validate_config(const SessionConfig& config) {
    if (config.timbres.empty() || config.systems.empty() || config.directions_deg.empty() ||
        config.depths.empty() || config.repetitions < 1)
        fail(ErrorKind::invalid_configuration, "session config has an empty dimension");
    if (config.stimulus_ms <= 0 || config.soa_ms < config.stimulus_ms)
        fail(ErrorKind::invalid_configuration,
             "stimulus length must be positive and no longer than the SOA");
}

} // namespace

const char* to_string(Timbre t) {
    switch (t) {
        case Timbre::white_noise: return "white_noise";
        case Timbre::midi: return "midi";
        case Timbre::effect: return "effect";
    }
    return "unknown";
}

const char* to_string(SoundSystem s) {
    return s == SoundSystem::real ? "real" : "virtual";
}

Timbre timbre_from_string(const std::string& s) {
    if (s == "white_noise") return Timbre::white_noise;
    if (s == "midi") return Timbre::midi;
    if (s == "effect") return Timbre::effect;
    fail(ErrorKind::invalid_argument, "unknown timbre: " + s);
}

SoundSystem system_from_string(const std::string& s) {
    if (s == "real") return SoundSystem::real;
    if (s == "virtual") return SoundSystem::virtual_vbap;
    fail(ErrorKind::invalid_argument, "unknown sound system: " + s);
}

TrialPlan build_trial(const TargetKey& target_key, Timbre timbre, std::uint64_t seed,
                      const SessionConfig& config) {
    validate_config(config);

    // canonical stimulus list: directions ascending, then depths ascending
    std::vector<TargetKey> stimuli;
    for (double dir : config.directions_deg)
        for (double depth : config.depths) stimuli.push_back({dir, depth});

    const bool known = std::any_of(stimuli.begin(), stimuli.end(), [&](const TargetKey& k) {
        return key_matches(target_key, k.direction_deg, k.depth_c);
    });
    if (!known)
        fail(ErrorKind::invalid_argument,
             "target key (" + std::to_string(target_key.direction_deg) + " deg, c=" +
                 std::to_string(target_key.depth_c) + ") is not one of the stimuli");

    DetRng rng(seed);
    rng.shuffle(stimuli);

    TrialPlan trial;
    trial.target_key = target_key;
    trial.seed = seed;
    trial.timbre = timbre;
    trial.soa_ms = config.soa_ms;
    trial.events.reserve(stimuli.size());
    for (std::size_t i = 0; i < stimuli.size(); ++i) {
        StimulusEvent event;
        event.onset_ms = static_cast<std::int64_t>(i) * config.soa_ms;
        event.duration_ms = config.stimulus_ms;
        event.direction_deg = stimuli[i].direction_deg;
        event.depth_c = stimuli[i].depth_c;
        event.timbre = timbre;
        event.is_target = key_matches(target_key, stimuli[i].direction_deg, stimuli[i].depth_c);
        trial.events.push_back(event);
    }
    return trial;
}

SessionPlan build_session(const SessionConfig& config) {
    validate_config(config);

    SessionPlan plan;
    plan.config = config;

    const std::int64_t trial_span =
        static_cast<std::int64_t>(config.directions_deg.size() * config.depths.size()) *
        config.soa_ms;

    std::uint64_t trial_index = 0;
    for (SoundSystem system : config.systems) {
        for (Timbre timbre : config.timbres) {
            for (int rep = 0; rep < config.repetitions; ++rep) {
                for (double dir : config.directions_deg) {
                    for (double depth : config.depths) {
                        const std::uint64_t seed = derive_seed(config.master_seed, trial_index);
                        TrialPlan trial = build_trial({dir, depth}, timbre, seed, config);
                        trial.system = system;
                        trial.start_ms = static_cast<std::int64_t>(trial_index) * trial_span;
                        plan.trials.push_back(std::move(trial));
                        ++trial_index;
                    }
                }
            }
        }
    }
    return plan;
}

ScoreResult score_responses(const TrialPlan& trial, const ResponseLog& log,
                            const ResponseWindow& window) {
    if (trial.events.empty())
        fail(ErrorKind::invalid_argument, "cannot score an empty trial");
    if (!(window.lo_ms >= 0 && window.lo_ms < window.hi_ms && window.hi_ms <= trial.soa_ms))
        fail(ErrorKind::invalid_argument, "response window must lie within (0, SOA]");
    for (std::size_t i = 1; i < log.presses_ms.size(); ++i)
        if (log.presses_ms[i] <= log.presses_ms[i - 1])
            fail(ErrorKind::invalid_argument, "response timestamps must be strictly increasing");

    ScoreResult result;
    for (const StimulusEvent& e : trial.events) result.targets += e.is_target ? 1 : 0;

    std::vector<bool> target_hit(trial.events.size(), false);
    for (std::int64_t press : log.presses_ms) {
        const std::int64_t t = press - trial.start_ms;

        // most recent onset strictly before the press
        const StimulusEvent* attributed = nullptr;
        std::size_t attributed_index = 0;
        for (std::size_t i = 0; i < trial.events.size(); ++i) {
            if (trial.events[i].onset_ms < t) {
                attributed = &trial.events[i];
                attributed_index = i;
            }
        }
        if (attributed == nullptr) continue; // press before the first stimulus

        const std::int64_t latency = t - attributed->onset_ms;
        if (latency > trial.soa_ms) continue; // press after the trial ended

        if (attributed->is_target) {
            if (latency > window.lo_ms && latency <= window.hi_ms &&
                !target_hit[attributed_index]) {
                target_hit[attributed_index] = true;
                ++result.hits;
                result.hit_latencies_ms.push_back(static_cast<double>(latency));
            }
        } else {
            ++result.false_alarms;
        }
    }

    result.ar_percent =
        result.targets > 0 ? 100.0 * result.hits / static_cast<double>(result.targets) : 0.0;
    if (!result.hit_latencies_ms.empty()) {
        result.art_ms = numeric::mean(result.hit_latencies_ms);
        result.sigma_ms = numeric::population_stdev(result.hit_latencies_ms);
    }
    return result;
}

} // namespace sabci::protocol
