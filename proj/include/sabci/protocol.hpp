#ifndef SABCI_PROTOCOL_HPP
#define SABCI_PROTOCOL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sabci::protocol {

enum class Timbre { white_noise, midi, effect };
enum class SoundSystem { real, virtual_vbap };

const char* to_string(Timbre t);
const char* to_string(SoundSystem s);
Timbre timbre_from_string(const std::string& s);
SoundSystem system_from_string(const std::string& s);

struct StimulusEvent {
    std::int64_t onset_ms = 0; // relative to the trial start
    std::int64_t duration_ms = 0;
    double direction_deg = 0.0;
    double depth_c = 1.0;
    Timbre timbre = Timbre::white_noise;
    bool is_target = false;
};

struct TargetKey {
    double direction_deg = 0.0;
    double depth_c = 1.0;
};

// One oddball trial: every (direction, depth) stimulus exactly once in
// seeded random order, exactly one of them the attended target.
struct TrialPlan {
    std::vector<StimulusEvent> events;
    TargetKey target_key;
    std::uint64_t seed = 0;
    Timbre timbre = Timbre::white_noise;
    SoundSystem system = SoundSystem::real;
    std::int64_t start_ms = 0; // session-clock onset of this trial
    std::int64_t soa_ms = 1000;
};

struct SessionConfig {
    std::vector<Timbre> timbres = {Timbre::white_noise, Timbre::midi, Timbre::effect};
    std::vector<SoundSystem> systems = {SoundSystem::real, SoundSystem::virtual_vbap};
    int repetitions = 2; // trials per (system, timbre, target) combination
    std::vector<double> directions_deg = {-135, -90, -45, 0, 45, 90, 135, 180};
    std::vector<double> depths = {0.2, 1.0};
    std::int64_t soa_ms = 1000;
    std::int64_t stimulus_ms = 500;
    std::uint64_t master_seed = 1;
};

struct SessionPlan {
    std::vector<TrialPlan> trials;
    SessionConfig config;
};

TrialPlan build_trial(const TargetKey& target_key, Timbre timbre, std::uint64_t seed,
                      const SessionConfig& config = SessionConfig{});

// Cross product systems x timbres x repetitions, each block sweeping all
// direction-depth targets once. Trial seeds derive from the master seed.
SessionPlan build_session(const SessionConfig& config);

struct ResponseLog {
    std::vector<std::int64_t> presses_ms; // session clock, strictly increasing
};

struct ResponseWindow {
    std::int64_t lo_ms = 0;    // exclusive
    std::int64_t hi_ms = 1000; // inclusive
};

struct ScoreResult {
    int targets = 0;
    int hits = 0;
    int false_alarms = 0;
    double ar_percent = 0.0;
    std::optional<double> art_ms;   // mean latency of hits; absent when no hits
    std::optional<double> sigma_ms; // population stdev of hit latencies
    std::vector<double> hit_latencies_ms;
};

// Attributes each press to the most recent stimulus onset. A press within
// the window after the target onset is a hit; a press attributed to a
// non-target is a false alarm. Late presses after a target (outside the
// window) count as neither.
ScoreResult score_responses(const TrialPlan& trial, const ResponseLog& log,
                            const ResponseWindow& window = ResponseWindow{});

} // namespace sabci::protocol

#endif
