#include "sabci/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sabci/numeric.hpp"
#include "sabci/rng.hpp"
#include "sabci/stats.hpp"
#include "sabci/vbap.hpp"

namespace sabci::cli {

using nlohmann::json;

namespace {

int guard(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

// simple static partition across worker threads; results land in
// preassigned slots, so the output is independent of scheduling
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    unsigned n_threads = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(std::max<std::size_t>(count, 1)));
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned t = 0; t < n_threads; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
}

vbap::LoudspeakerRing load_ring(const GainsOptions& options) {
    if (options.ring_json) {
        const json j = json::parse(io::read_text_file(*options.ring_json));
        return vbap::ring_from_azimuths(j.at("azimuths_deg").get<std::vector<double>>(),
                                        j.value("radius_m", 1.0));
    }
    return vbap::make_ring(options.speakers);
}

protocol::SessionConfig session_config_from_json(const json& j,
                                                 protocol::SessionConfig base = {}) {
    protocol::SessionConfig config = std::move(base);
    if (j.contains("timbres")) {
        config.timbres.clear();
        for (const auto& t : j.at("timbres"))
            config.timbres.push_back(protocol::timbre_from_string(t.get<std::string>()));
    }
    if (j.contains("systems")) {
        config.systems.clear();
        for (const auto& s : j.at("systems"))
            config.systems.push_back(protocol::system_from_string(s.get<std::string>()));
    }
    config.repetitions = j.value("repetitions", config.repetitions);
    if (j.contains("directions_deg"))
        config.directions_deg = j.at("directions_deg").get<std::vector<double>>();
    if (j.contains("depths")) config.depths = j.at("depths").get<std::vector<double>>();
    config.soa_ms = j.value("soa_ms", config.soa_ms);
    config.stimulus_ms = j.value("stimulus_ms", config.stimulus_ms);
    config.master_seed = j.value("master_seed", config.master_seed);
    return config;
}

synth::SynthSpec synth_spec_from_json(const json& j, synth::SynthSpec base = {}) {
    synth::SynthSpec spec = std::move(base);
    spec.seed = j.value("seed", spec.seed);
    spec.n_channels = j.value("n_channels", spec.n_channels);
    spec.sample_rate_hz = j.value("sample_rate_hz", spec.sample_rate_hz);
    spec.p300_amplitude_uv = j.value("p300_amplitude_uv", spec.p300_amplitude_uv);
    spec.p300_latency_ms = j.value("p300_latency_ms", spec.p300_latency_ms);
    spec.p300_width_ms = j.value("p300_width_ms", spec.p300_width_ms);
    spec.noise_sigma_uv = j.value("noise_sigma_uv", spec.noise_sigma_uv);
    spec.noise_exponent = j.value("noise_exponent", spec.noise_exponent);
    spec.blink_amplitude_uv = j.value("blink_amplitude_uv", spec.blink_amplitude_uv);
    spec.blink_rate_per_min = j.value("blink_rate_per_min", spec.blink_rate_per_min);
    spec.drift_amplitude_uv = j.value("drift_amplitude_uv", spec.drift_amplitude_uv);
    spec.drift_freq_hz = j.value("drift_freq_hz", spec.drift_freq_hz);
    return spec;
}

memd::SiftConfig sift_config_from_json(const json& j, memd::SiftConfig base = {}) {
    memd::SiftConfig config = base;
    config.direction_count = j.value("direction_count", config.direction_count);
    config.max_sift_iters = j.value("max_sift_iters", config.max_sift_iters);
    config.sd_threshold = j.value("sd_threshold", config.sd_threshold);
    config.max_imfs = j.value("max_imfs", config.max_imfs);
    return config;
}

// --- stimulus audio rendering (audition aid, schedule --wav) -------------

void render_event_samples(std::vector<double>& mono, protocol::Timbre timbre,
                          std::uint64_t seed, unsigned fs) {
    DetRng rng(seed);
    const std::size_t n = mono.size();
    switch (timbre) {
        case protocol::Timbre::white_noise:
            for (double& v : mono) v = 0.5 * rng.normal();
            break;
        case protocol::Timbre::midi:
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / fs;
                const double env = std::exp(-t / 0.25);
                mono[i] = env * (0.6 * std::sin(2 * M_PI * 440.0 * t) +
                                 0.3 * std::sin(2 * M_PI * 880.0 * t) +
                                 0.1 * std::sin(2 * M_PI * 1320.0 * t));
            }
            break;
        case protocol::Timbre::effect:
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / fs;
                const double freq = 300.0 + 900.0 * t / (static_cast<double>(n) / fs);
                mono[i] = 0.7 * std::sin(2 * M_PI * freq * t);
            }
            break;
    }
    // 10 ms raised-cosine ramps against onset/offset clicks
    const std::size_t ramp = std::min<std::size_t>(n / 2, fs / 100);
    for (std::size_t i = 0; i < ramp; ++i) {
        const double w = 0.5 * (1.0 - std::cos(M_PI * static_cast<double>(i) / ramp));
        mono[i] *= w;
        mono[n - 1 - i] *= w;
    }
}

void render_stimulus_wav(const fs::path& path, const protocol::SessionPlan& plan,
                         std::size_t max_trials) {
    const unsigned fs = 44100;
    const vbap::LoudspeakerRing ring =
        vbap::ring_from_azimuths(plan.config.directions_deg);

    const std::size_t n_trials = std::min<std::size_t>(max_trials, plan.trials.size());
    if (n_trials == 0) fail(ErrorKind::invalid_configuration, "no trials to render");
    const std::int64_t base_ms = plan.trials.front().start_ms;
    const std::int64_t end_ms = plan.trials[n_trials - 1].start_ms +
                                static_cast<std::int64_t>(plan.trials[n_trials - 1].events.size()) *
                                    plan.trials[n_trials - 1].soa_ms;
    const std::size_t total = static_cast<std::size_t>((end_ms - base_ms) * fs / 1000);

    Matrix audio(ring.size(), total);
    std::uint64_t event_counter = 0;
    for (std::size_t ti = 0; ti < n_trials; ++ti) {
        const protocol::TrialPlan& trial = plan.trials[ti];
        for (const protocol::StimulusEvent& event : trial.events) {
            vbap::VirtualSource source;
            source.azimuth_deg = event.direction_deg;
            source.depth_c = event.depth_c;
            source.mode = trial.system == protocol::SoundSystem::real
                              ? vbap::SourceMode::real_speaker
                              : vbap::SourceMode::virtual_image;
            const vbap::PanningGains gains = vbap::ring_gain_vector(ring, source);

            std::vector<double> mono(
                static_cast<std::size_t>(event.duration_ms) * fs / 1000);
            render_event_samples(mono, event.timbre,
                                 derive_seed(plan.config.master_seed, 0xA0D10 + event_counter),
                                 fs);
            const std::size_t start = static_cast<std::size_t>(
                (trial.start_ms + event.onset_ms - base_ms) * fs / 1000);
            for (std::size_t c = 0; c < ring.size(); ++c) {
                if (gains.gains[c] == 0.0) continue;
                auto row = audio.row(c);
                for (std::size_t i = 0; i < mono.size() && start + i < total; ++i)
                    row[start + i] += gains.gains[c] * mono[i];
            }
            ++event_counter;
        }
    }
    double peak = 0.0;
    for (std::size_t i = 0; i < audio.size(); ++i)
        peak = std::max(peak, std::abs(audio.data()[i]));
    if (peak > 0.0) audio *= 0.9 / peak;
    io::write_wav16(path, audio, fs);
}

} // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument:
        case ErrorKind::invalid_configuration:
            return kExitConfig;
        case ErrorKind::data:
        case ErrorKind::boundary:
            return kExitData;
        case ErrorKind::degenerate_pair:
        case ErrorKind::out_of_arc:
        case ErrorKind::insufficient_extrema:
        case ErrorKind::numeric:
            return kExitNumeric;
    }
    return kExitNumeric;
}

int cmd_gains(const GainsOptions& options) {
    return guard([&] {
        const vbap::LoudspeakerRing ring = load_ring(options);
        const vbap::SourceMode mode = options.mode == "real" ? vbap::SourceMode::real_speaker
                                                             : vbap::SourceMode::virtual_image;
        std::vector<std::tuple<double, double, std::vector<double>>> rows;
        for (double azimuth : options.azimuths_deg) {
            for (double depth : options.depths) {
                const vbap::PanningGains gains =
                    vbap::ring_gain_vector(ring, {azimuth, depth, mode});
                rows.emplace_back(vbap::normalize_azimuth(azimuth), depth, gains.gains);
            }
        }
        const fs::path out = options.out_dir / "gains.csv";
        io::write_gains_csv(out, ring.size(), rows);
        std::cout << "wrote " << out.string() << " (" << rows.size() << " rows)\n";
    });
}

int cmd_schedule(const ScheduleOptions& options) {
    return guard([&] {
        protocol::SessionConfig config = options.config;
        if (options.config_json)
            config = session_config_from_json(json::parse(io::read_text_file(*options.config_json)),
                                              config);
        const protocol::SessionPlan plan = protocol::build_session(config);

        fs::create_directories(options.out_dir);
        io::write_session_plan(options.out_dir / "plan.json", plan);

        std::vector<protocol::StimulusEvent> timeline;
        for (const protocol::TrialPlan& trial : plan.trials) {
            for (const protocol::StimulusEvent& e : trial.events) {
                protocol::StimulusEvent abs = e;
                abs.onset_ms += trial.start_ms;
                timeline.push_back(abs);
            }
        }
        io::write_timeline_csv(options.out_dir / "timeline.csv", timeline);
        if (options.render_wav)
            render_stimulus_wav(options.out_dir / "stimuli.wav", plan, options.wav_trials);
        std::cout << "wrote plan with " << plan.trials.size() << " trials to "
                  << options.out_dir.string() << "\n";
    });
}

int cmd_synth(const SynthOptions& options) {
    return guard([&] {
        synth::SynthSpec spec = options.spec;
        if (options.spec_json)
            spec = synth_spec_from_json(json::parse(io::read_text_file(*options.spec_json)), spec);
        const protocol::SessionPlan plan = io::read_session_plan(options.plan_path);
        auto [recording, truth] = synth::synth_session(plan, spec);

        fs::create_directories(options.out_dir);
        io::write_recording(options.out_dir / "recording", recording, options.format);
        io::write_recording(options.out_dir / "recording_truth_clean", truth.clean,
                            options.format);
        io::write_recording(options.out_dir / "recording_truth_p300", truth.p300,
                            options.format);
        io::write_recording(options.out_dir / "recording_truth_blinks", truth.blinks,
                            options.format);
        io::write_recording(options.out_dir / "recording_truth_drift", truth.drift,
                            options.format);
        io::write_timeline_csv(options.out_dir / "events.csv", truth.events);
        std::cout << "wrote synthetic recording (" << recording.channels() << " ch, "
                  << recording.length() << " samples) to " << options.out_dir.string() << "\n";
    });
}

int cmd_preprocess(const PreprocessOptions& options) {
    return guard([&] {
        const MultichannelRecording recording = io::read_recording(options.recording_path);
        const std::vector<protocol::StimulusEvent> events =
            io::read_timeline_csv(options.events_path);

        const MultichannelRecording filtered =
            dsp::bandlimit(recording, options.highpass_hz, options.lowpass_hz, options.order);
        std::vector<dsp::Epoch> epochs = dsp::segment_epochs(filtered, events, options.window);
        if (options.baseline)
            for (dsp::Epoch& epoch : epochs) epoch = dsp::baseline_correct(epoch);

        fs::create_directories(options.out_dir);
        io::write_recording(options.out_dir / "filtered", filtered, options.format);
        io::write_epochs(options.out_dir / "epochs.bin", epochs);
        std::cout << "wrote " << epochs.size() << " epochs to " << options.out_dir.string()
                  << "\n";
    });
}

int cmd_clean(const CleanOptions& options) {
    return guard([&] {
        std::vector<dsp::Epoch> epochs = io::read_epochs(options.epochs_path);
        if (epochs.empty()) fail(ErrorKind::data, "epoch file holds no epochs");

        const memd::DirectionSet directions = memd::hammersley_directions(
            options.sift.direction_count, epochs.front().samples.channels());

        std::vector<std::size_t> removed_counts(epochs.size(), 0);
        std::vector<std::size_t> imf_counts(epochs.size(), 0);
        std::vector<memd::IMFStack> stacks(options.export_imfs ? epochs.size() : 0);

        parallel_for(epochs.size(), options.threads, [&](std::size_t i) {
            const memd::IMFStack stack =
                memd::memd_decompose(epochs[i].samples, directions, options.sift);
            const memd::CleanResult result =
                memd::remove_artifact_imfs(stack, options.threshold_uv);
            epochs[i].samples = result.cleaned;
            removed_counts[i] = result.removed_count;
            imf_counts[i] = stack.count();
            if (options.export_imfs) stacks[i] = stack;
        });

        fs::create_directories(options.out_dir);
        io::write_epochs(options.out_dir / "epochs_clean.bin", epochs);
        std::string report = "epoch,imfs,removed_contributions\n";
        for (std::size_t i = 0; i < epochs.size(); ++i)
            report += std::to_string(i) + ',' + std::to_string(imf_counts[i]) + ',' +
                      std::to_string(removed_counts[i]) + '\n';
        io::write_text_file(options.out_dir / "clean_report.csv", report);
        if (options.export_imfs) {
            const fs::path imf_dir = options.out_dir / "imfs";
            for (std::size_t i = 0; i < stacks.size(); ++i)
                io::write_imf_stack(imf_dir / ("epoch_" + std::to_string(i) + ".imf"),
                                    stacks[i], epochs[i].sample_rate_hz);
        }
        std::cout << "cleaned " << epochs.size() << " epochs into "
                  << options.out_dir.string() << "\n";
    });
}

int cmd_erp(const ErpOptions& options) {
    return guard([&] {
        const std::vector<dsp::Epoch> epochs = io::read_epochs(options.epochs_path);
        std::vector<dsp::Epoch> targets, nontargets;
        for (const dsp::Epoch& e : epochs)
            (e.event.is_target ? targets : nontargets).push_back(e);
        if (targets.empty() || nontargets.empty())
            fail(ErrorKind::data, "need both target and non-target epochs");

        const stats::ERPAverage target_erp =
            stats::grand_average(targets, stats::Condition::target);
        const stats::ERPAverage nontarget_erp =
            stats::grand_average(nontargets, stats::Condition::non_target);
        const stats::P300Score score =
            stats::p300_score(target_erp, options.window_lo_ms, options.window_hi_ms);

        fs::create_directories(options.out_dir);
        const std::vector<std::string> names =
            default_channel_names(target_erp.mean.channels());
        io::write_erp_csv(options.out_dir / "erp_target.csv", target_erp, names);
        io::write_erp_csv(options.out_dir / "erp_nontarget.csv", nontarget_erp, names);
        io::write_erp_svg(options.out_dir / "erp.svg", target_erp, nontarget_erp, names,
                          options.window_lo_ms, options.window_hi_ms);

        std::string scores = "channel,window_mean_uv,peak_latency_ms\n";
        for (std::size_t c = 0; c < names.size(); ++c)
            scores += names[c] + ',' + io::format_double(score.per_channel_mean_uv[c]) + ',' +
                      io::format_double(score.peak_latency_ms[c]) + '\n';
        io::write_text_file(options.out_dir / "p300_scores.csv", scores);
        std::cout << "wrote ERP outputs (" << targets.size() << " target, "
                  << nontargets.size() << " non-target epochs)\n";
    });
}

int cmd_stats(const StatsOptions& options) {
    return guard([&] {
        fs::create_directories(options.out_dir);
        if (options.epochs_path) {
            const std::vector<dsp::Epoch> epochs = io::read_epochs(*options.epochs_path);
            std::vector<dsp::Epoch> targets, nontargets;
            for (const dsp::Epoch& e : epochs)
                (e.event.is_target ? targets : nontargets).push_back(e);
            const stats::SeparabilityResult result =
                stats::separability(targets, nontargets, options.window_lo_ms,
                                    options.window_hi_ms, options.channel);
            json j{{"auc", result.auc},
                   {"rank_statistic", result.rank_test.statistic},
                   {"p_value", result.rank_test.p_value},
                   {"exact", result.rank_test.exact},
                   {"n_target", result.rank_test.n1},
                   {"n_nontarget", result.rank_test.n2},
                   {"window_lo_ms", options.window_lo_ms},
                   {"window_hi_ms", options.window_hi_ms}};
            io::write_text_file(options.out_dir / "separability.json", j.dump(2) + "\n");
            std::cout << "separability: auc=" << result.auc
                      << " p=" << result.rank_test.p_value << "\n";
        }
        if (options.plan_path && options.responses_path) {
            const protocol::SessionPlan plan = io::read_session_plan(*options.plan_path);
            const protocol::ResponseLog log =
                io::read_response_log_csv(*options.responses_path);
            std::vector<protocol::ResponseLog> per_trial(plan.trials.size());
            for (std::size_t i = 0; i < plan.trials.size(); ++i) {
                const std::int64_t start = plan.trials[i].start_ms;
                const std::int64_t end =
                    start + static_cast<std::int64_t>(plan.trials[i].events.size()) *
                                plan.trials[i].soa_ms;
                for (std::int64_t press : log.presses_ms)
                    if (press > start && press <= end) per_trial[i].presses_ms.push_back(press);
            }
            const stats::GroupBy group_by = options.group_by == "timbre"
                                                ? stats::GroupBy::timbre
                                                : stats::GroupBy::direction;
            protocol::ResponseWindow window;
            window.hi_ms = options.response_window_hi_ms;
            const std::vector<stats::TableRow> rows =
                stats::psychophysics_table(plan.trials, per_trial, group_by, window);
            io::write_table_csv(options.out_dir / "psychophysics.csv", rows,
                                group_by == stats::GroupBy::timbre ? "stimulus_type"
                                                                   : "direction_deg");
            std::cout << "wrote psychophysics table (" << rows.size() << " rows)\n";
        }
        if (!options.epochs_path && !(options.plan_path && options.responses_path))
            fail(ErrorKind::invalid_configuration,
                 "stats needs --epochs or both --plan and --responses");
    });
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

namespace {

struct PipelineConfig {
    std::uint64_t seed = 1;
    protocol::SessionConfig session;
    bool use_synth = true;
    synth::SynthSpec synth_spec;
    std::optional<fs::path> recording_path;
    std::optional<fs::path> events_path;
    std::size_t max_trials = 0; // 0 = all
    double highpass_hz = 0.5, lowpass_hz = 20.0;
    int filter_order = 5;
    dsp::EpochWindow window;
    bool clean_enabled = true;
    double threshold_uv = 20.0;
    memd::SiftConfig sift;
    unsigned threads = 0;
    double erp_lo_ms = 250.0, erp_hi_ms = 500.0;
    io::Format format = io::Format::csv;
    json echo; // effective configuration echoed into the manifest

    static PipelineConfig from_json(const json& j);
};

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig config;
    config.seed = j.value("seed", config.seed);
    // a single session sweep by default keeps desk-scale runs quick
    config.session.timbres = {protocol::Timbre::white_noise};
    config.session.systems = {protocol::SoundSystem::virtual_vbap};
    config.session.repetitions = 1;
    if (j.contains("session")) config.session = session_config_from_json(j.at("session"), config.session);
    if (j.contains("synth")) config.synth_spec = synth_spec_from_json(j.at("synth"));
    if (j.contains("recording")) {
        config.use_synth = false;
        config.recording_path = fs::path(j.at("recording").get<std::string>());
        config.events_path = fs::path(j.at("events").get<std::string>());
    }
    config.max_trials = j.value("max_trials", config.max_trials);
    if (j.contains("preprocess")) {
        const json& p = j.at("preprocess");
        config.highpass_hz = p.value("highpass_hz", config.highpass_hz);
        config.lowpass_hz = p.value("lowpass_hz", config.lowpass_hz);
        config.filter_order = p.value("order", config.filter_order);
        config.window.pre_ms = p.value("pre_ms", config.window.pre_ms);
        config.window.post_ms = p.value("post_ms", config.window.post_ms);
    }
    if (j.contains("clean")) {
        const json& c = j.at("clean");
        config.clean_enabled = c.value("enabled", config.clean_enabled);
        config.threshold_uv = c.value("threshold_uv", config.threshold_uv);
        config.sift = sift_config_from_json(c, config.sift);
        config.threads = c.value("threads", config.threads);
    }
    if (j.contains("erp")) {
        const json& e = j.at("erp");
        config.erp_lo_ms = e.value("window_lo_ms", config.erp_lo_ms);
        config.erp_hi_ms = e.value("window_hi_ms", config.erp_hi_ms);
    }
    config.format = io::format_from_string(j.value("format", std::string("csv")));

    config.session.master_seed = config.seed;
    config.synth_spec.seed = config.seed;
    return config;
}

json pipeline_config_echo(const PipelineConfig& config) {
    json session;
    for (const auto t : config.session.timbres) session["timbres"].push_back(protocol::to_string(t));
    for (const auto s : config.session.systems) session["systems"].push_back(protocol::to_string(s));
    session["repetitions"] = config.session.repetitions;
    session["directions_deg"] = config.session.directions_deg;
    session["depths"] = config.session.depths;
    session["soa_ms"] = config.session.soa_ms;
    session["stimulus_ms"] = config.session.stimulus_ms;
    session["master_seed"] = config.session.master_seed;

    json j;
    j["seed"] = config.seed;
    j["session"] = session;
    j["max_trials"] = config.max_trials;
    if (config.use_synth) {
        j["synth"] = {{"seed", config.synth_spec.seed},
                      {"n_channels", config.synth_spec.n_channels},
                      {"sample_rate_hz", config.synth_spec.sample_rate_hz},
                      {"p300_amplitude_uv", config.synth_spec.p300_amplitude_uv},
                      {"p300_latency_ms", config.synth_spec.p300_latency_ms},
                      {"p300_width_ms", config.synth_spec.p300_width_ms},
                      {"noise_sigma_uv", config.synth_spec.noise_sigma_uv},
                      {"noise_exponent", config.synth_spec.noise_exponent},
                      {"blink_amplitude_uv", config.synth_spec.blink_amplitude_uv},
                      {"blink_rate_per_min", config.synth_spec.blink_rate_per_min},
                      {"drift_amplitude_uv", config.synth_spec.drift_amplitude_uv},
                      {"drift_freq_hz", config.synth_spec.drift_freq_hz}};
    } else {
        j["recording"] = config.recording_path->generic_string();
        j["events"] = config.events_path->generic_string();
    }
    j["preprocess"] = {{"highpass_hz", config.highpass_hz},
                       {"lowpass_hz", config.lowpass_hz},
                       {"order", config.filter_order},
                       {"pre_ms", config.window.pre_ms},
                       {"post_ms", config.window.post_ms}};
    j["clean"] = {{"enabled", config.clean_enabled},
                  {"threshold_uv", config.threshold_uv},
                  {"direction_count", config.sift.direction_count},
                  {"max_sift_iters", config.sift.max_sift_iters},
                  {"sd_threshold", config.sift.sd_threshold},
                  {"max_imfs", config.sift.max_imfs}};
    j["erp"] = {{"window_lo_ms", config.erp_lo_ms}, {"window_hi_ms", config.erp_hi_ms}};
    j["format"] = config.format == io::Format::csv ? "csv" : "binary";
    return j;
}

} // namespace

int cmd_pipeline(const PipelineOptions& options) {
    io::RunManifest manifest;
    manifest.command = "pipeline";
    const fs::path out = options.out_dir;
    std::string current_stage = "configure";

    const int code = guard([&] {
        json config_json = json::object();
        if (options.config_json) config_json = json::parse(io::read_text_file(*options.config_json));
        if (options.seed) config_json["seed"] = *options.seed;
        if (options.format) config_json["format"] = *options.format;
        PipelineConfig config = PipelineConfig::from_json(config_json);
        config.echo = pipeline_config_echo(config);
        manifest.config_json = config.echo.dump();
        fs::create_directories(out);

        // --- synth ------------------------------------------------------
        current_stage = "synth";
        MultichannelRecording recording;
        std::vector<protocol::StimulusEvent> events;
        std::optional<synth::GroundTruth> truth;
        if (config.use_synth) {
            protocol::SessionPlan plan = protocol::build_session(config.session);
            if (config.max_trials > 0 && plan.trials.size() > config.max_trials)
                plan.trials.resize(config.max_trials);
            io::write_session_plan(out / "plan.json", plan);
            manifest.add_artifact(out, out / "plan.json");

            auto [rec, ground_truth] = synth::synth_session(plan, config.synth_spec);
            recording = std::move(rec);
            truth = std::move(ground_truth);
            events = truth->events;
            io::write_recording(out / "recording", recording, config.format);
            io::write_recording(out / "recording_truth_clean", truth->clean, config.format);
            io::write_recording(out / "recording_truth_p300", truth->p300, config.format);
            io::write_recording(out / "recording_truth_blinks", truth->blinks, config.format);
            io::write_recording(out / "recording_truth_drift", truth->drift, config.format);
            io::write_timeline_csv(out / "events.csv", events);
            const char* ext = config.format == io::Format::csv ? ".csv" : ".bin";
            manifest.add_artifact(out, out / (std::string("recording") + ext));
            manifest.add_artifact(out, out / (std::string("recording_truth_clean") + ext));
            manifest.add_artifact(out, out / "events.csv");
            manifest.stages_complete.push_back("synth");
        } else {
            recording = io::read_recording(*config.recording_path);
            events = io::read_timeline_csv(*config.events_path);
        }

        // --- preprocess ---------------------------------------------------
        current_stage = "preprocess";
        const MultichannelRecording filtered = dsp::bandlimit(
            recording, config.highpass_hz, config.lowpass_hz, config.filter_order);
        std::vector<dsp::Epoch> epochs = dsp::segment_epochs(filtered, events, config.window);
        for (dsp::Epoch& epoch : epochs) epoch = dsp::baseline_correct(epoch);
        io::write_epochs(out / "epochs.bin", epochs);
        manifest.add_artifact(out, out / "epochs.bin");
        manifest.stages_complete.push_back("preprocess");

        // --- clean --------------------------------------------------------
        current_stage = "clean";
        std::vector<dsp::Epoch> cleaned = epochs;
        if (config.clean_enabled) {
            const memd::DirectionSet directions = memd::hammersley_directions(
                config.sift.direction_count, recording.channels());
            std::vector<std::size_t> removed(epochs.size(), 0), imf_counts(epochs.size(), 0);
            parallel_for(epochs.size(), config.threads, [&](std::size_t i) {
                const memd::IMFStack stack =
                    memd::memd_decompose(epochs[i].samples, directions, config.sift);
                const memd::CleanResult result =
                    memd::remove_artifact_imfs(stack, config.threshold_uv);
                cleaned[i].samples = result.cleaned;
                removed[i] = result.removed_count;
                imf_counts[i] = stack.count();
            });
            io::write_epochs(out / "epochs_clean.bin", cleaned);
            std::string report = "epoch,imfs,removed_contributions\n";
            for (std::size_t i = 0; i < epochs.size(); ++i)
                report += std::to_string(i) + ',' + std::to_string(imf_counts[i]) + ',' +
                          std::to_string(removed[i]) + '\n';
            io::write_text_file(out / "clean_report.csv", report);
            manifest.add_artifact(out, out / "epochs_clean.bin");
            manifest.add_artifact(out, out / "clean_report.csv");
        }
        manifest.stages_complete.push_back("clean");

        // --- erp ----------------------------------------------------------
        current_stage = "erp";
        std::vector<dsp::Epoch> targets, nontargets;
        for (const dsp::Epoch& e : cleaned)
            (e.event.is_target ? targets : nontargets).push_back(e);
        if (targets.empty() || nontargets.empty())
            fail(ErrorKind::data, "session produced no target/non-target split");
        const stats::ERPAverage target_erp =
            stats::grand_average(targets, stats::Condition::target);
        const stats::ERPAverage nontarget_erp =
            stats::grand_average(nontargets, stats::Condition::non_target);
        const std::vector<std::string> names = recording.channel_names.empty()
                                                   ? default_channel_names(recording.channels())
                                                   : recording.channel_names;
        io::write_erp_csv(out / "erp_target.csv", target_erp, names);
        io::write_erp_csv(out / "erp_nontarget.csv", nontarget_erp, names);
        io::write_erp_svg(out / "erp.svg", target_erp, nontarget_erp, names, config.erp_lo_ms,
                          config.erp_hi_ms);
        manifest.add_artifact(out, out / "erp_target.csv");
        manifest.add_artifact(out, out / "erp_nontarget.csv");
        manifest.add_artifact(out, out / "erp.svg");
        manifest.stages_complete.push_back("erp");

        // --- stats --------------------------------------------------------
        current_stage = "stats";
        const stats::SeparabilityResult sep =
            stats::separability(targets, nontargets, config.erp_lo_ms, config.erp_hi_ms);
        json stats_json{{"auc", sep.auc},
                        {"rank_statistic", sep.rank_test.statistic},
                        {"p_value", sep.rank_test.p_value},
                        {"exact", sep.rank_test.exact},
                        {"n_target", sep.rank_test.n1},
                        {"n_nontarget", sep.rank_test.n2}};
        io::write_text_file(out / "separability.json", stats_json.dump(2) + "\n");
        manifest.add_artifact(out, out / "separability.json");

        // ground-truth comparison: how well did cleaning restore the ERP?
        if (truth) {
            const MultichannelRecording truth_filtered = dsp::bandlimit(
                truth->clean, config.highpass_hz, config.lowpass_hz, config.filter_order);
            std::vector<dsp::Epoch> truth_epochs =
                dsp::segment_epochs(truth_filtered, events, config.window);
            for (dsp::Epoch& epoch : truth_epochs) epoch = dsp::baseline_correct(epoch);
            std::vector<dsp::Epoch> truth_targets;
            for (const dsp::Epoch& e : truth_epochs)
                if (e.event.is_target) truth_targets.push_back(e);
            const stats::ERPAverage truth_erp =
                stats::grand_average(truth_targets, stats::Condition::target);

            // post-stimulus correlation, channels concatenated
            std::vector<double> a, b;
            for (std::size_t c = 0; c < target_erp.mean.channels(); ++c)
                for (std::size_t t = target_erp.onset_index; t < target_erp.mean.samples(); ++t) {
                    a.push_back(target_erp.mean(c, t));
                    b.push_back(truth_erp.mean(c, t));
                }
            const double erp_correlation = numeric::pearson_correlation(a, b);

            // artifact energy before/after cleaning, truth epochs as reference
            double energy_before = 0.0, energy_after = 0.0;
            for (std::size_t i = 0; i < truth_epochs.size(); ++i) {
                const Matrix diff_before = epochs[i].samples - truth_epochs[i].samples;
                const Matrix diff_after = cleaned[i].samples - truth_epochs[i].samples;
                energy_before += numeric::sum_sq(
                    std::span<const double>(diff_before.data(), diff_before.size()));
                energy_after += numeric::sum_sq(
                    std::span<const double>(diff_after.data(), diff_after.size()));
            }
            json truth_json{{"erp_correlation", erp_correlation}};
            if (config.clean_enabled && energy_before > 0.0)
                truth_json["artifact_energy_reduction"] = 1.0 - energy_after / energy_before;
            io::write_text_file(out / "truth_comparison.json", truth_json.dump(2) + "\n");
            manifest.add_artifact(out, out / "truth_comparison.json");
        }
        manifest.stages_complete.push_back("stats");
    });

    if (code != kExitOk) manifest.stages_failed.push_back(current_stage);
    guard([&] { io::write_manifest(out / "manifest.json", manifest); });
    if (code == kExitOk)
        std::cout << "pipeline complete: " << out.string() << "/manifest.json\n";
    return code;
}

// ---------------------------------------------------------------------------
// argument parsing
// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args) {
    CLI::App app{"spatial-audio BCI toolkit: VBAP gains, oddball schedules, "
                 "synthetic EEG, MEMD cleaning, ERP statistics"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string format = "csv";
    bool format_set = false;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_set = true; });
    app.add_option("--format", format, "recording format: csv|binary")
        ->capture_default_str()
        ->each([&](const std::string&) { format_set = true; });

    // gains
    GainsOptions gains;
    auto* gains_cmd = app.add_subcommand("gains", "solve VBAP gain vectors to CSV");
    gains_cmd->add_option("--speakers", gains.speakers, "evenly spaced ring size");
    std::string ring_json;
    gains_cmd->add_option("--ring", ring_json, "ring spec JSON (azimuths_deg, radius_m)");
    gains_cmd->add_option("--azimuths", gains.azimuths_deg, "source azimuths in degrees");
    gains_cmd->add_option("--depths", gains.depths, "depth constants");
    gains_cmd->add_option("--mode", gains.mode, "virtual|real")->capture_default_str();

    // schedule
    ScheduleOptions schedule;
    auto* schedule_cmd = app.add_subcommand("schedule", "generate an oddball session plan");
    std::string session_config;
    std::vector<std::string> timbre_names, system_names;
    schedule_cmd->add_option("--config", session_config, "session config JSON file");
    schedule_cmd->add_option("--timbres", timbre_names, "stimulus timbres");
    schedule_cmd->add_option("--systems", system_names, "sound systems: real|virtual");
    schedule_cmd->add_option("--repetitions", schedule.config.repetitions,
                             "trials per (system, timbre, target)");
    schedule_cmd->add_option("--soa-ms", schedule.config.soa_ms, "stimulus onset asynchrony");
    schedule_cmd->add_option("--stimulus-ms", schedule.config.stimulus_ms, "stimulus length");
    schedule_cmd->add_flag("--wav", schedule.render_wav, "render stimulus audio (16-bit PCM)");
    schedule_cmd->add_option("--wav-trials", schedule.wav_trials,
                             "number of leading trials to render");

    // synth
    SynthOptions synth_options;
    auto* synth_cmd = app.add_subcommand("synth", "synthesize EEG for a session plan");
    synth_cmd->add_option("--plan", synth_options.plan_path, "session plan JSON")->required();
    std::string synth_config;
    synth_cmd->add_option("--config", synth_config, "synth spec JSON file");
    synth_cmd->add_option("--channels", synth_options.spec.n_channels, "EEG channel count");
    synth_cmd->add_option("--rate", synth_options.spec.sample_rate_hz, "sample rate in Hz");
    synth_cmd->add_option("--p300-amplitude", synth_options.spec.p300_amplitude_uv,
                          "P300 bump amplitude in microvolts");
    synth_cmd->add_option("--p300-latency", synth_options.spec.p300_latency_ms,
                          "P300 latency in ms");
    synth_cmd->add_option("--noise-sigma", synth_options.spec.noise_sigma_uv,
                          "background noise sigma in microvolts");
    synth_cmd->add_option("--blink-amplitude", synth_options.spec.blink_amplitude_uv,
                          "blink amplitude in microvolts");
    synth_cmd->add_option("--blink-rate", synth_options.spec.blink_rate_per_min,
                          "blinks per minute");
    synth_cmd->add_option("--drift-amplitude", synth_options.spec.drift_amplitude_uv,
                          "slow drift amplitude in microvolts");

    // preprocess
    PreprocessOptions preprocess;
    auto* preprocess_cmd =
        app.add_subcommand("preprocess", "band-limit and cut event-locked epochs");
    preprocess_cmd->add_option("--recording", preprocess.recording_path, "recording file")
        ->required();
    preprocess_cmd->add_option("--events", preprocess.events_path, "timeline CSV")->required();
    preprocess_cmd->add_option("--highpass", preprocess.highpass_hz, "highpass cutoff Hz");
    preprocess_cmd->add_option("--lowpass", preprocess.lowpass_hz, "lowpass cutoff Hz");
    preprocess_cmd->add_option("--order", preprocess.order, "Butterworth order");
    preprocess_cmd->add_option("--pre-ms", preprocess.window.pre_ms, "epoch window before onset");
    preprocess_cmd->add_option("--post-ms", preprocess.window.post_ms, "epoch window after onset");

    // clean
    CleanOptions clean;
    auto* clean_cmd = app.add_subcommand("clean", "MEMD artifact rejection per epoch");
    clean_cmd->add_option("--epochs", clean.epochs_path, "epoch file")->required();
    clean_cmd->add_option("--threshold-uv", clean.threshold_uv,
                          "peak-to-peak rejection threshold in microvolts");
    clean_cmd->add_option("--directions", clean.sift.direction_count, "projection directions");
    clean_cmd->add_option("--max-sift", clean.sift.max_sift_iters, "max sifting iterations");
    clean_cmd->add_option("--sd-threshold", clean.sift.sd_threshold, "sift SD stop threshold");
    clean_cmd->add_option("--max-imfs", clean.sift.max_imfs, "maximum IMF count");
    clean_cmd->add_option("--threads", clean.threads, "worker threads (0 = all cores)");
    clean_cmd->add_flag("--export-imfs", clean.export_imfs, "write per-epoch IMF stacks");

    // erp
    ErpOptions erp;
    auto* erp_cmd = app.add_subcommand("erp", "grand averages, P300 scores, SVG plot");
    erp_cmd->add_option("--epochs", erp.epochs_path, "epoch file")->required();
    erp_cmd->add_option("--window-lo", erp.window_lo_ms, "analysis window start ms");
    erp_cmd->add_option("--window-hi", erp.window_hi_ms, "analysis window end ms");

    // stats
    StatsOptions stats_options;
    auto* stats_cmd = app.add_subcommand("stats", "separability and behavioral tables");
    std::string stats_epochs, stats_plan, stats_responses;
    stats_cmd->add_option("--epochs", stats_epochs, "epoch file for separability");
    stats_cmd->add_option("--window-lo", stats_options.window_lo_ms, "window start ms");
    stats_cmd->add_option("--window-hi", stats_options.window_hi_ms, "window end ms");
    stats_cmd->add_option("--channel", stats_options.channel,
                          "channel index (-1 averages all)");
    stats_cmd->add_option("--plan", stats_plan, "session plan JSON for behavioral scoring");
    stats_cmd->add_option("--responses", stats_responses, "response log CSV");
    stats_cmd->add_option("--group-by", stats_options.group_by, "direction|timbre");
    stats_cmd->add_option("--response-window-ms", stats_options.response_window_hi_ms,
                          "behavioral scoring window end");

    // pipeline
    PipelineOptions pipeline;
    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "synth -> preprocess -> clean -> erp -> stats");
    std::string pipeline_config;
    pipeline_cmd->add_option("--config", pipeline_config, "pipeline config JSON file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            std::cout << app.help();
            return kExitOk;
        }
        std::cerr << "error [invalid-configuration]: " << e.what() << "\n";
        return kExitConfig;
    }

    const fs::path out(out_dir);
    if (gains_cmd->parsed()) {
        gains.out_dir = out;
        if (!ring_json.empty()) gains.ring_json = ring_json;
        return cmd_gains(gains);
    }
    if (schedule_cmd->parsed()) {
        schedule.out_dir = out;
        if (!session_config.empty()) schedule.config_json = session_config;
        if (seed_set) schedule.config.master_seed = seed;
        const int rc = guard([&] {
            if (!timbre_names.empty()) {
                schedule.config.timbres.clear();
                for (const std::string& t : timbre_names)
                    schedule.config.timbres.push_back(protocol::timbre_from_string(t));
            }
            if (!system_names.empty()) {
                schedule.config.systems.clear();
                for (const std::string& s : system_names)
                    schedule.config.systems.push_back(protocol::system_from_string(s));
            }
        });
        return rc != kExitOk ? rc : cmd_schedule(schedule);
    }
    if (synth_cmd->parsed()) {
        synth_options.out_dir = out;
        if (!synth_config.empty()) synth_options.spec_json = synth_config;
        if (seed_set) synth_options.spec.seed = seed;
        synth_options.format = io::format_from_string(format);
        return cmd_synth(synth_options);
    }
    if (preprocess_cmd->parsed()) {
        preprocess.out_dir = out;
        preprocess.format = io::format_from_string(format);
        return cmd_preprocess(preprocess);
    }
    if (clean_cmd->parsed()) {
        clean.out_dir = out;
        return cmd_clean(clean);
    }
    if (erp_cmd->parsed()) {
        erp.out_dir = out;
        return cmd_erp(erp);
    }
    if (stats_cmd->parsed()) {
        stats_options.out_dir = out;
        if (!stats_epochs.empty()) stats_options.epochs_path = stats_epochs;
        if (!stats_plan.empty()) stats_options.plan_path = stats_plan;
        if (!stats_responses.empty()) stats_options.responses_path = stats_responses;
        return cmd_stats(stats_options);
    }
    if (pipeline_cmd->parsed()) {
        pipeline.out_dir = out;
        if (!pipeline_config.empty()) pipeline.config_json = pipeline_config;
        if (seed_set) pipeline.seed = seed;
        if (format_set) pipeline.format = format;
        return cmd_pipeline(pipeline);
    }
    return kExitConfig;
}

} // namespace sabci::cli
