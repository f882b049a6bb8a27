#ifndef SABCI_CLI_HPP
#define SABCI_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sabci/dsp.hpp"
#include "sabci/io.hpp"
#include "sabci/memd.hpp"
#include "sabci/protocol.hpp"
#include "sabci/synth.hpp"

namespace sabci::cli {

namespace fs = std::filesystem;

// exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

int exit_code_for(ErrorKind kind);

struct GainsOptions {
    std::size_t speakers = 8;
    std::optional<fs::path> ring_json; // overrides `speakers`
    std::vector<double> azimuths_deg;  // explicit list; empty -> header only
    std::vector<double> depths = {0.2, 1.0};
    std::string mode = "virtual";
    fs::path out_dir = ".";
};
int cmd_gains(const GainsOptions& options);

struct ScheduleOptions {
    protocol::SessionConfig config;
    std::optional<fs::path> config_json; // session config file, overrides fields
    fs::path out_dir = ".";
    bool render_wav = false;
    std::size_t wav_trials = 1; // leading trials rendered to audio
};
int cmd_schedule(const ScheduleOptions& options);

struct SynthOptions {
    fs::path plan_path;
    synth::SynthSpec spec;
    std::optional<fs::path> spec_json;
    io::Format format = io::Format::csv;
    fs::path out_dir = ".";
};
int cmd_synth(const SynthOptions& options);

struct PreprocessOptions {
    fs::path recording_path;
    fs::path events_path;
    double highpass_hz = 0.5;
    double lowpass_hz = 20.0;
    int order = 5;
    dsp::EpochWindow window;
    bool baseline = true;
    io::Format format = io::Format::csv;
    fs::path out_dir = ".";
};
int cmd_preprocess(const PreprocessOptions& options);

struct CleanOptions {
    fs::path epochs_path;
    double threshold_uv = 20.0;
    memd::SiftConfig sift;
    unsigned threads = 0; // 0 = hardware concurrency
    bool export_imfs = false;
    fs::path out_dir = ".";
};
int cmd_clean(const CleanOptions& options);

struct ErpOptions {
    fs::path epochs_path;
    double window_lo_ms = 250.0;
    double window_hi_ms = 500.0;
    fs::path out_dir = ".";
};
int cmd_erp(const ErpOptions& options);

struct StatsOptions {
    // EEG mode: separability from an epoch file
    std::optional<fs::path> epochs_path;
    double window_lo_ms = 250.0;
    double window_hi_ms = 500.0;
    int channel = -1;
    // behavioral mode: score a plan against response logs
    std::optional<fs::path> plan_path;
    std::optional<fs::path> responses_path;
    std::string group_by = "direction";
    std::int64_t response_window_hi_ms = 1000;
    fs::path out_dir = ".";
};
int cmd_stats(const StatsOptions& options);

struct PipelineOptions {
    std::optional<fs::path> config_json;
    std::optional<std::uint64_t> seed; // overrides the config seed
    std::optional<std::string> format;
    fs::path out_dir = ".";
};
int cmd_pipeline(const PipelineOptions& options);

// Entry point used by main() and by in-process tests.
int run(const std::vector<std::string>& args);

} // namespace sabci::cli

#endif
