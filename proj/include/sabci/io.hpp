#ifndef SABCI_IO_HPP
#define SABCI_IO_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sabci/dsp.hpp"
#include "sabci/matrix.hpp"
#include "sabci/memd.hpp"
#include "sabci/protocol.hpp"
#include "sabci/stats.hpp"
#include "sabci/synth.hpp"

namespace sabci::io {

namespace fs = std::filesystem;

// Shortest round-trip decimal form of a double (std::to_chars), so CSV
// output is byte-deterministic and re-reads bit-exactly.
std::string format_double(double v);
double parse_double(const std::string& s);

void write_text_file(const fs::path& path, const std::string& content);
std::string read_text_file(const fs::path& path);

// --- recordings ---------------------------------------------------------
// CSV: header row of channel names, one column per channel; the sample
// rate travels in a sidecar JSON next to the file (<name>.json).
void write_recording_csv(const fs::path& path, const MultichannelRecording& rec);
MultichannelRecording read_recording_csv(const fs::path& path);

// Binary: little-endian; magic "SABCIREC", u32 version, u32 channels,
// u64 samples, f64 sample rate, channel names, then channel-major f64 data.
void write_recording_binary(const fs::path& path, const MultichannelRecording& rec);
MultichannelRecording read_recording_binary(const fs::path& path);

enum class Format { csv, binary };
Format format_from_string(const std::string& s);
void write_recording(const fs::path& path_no_ext, const MultichannelRecording& rec, Format f);
MultichannelRecording read_recording(const fs::path& path);

// --- IMF stacks ---------------------------------------------------------
// Binary recording layout with a leading IMF-index dimension; magic
// "SABCIIMF". The residue is stored as the final block.
void write_imf_stack(const fs::path& path, const memd::IMFStack& stack, double sample_rate_hz);
std::pair<memd::IMFStack, double> read_imf_stack(const fs::path& path);

// One CSV per channel: columns imf_1..imf_M, residue.
void write_imf_stack_csv(const fs::path& directory, const std::string& stem,
                         const memd::IMFStack& stack);

// --- epochs -------------------------------------------------------------
// Binary container for an epoch list; magic "SABCIEPO".
void write_epochs(const fs::path& path, std::span<const dsp::Epoch> epochs);
std::vector<dsp::Epoch> read_epochs(const fs::path& path);

// --- protocol -----------------------------------------------------------
std::string session_plan_to_json(const protocol::SessionPlan& plan);
protocol::SessionPlan session_plan_from_json(const std::string& text);
void write_session_plan(const fs::path& path, const protocol::SessionPlan& plan);
protocol::SessionPlan read_session_plan(const fs::path& path);

// Timeline CSV columns: onset_ms,duration_ms,direction_deg,depth_c,timbre,is_target
void write_timeline_csv(const fs::path& path, std::span<const protocol::StimulusEvent> events);
std::vector<protocol::StimulusEvent> read_timeline_csv(const fs::path& path);

void write_response_log_csv(const fs::path& path, const protocol::ResponseLog& log);
protocol::ResponseLog read_response_log_csv(const fs::path& path);

// --- analysis outputs ---------------------------------------------------
// Gain table rows: azimuth_deg,depth_c,g_0..g_{N-1}
void write_gains_csv(const fs::path& path, std::size_t n_speakers,
                     std::span<const std::tuple<double, double, std::vector<double>>> rows);

// ERP CSV: time_ms column then one column per channel.
void write_erp_csv(const fs::path& path, const stats::ERPAverage& erp,
                   const std::vector<std::string>& channel_names);

// Line plot per channel: target solid, non-target dashed, analysis window
// drawn as a rectangle.
void write_erp_svg(const fs::path& path, const stats::ERPAverage& target,
                   const stats::ERPAverage& nontarget,
                   const std::vector<std::string>& channel_names, double window_lo_ms,
                   double window_hi_ms);

void write_table_csv(const fs::path& path, std::span<const stats::TableRow> rows,
                     const std::string& group_header);

// --- audio --------------------------------------------------------------
// 16-bit PCM WAV, interleaved; samples clipped to [-1, 1].
void write_wav16(const fs::path& path, const Matrix& samples, unsigned sample_rate_hz);

// --- manifests ----------------------------------------------------------
std::string sha256_of_file(const fs::path& path);

struct ManifestEntry {
    std::string name;   // path relative to the run directory
    std::string sha256;
};

struct RunManifest {
    std::string command;
    std::string config_json; // echo of the effective configuration
    std::vector<std::string> stages_complete;
    std::vector<std::string> stages_failed;
    std::vector<ManifestEntry> artifacts;

    void add_artifact(const fs::path& run_dir, const fs::path& file);
    std::string to_json() const;
};

void write_manifest(const fs::path& path, const RunManifest& manifest);

} // namespace sabci::io

#endif
