#include "sabci/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sabci/error.hpp"
#include "sabci/sha256.hpp"

namespace sabci::io {

using nlohmann::json;

namespace {

constexpr std::uint32_t kFormatVersion = 1;

void require(bool ok, const std::string& message) {
    if (!ok) fail(ErrorKind::data, message);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

// binary primitives, little-endian on every supported platform
template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const auto len = get<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}

void put_magic(std::ostream& out, const char magic[9]) {
    out.write(magic, 8);
    put<std::uint32_t>(out, kFormatVersion);
}

void check_magic(std::istream& in, const char magic[9], const fs::path& path) {
    char buf[8];
    in.read(buf, 8);
    require(in.good() && std::memcmp(buf, magic, 8) == 0,
            path.string() + ": wrong magic (expected " + std::string(magic) + ")");
    const auto version = get<std::uint32_t>(in);
    require(version == kFormatVersion,
            path.string() + ": unsupported format version " + std::to_string(version));
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out) fail(ErrorKind::data, "cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) fail(ErrorKind::data, "cannot open " + path.string() + " for reading");
    return in;
}

void put_event(std::ostream& out, const protocol::StimulusEvent& e) {
    put<std::int64_t>(out, e.onset_ms);
    put<std::int64_t>(out, e.duration_ms);
    put<double>(out, e.direction_deg);
    put<double>(out, e.depth_c);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(e.timbre));
    put<std::uint8_t>(out, e.is_target ? 1 : 0);
}

protocol::StimulusEvent get_event(std::istream& in) {
    protocol::StimulusEvent e;
    e.onset_ms = get<std::int64_t>(in);
    e.duration_ms = get<std::int64_t>(in);
    e.direction_deg = get<double>(in);
    e.depth_c = get<double>(in);
    e.timbre = static_cast<protocol::Timbre>(get<std::uint8_t>(in));
    e.is_target = get<std::uint8_t>(in) != 0;
    return e;
}

json event_to_json(const protocol::StimulusEvent& e) {
    return json{{"onset_ms", e.onset_ms},
                {"duration_ms", e.duration_ms},
                {"direction_deg", e.direction_deg},
                {"depth_c", e.depth_c},
                {"timbre", protocol::to_string(e.timbre)},
                {"is_target", e.is_target}};
}

protocol::StimulusEvent event_from_json(const json& j) {
    protocol::StimulusEvent e;
    e.onset_ms = j.at("onset_ms").get<std::int64_t>();
    e.duration_ms = j.at("duration_ms").get<std::int64_t>();
    e.direction_deg = j.at("direction_deg").get<double>();
    e.depth_c = j.at("depth_c").get<double>();
    e.timbre = protocol::timbre_from_string(j.at("timbre").get<std::string>());
    e.is_target = j.at("is_target").get<bool>();
    return e;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, result.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto result = std::from_chars(begin, end, v);
    if (result.ec != std::errc() || result.ptr != end)
        fail(ErrorKind::data, "malformed number: '" + s + "'");
    return v;
}

void write_text_file(const fs::path& path, const std::string& content) {
    auto out = open_out(path, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_text_file(const fs::path& path) {
    auto in = open_in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_recording_csv(const fs::path& path, const MultichannelRecording& rec) {
    rec.validate();
    std::string text;
    const std::vector<std::string> names = rec.channel_names.empty()
                                               ? default_channel_names(rec.channels())
                                               : rec.channel_names;
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (c) text += ',';
        text += names[c];
    }
    text += '\n';
    for (std::size_t t = 0; t < rec.length(); ++t) {
        for (std::size_t c = 0; c < rec.channels(); ++c) {
            if (c) text += ',';
            text += format_double(rec.samples(c, t));
        }
        text += '\n';
    }
    write_text_file(path, text);

    json sidecar{{"sample_rate_hz", rec.sample_rate_hz}};
    write_text_file(fs::path(path).concat(".json"), sidecar.dump(2) + "\n");
}

MultichannelRecording read_recording_csv(const fs::path& path) {
    const json sidecar = json::parse(read_text_file(fs::path(path).concat(".json")));

    auto in = open_in(path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), path.string() + ": empty CSV");
    MultichannelRecording rec;
    rec.sample_rate_hz = sidecar.at("sample_rate_hz").get<double>();
    rec.channel_names = split_csv_line(line);
    const std::size_t channels = rec.channel_names.size();

    std::vector<std::vector<double>> columns(channels);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        require(fields.size() == channels, path.string() + ": ragged CSV row");
        for (std::size_t c = 0; c < channels; ++c) columns[c].push_back(parse_double(fields[c]));
    }
    rec.samples = Matrix(channels, columns.empty() ? 0 : columns[0].size());
    for (std::size_t c = 0; c < channels; ++c)
        std::copy(columns[c].begin(), columns[c].end(), rec.samples.row(c).begin());
    rec.validate();
    return rec;
}

void write_recording_binary(const fs::path& path, const MultichannelRecording& rec) {
    rec.validate();
    auto out = open_out(path, std::ios::binary);
    put_magic(out, "SABCIREC");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.channels()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(rec.length()));
    put<double>(out, rec.sample_rate_hz);
    const std::vector<std::string> names = rec.channel_names.empty()
                                               ? default_channel_names(rec.channels())
                                               : rec.channel_names;
    for (const std::string& name : names) put_string(out, name);
    out.write(reinterpret_cast<const char*>(rec.samples.data()),
              static_cast<std::streamsize>(rec.samples.size() * sizeof(double)));
}

MultichannelRecording read_recording_binary(const fs::path& path) {
    auto in = open_in(path, std::ios::binary);
    check_magic(in, "SABCIREC", path);
    const auto channels = get<std::uint32_t>(in);
    const auto samples = get<std::uint64_t>(in);
    MultichannelRecording rec;
    rec.sample_rate_hz = get<double>(in);
    for (std::uint32_t c = 0; c < channels; ++c) rec.channel_names.push_back(get_string(in));
    rec.samples = Matrix(channels, samples);
    in.read(reinterpret_cast<char*>(rec.samples.data()),
            static_cast<std::streamsize>(rec.samples.size() * sizeof(double)));
    require(in.good(), path.string() + ": truncated recording");
    rec.validate();
    return rec;
}

Format format_from_string(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "binary") return Format::binary;
    fail(ErrorKind::invalid_configuration, "unknown format: " + s + " (expected csv|binary)");
}

void write_recording(const fs::path& path_no_ext, const MultichannelRecording& rec, Format f) {
    if (f == Format::csv)
        write_recording_csv(fs::path(path_no_ext).concat(".csv"), rec);
    else
        write_recording_binary(fs::path(path_no_ext).concat(".bin"), rec);
}

MultichannelRecording read_recording(const fs::path& path) {
    if (path.extension() == ".csv") return read_recording_csv(path);
    return read_recording_binary(path);
}

void write_imf_stack(const fs::path& path, const memd::IMFStack& stack, double sample_rate_hz) {
    auto out = open_out(path, std::ios::binary);
    put_magic(out, "SABCIIMF");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(stack.count()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(stack.residue.channels()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(stack.residue.samples()));
    put<double>(out, sample_rate_hz);
    for (const Matrix& imf : stack.imfs)
        out.write(reinterpret_cast<const char*>(imf.data()),
                  static_cast<std::streamsize>(imf.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(stack.residue.data()),
              static_cast<std::streamsize>(stack.residue.size() * sizeof(double)));
}

std::pair<memd::IMFStack, double> read_imf_stack(const fs::path& path) {
    auto in = open_in(path, std::ios::binary);
    check_magic(in, "SABCIIMF", path);
    const auto count = get<std::uint32_t>(in);
    const auto channels = get<std::uint32_t>(in);
    const auto samples = get<std::uint64_t>(in);
    const double fs = get<double>(in);
    memd::IMFStack stack;
    for (std::uint32_t m = 0; m < count; ++m) {
        Matrix imf(channels, samples);
        in.read(reinterpret_cast<char*>(imf.data()),
                static_cast<std::streamsize>(imf.size() * sizeof(double)));
        stack.imfs.push_back(std::move(imf));
    }
    stack.residue = Matrix(channels, samples);
    in.read(reinterpret_cast<char*>(stack.residue.data()),
            static_cast<std::streamsize>(stack.residue.size() * sizeof(double)));
    require(in.good(), path.string() + ": truncated IMF stack");
    return {std::move(stack), fs};
}

void write_imf_stack_csv(const fs::path& directory, const std::string& stem,
                         const memd::IMFStack& stack) {
    fs::create_directories(directory);
    for (std::size_t c = 0; c < stack.residue.channels(); ++c) {
        std::string text;
        for (std::size_t m = 0; m < stack.count(); ++m)
            text += "imf_" + std::to_string(m + 1) + ",";
        text += "residue\n";
        for (std::size_t t = 0; t < stack.residue.samples(); ++t) {
            for (std::size_t m = 0; m < stack.count(); ++m)
                text += format_double(stack.imfs[m](c, t)) + ",";
            text += format_double(stack.residue(c, t));
            text += '\n';
        }
        write_text_file(directory / (stem + "_ch" + std::to_string(c + 1) + ".csv"), text);
    }
}

void write_epochs(const fs::path& path, std::span<const dsp::Epoch> epochs) {
    auto out = open_out(path, std::ios::binary);
    put_magic(out, "SABCIEPO");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(epochs.size()));
    if (epochs.empty()) return;
    const dsp::Epoch& first = epochs.front();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(first.samples.channels()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(first.samples.samples()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(first.onset_index));
    put<double>(out, first.sample_rate_hz);
    for (const dsp::Epoch& epoch : epochs) {
        require(epoch.samples.same_shape(first.samples) &&
                    epoch.onset_index == first.onset_index,
                "epoch shapes differ");
        put_event(out, epoch.event);
        out.write(reinterpret_cast<const char*>(epoch.samples.data()),
                  static_cast<std::streamsize>(epoch.samples.size() * sizeof(double)));
    }
}

std::vector<dsp::Epoch> read_epochs(const fs::path& path) {
    auto in = open_in(path, std::ios::binary);
    check_magic(in, "SABCIEPO", path);
    const auto count = get<std::uint32_t>(in);
    std::vector<dsp::Epoch> epochs;
    if (count == 0) return epochs;
    const auto channels = get<std::uint32_t>(in);
    const auto samples = get<std::uint32_t>(in);
    const auto onset_index = get<std::uint32_t>(in);
    const double fs = get<double>(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        dsp::Epoch epoch;
        epoch.onset_index = onset_index;
        epoch.sample_rate_hz = fs;
        epoch.event = get_event(in);
        epoch.samples = Matrix(channels, samples);
        in.read(reinterpret_cast<char*>(epoch.samples.data()),
                static_cast<std::streamsize>(epoch.samples.size() * sizeof(double)));
        epochs.push_back(std::move(epoch));
    }
    require(in.good(), path.string() + ": truncated epoch file");
    return epochs;
}

std::string session_plan_to_json(const protocol::SessionPlan& plan) {
    json config;
    for (const protocol::Timbre t : plan.config.timbres)
        config["timbres"].push_back(protocol::to_string(t));
    for (const protocol::SoundSystem s : plan.config.systems)
        config["systems"].push_back(protocol::to_string(s));
    config["repetitions"] = plan.config.repetitions;
    config["directions_deg"] = plan.config.directions_deg;
    config["depths"] = plan.config.depths;
    config["soa_ms"] = plan.config.soa_ms;
    config["stimulus_ms"] = plan.config.stimulus_ms;
    config["master_seed"] = plan.config.master_seed;

    json trials = json::array();
    for (const protocol::TrialPlan& trial : plan.trials) {
        json t;
        t["target_key"] = {{"direction_deg", trial.target_key.direction_deg},
                           {"depth_c", trial.target_key.depth_c}};
        t["seed"] = trial.seed;
        t["timbre"] = protocol::to_string(trial.timbre);
        t["system"] = protocol::to_string(trial.system);
        t["start_ms"] = trial.start_ms;
        t["soa_ms"] = trial.soa_ms;
        t["events"] = json::array();
        for (const protocol::StimulusEvent& e : trial.events)
            t["events"].push_back(event_to_json(e));
        trials.push_back(std::move(t));
    }
    return json{{"config", config}, {"trials", trials}}.dump(2) + "\n";
}

protocol::SessionPlan session_plan_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::data, std::string("malformed session plan JSON: ") + e.what());
    }
    protocol::SessionPlan plan;
    const json& config = j.at("config");
    plan.config.timbres.clear();
    for (const auto& t : config.at("timbres"))
        plan.config.timbres.push_back(protocol::timbre_from_string(t.get<std::string>()));
    plan.config.systems.clear();
    for (const auto& s : config.at("systems"))
        plan.config.systems.push_back(protocol::system_from_string(s.get<std::string>()));
    plan.config.repetitions = config.at("repetitions").get<int>();
    plan.config.directions_deg = config.at("directions_deg").get<std::vector<double>>();
    plan.config.depths = config.at("depths").get<std::vector<double>>();
    plan.config.soa_ms = config.at("soa_ms").get<std::int64_t>();
    plan.config.stimulus_ms = config.at("stimulus_ms").get<std::int64_t>();
    plan.config.master_seed = config.at("master_seed").get<std::uint64_t>();

    for (const auto& t : j.at("trials")) {
        protocol::TrialPlan trial;
        trial.target_key.direction_deg = t.at("target_key").at("direction_deg").get<double>();
        trial.target_key.depth_c = t.at("target_key").at("depth_c").get<double>();
        trial.seed = t.at("seed").get<std::uint64_t>();
        trial.timbre = protocol::timbre_from_string(t.at("timbre").get<std::string>());
        trial.system = protocol::system_from_string(t.at("system").get<std::string>());
        trial.start_ms = t.at("start_ms").get<std::int64_t>();
        trial.soa_ms = t.at("soa_ms").get<std::int64_t>();
        for (const auto& e : t.at("events")) trial.events.push_back(event_from_json(e));
        plan.trials.push_back(std::move(trial));
    }
    return plan;
}

void write_session_plan(const fs::path& path, const protocol::SessionPlan& plan) {
    write_text_file(path, session_plan_to_json(plan));
}

protocol::SessionPlan read_session_plan(const fs::path& path) {
    return session_plan_from_json(read_text_file(path));
}

void write_timeline_csv(const fs::path& path,
                        std::span<const protocol::StimulusEvent> events) {
    std::string text = "onset_ms,duration_ms,direction_deg,depth_c,timbre,is_target\n";
    for (const protocol::StimulusEvent& e : events) {
        text += std::to_string(e.onset_ms) + ',' + std::to_string(e.duration_ms) + ',' +
                format_double(e.direction_deg) + ',' + format_double(e.depth_c) + ',' +
                protocol::to_string(e.timbre) + ',' + (e.is_target ? "1" : "0") + '\n';
    }
    write_text_file(path, text);
}

std::vector<protocol::StimulusEvent> read_timeline_csv(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), path.string() + ": empty timeline");
    std::vector<protocol::StimulusEvent> events;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        require(fields.size() == 6, path.string() + ": timeline row needs 6 fields");
        protocol::StimulusEvent e;
        e.onset_ms = std::stoll(fields[0]);
        e.duration_ms = std::stoll(fields[1]);
        e.direction_deg = parse_double(fields[2]);
        e.depth_c = parse_double(fields[3]);
        e.timbre = protocol::timbre_from_string(fields[4]);
        e.is_target = fields[5] == "1";
        events.push_back(e);
    }
    return events;
}

void write_response_log_csv(const fs::path& path, const protocol::ResponseLog& log) {
    std::string text = "press_ms\n";
    for (std::int64_t t : log.presses_ms) text += std::to_string(t) + '\n';
    write_text_file(path, text);
}

protocol::ResponseLog read_response_log_csv(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), path.string() + ": empty response log");
    protocol::ResponseLog log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        log.presses_ms.push_back(std::stoll(line));
    }
    return log;
}

void write_gains_csv(const fs::path& path, std::size_t n_speakers,
                     std::span<const std::tuple<double, double, std::vector<double>>> rows) {
    std::string text = "azimuth_deg,depth_c";
    for (std::size_t i = 0; i < n_speakers; ++i) text += ",g_" + std::to_string(i);
    text += '\n';
    for (const auto& [azimuth, depth, gains] : rows) {
        text += format_double(azimuth) + ',' + format_double(depth);
        for (double g : gains) text += ',' + format_double(g);
        text += '\n';
    }
    write_text_file(path, text);
}

void write_erp_csv(const fs::path& path, const stats::ERPAverage& erp,
                   const std::vector<std::string>& channel_names) {
    std::string text = "time_ms";
    const std::vector<std::string> names = channel_names.empty()
                                               ? default_channel_names(erp.mean.channels())
                                               : channel_names;
    for (const std::string& name : names) text += ',' + name;
    text += '\n';
    for (std::size_t t = 0; t < erp.mean.samples(); ++t) {
        const double time_ms = (static_cast<double>(t) - static_cast<double>(erp.onset_index)) *
                               1000.0 / erp.sample_rate_hz;
        text += format_double(time_ms);
        for (std::size_t c = 0; c < erp.mean.channels(); ++c)
            text += ',' + format_double(erp.mean(c, t));
        text += '\n';
    }
    write_text_file(path, text);
}

void write_erp_svg(const fs::path& path, const stats::ERPAverage& target,
                   const stats::ERPAverage& nontarget,
                   const std::vector<std::string>& channel_names, double window_lo_ms,
                   double window_hi_ms) {
    if (!target.mean.same_shape(nontarget.mean))
        fail(ErrorKind::invalid_argument, "target and non-target averages differ in shape");

    const std::size_t channels = target.mean.channels();
    const std::size_t samples = target.mean.samples();
    const double panel_w = 360.0, panel_h = 120.0, margin = 40.0;
    const std::size_t cols = 2;
    const std::size_t rows = (channels + cols - 1) / cols;
    const double width = margin + cols * (panel_w + margin);
    const double height = margin + rows * (panel_h + margin);

    double lo = 1e300, hi = -1e300;
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t t = 0; t < samples; ++t) {
            lo = std::min({lo, target.mean(c, t), nontarget.mean(c, t)});
            hi = std::max({hi, target.mean(c, t), nontarget.mean(c, t)});
        }
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double t0_ms = -static_cast<double>(target.onset_index) * 1000.0 /
                         target.sample_rate_hz;
    const double t1_ms = (static_cast<double>(samples - 1) -
                          static_cast<double>(target.onset_index)) *
                         1000.0 / target.sample_rate_hz;
    const std::vector<std::string> names =
        channel_names.empty() ? default_channel_names(channels) : channel_names;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
           "\" height=\"" + format_double(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    auto polyline = [&](const Matrix& data, std::size_t c, double ox, double oy,
                        const char* stroke, const char* dash) {
        std::string points;
        for (std::size_t t = 0; t < samples; ++t) {
            const double x = ox + panel_w * static_cast<double>(t) /
                                      static_cast<double>(samples - 1);
            const double y = oy + panel_h * (1.0 - (data(c, t) - lo) / (hi - lo));
            points += format_double(x) + "," + format_double(y) + " ";
        }
        return "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
               "\" stroke-width=\"1.2\"" +
               (dash[0] ? " stroke-dasharray=\"" + std::string(dash) + "\"" : "") +
               " points=\"" + points + "\"/>\n";
    };

    for (std::size_t c = 0; c < channels; ++c) {
        const double ox = margin + static_cast<double>(c % cols) * (panel_w + margin);
        const double oy = margin + static_cast<double>(c / cols) * (panel_h + margin);
        svg += "<rect x=\"" + format_double(ox) + "\" y=\"" + format_double(oy) + "\" width=\"" +
               format_double(panel_w) + "\" height=\"" + format_double(panel_h) +
               "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
        // analysis window
        const double wx0 = ox + panel_w * (window_lo_ms - t0_ms) / (t1_ms - t0_ms);
        const double wx1 = ox + panel_w * (window_hi_ms - t0_ms) / (t1_ms - t0_ms);
        svg += "<rect x=\"" + format_double(wx0) + "\" y=\"" + format_double(oy) + "\" width=\"" +
               format_double(wx1 - wx0) + "\" height=\"" + format_double(panel_h) +
               "\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"3,3\"/>\n";
        svg += polyline(target.mean, c, ox, oy, "#1f4fbf", "");
        svg += polyline(nontarget.mean, c, ox, oy, "#bf1f1f", "5,4");
        svg += "<text x=\"" + format_double(ox + 4) + "\" y=\"" + format_double(oy + 14) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + names[c] + "</text>\n";
    }
    svg += "</svg>\n";
    write_text_file(path, svg);
}

void write_table_csv(const fs::path& path, std::span<const stats::TableRow> rows,
                     const std::string& group_header) {
    std::string text = group_header + ",ar_percent,art_ms,sigma_ms,false_alarms\n";
    for (const stats::TableRow& row : rows) {
        text += row.group + ',' + format_double(row.ar_percent) + ',';
        text += row.art_ms ? format_double(*row.art_ms) : std::string("");
        text += ',';
        text += row.sigma_ms ? format_double(*row.sigma_ms) : std::string("");
        text += ',' + std::to_string(row.false_alarms) + '\n';
    }
    write_text_file(path, text);
}

void write_wav16(const fs::path& path, const Matrix& samples, unsigned sample_rate_hz) {
    const std::uint16_t channels = static_cast<std::uint16_t>(samples.channels());
    const std::uint32_t frames = static_cast<std::uint32_t>(samples.samples());
    const std::uint16_t bits = 16;
    const std::uint32_t byte_rate = sample_rate_hz * channels * bits / 8;
    const std::uint16_t block_align = channels * bits / 8;
    const std::uint32_t data_size = frames * block_align;

    auto out = open_out(path, std::ios::binary);
    out.write("RIFF", 4);
    put<std::uint32_t>(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put<std::uint32_t>(out, 16);
    put<std::uint16_t>(out, 1); // PCM
    put<std::uint16_t>(out, channels);
    put<std::uint32_t>(out, sample_rate_hz);
    put<std::uint32_t>(out, byte_rate);
    put<std::uint16_t>(out, block_align);
    put<std::uint16_t>(out, bits);
    out.write("data", 4);
    put<std::uint32_t>(out, data_size);
    for (std::uint32_t t = 0; t < frames; ++t) {
        for (std::uint16_t c = 0; c < channels; ++c) {
            const double v = std::clamp(samples(c, t), -1.0, 1.0);
            put<std::int16_t>(out, static_cast<std::int16_t>(std::lround(v * 32767.0)));
        }
    }
}

std::string sha256_of_file(const fs::path& path) {
    auto in = open_in(path, std::ios::binary);
    Sha256 hash;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        hash.update(buf, static_cast<std::size_t>(in.gcount()));
    return hash.hex_digest();
}

void RunManifest::add_artifact(const fs::path& run_dir, const fs::path& file) {
    artifacts.push_back({fs::relative(file, run_dir).generic_string(), sha256_of_file(file)});
}

std::string RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
    j["stages_complete"] = stages_complete;
    j["stages_failed"] = stages_failed;
    json arts = json::array();
    for (const ManifestEntry& a : artifacts)
        arts.push_back({{"name", a.name}, {"sha256", a.sha256}});
    j["artifacts"] = arts;
    return j.dump(2) + "\n";
}

void write_manifest(const fs::path& path, const RunManifest& manifest) {
    write_text_file(path, manifest.to_json());
}

} // namespace sabci::io
