#include "sabci/vbap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sabci/error.hpp"

namespace sabci::vbap {

namespace {

constexpr double kDegToRad = M_PI / 180.0;
constexpr double kSingularDetTol = 1e-9;

// circular difference a-b wrapped into (-180, 180]
double circular_diff(double a, double b) {
    return normalize_azimuth(a - b);
}

void validate_source(const VirtualSource& source) {
    if (!std::isfinite(source.azimuth_deg))
        fail(ErrorKind::invalid_argument, "source azimuth must be finite");
    if (!(source.depth_c >= 0.0 && source.depth_c <= 1.0))
        fail(ErrorKind::invalid_argument,
             "depth constant must lie in [0, 1], got " + std::to_string(source.depth_c));
}

} // namespace

double normalize_azimuth(double degrees) {
    if (!std::isfinite(degrees))
        fail(ErrorKind::invalid_argument, "azimuth must be finite");
    double a = std::fmod(degrees, 360.0);
    if (a <= -180.0) a += 360.0;
    if (a > 180.0) a -= 360.0;
    return a;
}

Vec2 direction_vector(double azimuth_deg) {
    const double theta = normalize_azimuth(azimuth_deg) * kDegToRad;
    return {std::cos(theta), std::sin(theta)};
}

LoudspeakerRing make_ring(std::size_t n, double radius_m) {
    if (n < 2)
        fail(ErrorKind::invalid_configuration,
             "a loudspeaker ring needs at least 2 loudspeakers, got " + std::to_string(n));
    if (!(radius_m > 0.0))
        fail(ErrorKind::invalid_configuration, "ring radius must be positive");

    std::vector<double> azimuths;
    azimuths.reserve(n);
    const double step = 360.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        azimuths.push_back(normalize_azimuth(step * static_cast<double>(i)));
    std::sort(azimuths.begin(), azimuths.end());
    return {std::move(azimuths), radius_m};
}

LoudspeakerRing ring_from_azimuths(std::vector<double> azimuths_deg, double radius_m) {
    if (azimuths_deg.size() < 2)
        fail(ErrorKind::invalid_configuration, "a loudspeaker ring needs at least 2 loudspeakers");
    if (!(radius_m > 0.0))
        fail(ErrorKind::invalid_configuration, "ring radius must be positive");
    for (double& a : azimuths_deg) a = normalize_azimuth(a);
    std::sort(azimuths_deg.begin(), azimuths_deg.end());
    for (std::size_t i = 1; i < azimuths_deg.size(); ++i)
        if (std::abs(azimuths_deg[i] - azimuths_deg[i - 1]) <= kCoincidentTolDeg)
            fail(ErrorKind::invalid_configuration, "duplicate loudspeaker azimuths");
    return {std::move(azimuths_deg), radius_m};
}

PairBase select_pair(const LoudspeakerRing& ring, double azimuth_deg) {
    const std::size_t n = ring.size();
    if (n < 2) fail(ErrorKind::invalid_configuration, "ring has fewer than 2 loudspeakers");
    const double az = normalize_azimuth(azimuth_deg);

    auto make_pair = [&](std::size_t i, std::size_t j) {
        PairBase pair{i, j, ring.direction(i), ring.direction(j)};
        if (std::abs(pair.det()) < kSingularDetTol)
            fail(ErrorKind::degenerate_pair,
                 "loudspeaker pair at " + std::to_string(ring.azimuths_deg[i]) + " and " +
                     std::to_string(ring.azimuths_deg[j]) +
                     " deg spans 180 deg; the 2x2 base is singular");
        return pair;
    };

    // coincident with a loudspeaker: take the flanking neighbors
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(circular_diff(az, ring.azimuths_deg[k])) <= kCoincidentTolDeg)
            return make_pair((k + n - 1) % n, (k + 1) % n);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const double span =
            std::fmod(ring.azimuths_deg[j] - ring.azimuths_deg[i] + 360.0, 360.0);
        double offset = std::fmod(az - ring.azimuths_deg[i] + 360.0, 360.0);
        if (offset > 0.0 && offset < span) return make_pair(i, j);
    }
    fail(ErrorKind::invalid_argument,
         "no arc contains azimuth " + std::to_string(az) + " deg");
}

std::array<double, 2> solve_gains(const PairBase& pair, const VirtualSource& source) {
    validate_source(source);
    const double det = pair.det();
    if (std::abs(det) < kSingularDetTol)
        fail(ErrorKind::degenerate_pair, "pair base is singular");

    const Vec2 p = direction_vector(source.azimuth_deg);
    double g1 = (p.x * pair.l2.y - p.y * pair.l2.x) / det;
    double g2 = (p.y * pair.l1.x - p.x * pair.l1.y) / det;

    // tolerate roundoff when the source sits exactly on a pair member
    constexpr double kNegTol = 1e-12;
    if (g1 < 0.0 && g1 > -kNegTol) g1 = 0.0;
    if (g2 < 0.0 && g2 > -kNegTol) g2 = 0.0;
    if (g1 < 0.0 || g2 < 0.0)
        fail(ErrorKind::out_of_arc,
             "source at " + std::to_string(source.azimuth_deg) +
                 " deg lies outside the pair's arc (negative gain)");
    return {g1, g2};
}

std::array<double, 2> apply_depth(double g1, double g2, double depth_c) {
    if (!(depth_c >= 0.0 && depth_c <= 1.0))
        fail(ErrorKind::invalid_argument, "depth constant must lie in [0, 1]");
    if (depth_c == 0.0) return {0.0, 0.0};
    const double power = g1 * g1 + g2 * g2;
    if (power <= 0.0)
        fail(ErrorKind::invalid_argument, "cannot normalize zero gains to nonzero depth");
    const double scale = std::sqrt(depth_c / power);
    return {g1 * scale, g2 * scale};
}

double PanningGains::power() const {
    double acc = 0.0;
    for (double g : gains) acc += g * g;
    return acc;
}

PanningGains ring_gain_vector(const LoudspeakerRing& ring, const VirtualSource& source) {
    validate_source(source);
    PanningGains result;
    result.gains.assign(ring.size(), 0.0);
    result.depth_c = source.depth_c;

    if (source.mode == SourceMode::real_speaker) {
        const double az = normalize_azimuth(source.azimuth_deg);
        for (std::size_t k = 0; k < ring.size(); ++k) {
            if (std::abs(circular_diff(az, ring.azimuths_deg[k])) <= kCoincidentTolDeg) {
                result.gains[k] = std::sqrt(source.depth_c);
                return result;
            }
        }
        fail(ErrorKind::invalid_argument,
             "real-source mode requires the azimuth to coincide with a loudspeaker");
    }

    const PairBase pair = select_pair(ring, source.azimuth_deg);
    const auto raw = solve_gains(pair, source);
    const auto scaled = apply_depth(raw[0], raw[1], source.depth_c);
    result.gains[pair.index_1] = scaled[0];
    result.gains[pair.index_2] = scaled[1];
    return result;
}

} // namespace sabci::vbap
