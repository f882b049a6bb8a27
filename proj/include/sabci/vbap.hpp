#ifndef SABCI_VBAP_HPP
#define SABCI_VBAP_HPP

#include <array>
#include <cstddef>
#include <vector>

namespace sabci::vbap {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Azimuth convention: 0 deg is the frontal direction (+x axis), positive
// angles counterclockwise, all azimuths normalized to (-180, 180].
double normalize_azimuth(double degrees);

// (cos az, sin az); unit within 1e-12
Vec2 direction_vector(double azimuth_deg);

// N loudspeakers on a horizontal ring, azimuths sorted ascending.
struct LoudspeakerRing {
    std::vector<double> azimuths_deg;
    double radius_m = 1.0;

    std::size_t size() const { return azimuths_deg.size(); }
    Vec2 direction(std::size_t i) const { return direction_vector(azimuths_deg[i]); }
};

// Evenly spaced ring that includes the 0 deg frontal loudspeaker.
LoudspeakerRing make_ring(std::size_t n, double radius_m = 1.0);

// Arbitrary ring from user azimuths; normalizes, sorts, rejects duplicates.
LoudspeakerRing ring_from_azimuths(std::vector<double> azimuths_deg, double radius_m = 1.0);

enum class SourceMode {
    virtual_image, // panned between the flanking pair (VBAP)
    real_speaker,  // played from the single coincident loudspeaker
};

struct VirtualSource {
    double azimuth_deg = 0.0;
    double depth_c = 1.0; // total gain power, in [0, 1]; 1 = near, smaller = farther
    SourceMode mode = SourceMode::virtual_image;
};

// Two adjacent loudspeakers forming the active 2x2 vector base.
// l12 rows are the two loudspeaker unit vectors.
struct PairBase {
    std::size_t index_1 = 0;
    std::size_t index_2 = 0;
    Vec2 l1;
    Vec2 l2;

    double det() const { return l1.x * l2.y - l1.y * l2.x; }
};

// A source within this angular distance of a loudspeaker counts as coincident.
inline constexpr double kCoincidentTolDeg = 1e-6;

// Adjacent pair whose arc strictly contains the azimuth. An azimuth that
// coincides with a loudspeaker returns that loudspeaker's two flanking
// neighbors (virtual rendering: a 45 deg source plays from 0 and 90).
PairBase select_pair(const LoudspeakerRing& ring, double azimuth_deg);

// Raw pairwise gains g = p^T L12^-1. Both must come out nonnegative.
std::array<double, 2> solve_gains(const PairBase& pair, const VirtualSource& source);

// Rescale raw gains so the gain power sums to depth_c.
std::array<double, 2> apply_depth(double g1, double g2, double depth_c);

// Length-N gain vector, nonzero only at the active loudspeakers.
struct PanningGains {
    std::vector<double> gains;
    double depth_c = 1.0;

    double power() const;
};

PanningGains ring_gain_vector(const LoudspeakerRing& ring, const VirtualSource& source);

} // namespace sabci::vbap

#endif
