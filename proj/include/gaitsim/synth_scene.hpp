#pragma once

// Deterministic synthetic footage of a demonstrating hexapod seen from above,
// plus the tools that cut that footage into per-leg segments and splice the
// segments into new gaits.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gaitsim/event_core.hpp"
#include "gaitsim/legs.hpp"

namespace gaitsim {

// Planar top-down hexapod. All lengths are normalized to the frame side.
struct HexapodGeometry {
    Point body_center{0.5, 0.5};
    double body_radius = 0.15;
    std::array<Point, kLegCount> leg_anchors{};  // index 0 is leg 1
    double leg_length = 0.22;
    double sweep_angle = 0.5235987755982988;     // rad, full swing of one oscillation

    // Throws ConfigError if the anchors coincide, crowd each other or the
    // lengths are not positive.
    void validate() const;

    // Direction (rad, image coordinates) from the body center through the
    // leg's anchor; the leg's rest pose points this way.
    double rest_angle(LegLabel leg) const;
};

// Anchors on the body rim at the given rest angles (degrees, image
// coordinates with y pointing down).
HexapodGeometry make_geometry(const std::array<double, kLegCount>& rest_angles_deg, double body_radius = 0.15,
                              double leg_length = 0.22, double sweep_angle = 0.5235987755982988);

// Left legs 1-3 at -130, 180, 130 degrees, right legs 4-6 at -50, 0, 50.
HexapodGeometry default_geometry();

struct ScheduleEntry {
    std::size_t step = 0;
    LegSet legs;

    friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

// Which legs move during which video segment. Step indices are strictly
// increasing; a missing index is an idle segment.
struct GaitSchedule {
    std::vector<ScheduleEntry> entries;

    void validate() const;
    std::size_t step_count() const { return entries.empty() ? 0 : entries.back().step + 1; }

    friend bool operator==(const GaitSchedule&, const GaitSchedule&) = default;
};

// Legs 1..6 one after another.
GaitSchedule sequential_schedule();
// Alternating {1,3,5} and {2,4,6}, `repeats` times each.
GaitSchedule tripod_schedule(std::size_t repeats);

// "1;2;3" or "1,3,5;2,4,6": one step per `;`-separated group.
GaitSchedule parse_schedule_spec(const std::string& spec);

// Schedule file: `step legs` per line, `#` comments, optional
// `!frames_per_cycle N` header.
struct ScheduleFile {
    GaitSchedule schedule;
    std::size_t frames_per_cycle = 0;
};
void write_schedule(std::ostream& out, const GaitSchedule& schedule, std::size_t frames_per_cycle);
ScheduleFile read_schedule(std::istream& in);

struct SceneStyle {
    // Foot footprint in pixels; even sizes keep it aligned to 2x2 blocks.
    // 28x18 always covers exactly two full 10x10 tiles.
    std::size_t foot_width_px = 28;
    std::size_t foot_height_px = 18;
    bool draw_shaft = true;
    // Per-frame probability that a body block flickers while a leg moves.
    // 0 keeps the body silent.
    double body_flicker = 0.1;
    // Spacing between flicker blocks; must be a multiple of 2 and >= 4 so
    // that no 10x10 tile is ever completely covered by the body.
    std::size_t body_block_spacing_px = 4;
};

struct RenderOptions {
    std::size_t frames_per_cycle = 25;
    std::size_t width = 600;
    std::size_t height = 600;
    double noise_density = 0.0;
    std::uint64_t seed = 1;
    double window_ms = 40.0;
    SceneStyle style{};
};

// Renders the expert video: for each schedule step the listed legs complete
// one oscillation over `frames_per_cycle` frames. Leg pixels come in aligned
// 2x2 blocks; salt noise lands only on pixels whose 3x3 neighbourhood is
// otherwise empty.
FrameStream render_expert_sequence(const HexapodGeometry& geom, const GaitSchedule& schedule,
                                   const RenderOptions& options);

// Leg deflection (rad) from its rest angle at `frame` of an oscillation.
double leg_deflection(const HexapodGeometry& geom, std::size_t frame, std::size_t frames_per_cycle);

// Frame offset within a cycle where the deflection peaks.
std::size_t peak_offset(std::size_t frames_per_cycle);

struct PixelBox {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t x1 = 0;  // exclusive
    std::size_t y1 = 0;  // exclusive

    bool contains(std::size_t x, std::size_t y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

// Bounding box (pixels) of everything a leg can draw over its sweep.
PixelBox leg_sweep_box(const HexapodGeometry& geom, LegLabel leg, const RenderOptions& options);

// Bounding box of the flickering body disc.
PixelBox body_box(const HexapodGeometry& geom, const RenderOptions& options);

// Half-open frame range [begin, end).
struct SegmentRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
};

using LegSegments = std::array<SegmentRange, kLegCount>;

// Segment of each leg in a video rendered from a schedule in which every leg
// moves alone exactly once.
LegSegments segments_from_schedule(const GaitSchedule& schedule, std::size_t frames_per_cycle);

// Rebuilds a video from per-leg segments: steps play in order, legs sharing a
// step are OR-ed frame by frame, shorter segments are padded with empty
// frames. Idle steps (gaps in the step index) are empty for the longest
// segment length.
FrameStream splice_segments(const FrameStream& stream, const LegSegments& boundaries,
                            const GaitSchedule& new_schedule);

// Reference raster: one spike per moving leg per step, at the step's peak
// deflection frame.
SpikeRaster ground_truth_raster(const GaitSchedule& schedule, std::size_t frames_per_cycle, double dt = 0.04);

} // namespace gaitsim
