#pragma once

// Event-stream accumulation into binary frames, Boolean pooling and the
// frame-level primitives (centroid, popcount, elementwise logic) used by the
// rest of the pipeline.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitsim/errors.hpp"

namespace gaitsim {

struct Event {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    std::uint64_t t_us = 0;

    friend bool operator==(const Event&, const Event&) = default;
};

// Normalized image coordinates, both axes in [0,1], y pointing down.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Row-major bit grid. `scale` records the pooling factor relative to the raw
// sensor frame (1 for I0, 2 for I2, 10 for I10).
class BinaryFrame {
public:
    BinaryFrame() = default;
    BinaryFrame(std::size_t width, std::size_t height, std::size_t scale = 1, bool value = false);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t scale() const { return scale_; }
    std::size_t size() const { return bits_.size(); }

    bool at(std::size_t x, std::size_t y) const { return bits_[y * width_ + x] != 0; }
    void set(std::size_t x, std::size_t y, bool value = true) { bits_[y * width_ + x] = value ? 1 : 0; }

    // One byte per cell, each 0 or 1.
    std::span<const std::uint8_t> bits() const { return bits_; }
    std::span<std::uint8_t> mutable_bits() { return bits_; }

    bool same_shape(const BinaryFrame& other) const
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const BinaryFrame&, const BinaryFrame&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t scale_ = 1;
    std::vector<std::uint8_t> bits_;
};

// Frame k covers [k * window_ms, (k+1) * window_ms).
struct FrameStream {
    std::vector<BinaryFrame> frames;
    double window_ms = 40.0;
    std::size_t scale = 1;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }
    std::size_t width() const { return frames.empty() ? 0 : frames.front().width(); }
    std::size_t height() const { return frames.empty() ? 0 : frames.front().height(); }

    // Throws DimensionError unless all frames share shape and scale.
    void validate() const;

    friend bool operator==(const FrameStream&, const FrameStream&) = default;
};

FrameStream accumulate_frames(std::span<const Event> events, double window_ms, std::size_t width,
                              std::size_t height);

BinaryFrame andpool(const BinaryFrame& frame, std::size_t k);
BinaryFrame orpool(const BinaryFrame& frame, std::size_t k);

BinaryFrame frame_and(const BinaryFrame& a, const BinaryFrame& b);
BinaryFrame frame_or(const BinaryFrame& a, const BinaryFrame& b);
BinaryFrame frame_not(const BinaryFrame& frame);

std::size_t popcount(const BinaryFrame& frame);

// Mean set-bit position, each axis divided by (dimension - 1). A dimension
// of one maps to 0. Throws EmptyFrameError for an all-zero frame.
Point centroid(const BinaryFrame& frame);

enum class PoolOp { And, Or };

// Pools every frame of a stream. With threads > 1 frames are split across
// worker threads; the result is identical to the sequential path.
FrameStream pool_stream(const FrameStream& stream, PoolOp op, std::size_t k, unsigned threads = 1);

// Sensor cropping ----------------------------------------------------------

struct CropRegion {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t width = 600;
    std::size_t height = 600;
};

CropRegion centered_crop(std::size_t sensor_width, std::size_t sensor_height, std::size_t width,
                         std::size_t height);

// Keeps events inside `crop` and shifts them to crop-local coordinates.
std::vector<Event> crop_events(std::span<const Event> events, const CropRegion& crop);

// Event file: `!sensor WxH` header, optional `!duration_us N`, then one
// `x,y,t_us` per line. `#` starts a comment. Extra columns (polarity) are
// ignored.
struct EventFile {
    std::size_t sensor_width = 0;
    std::size_t sensor_height = 0;
    std::optional<std::uint64_t> duration_us;
    std::vector<Event> events;
};

EventFile parse_event_file(std::istream& in);
EventFile read_event_file(const std::string& path);
void write_event_file(std::ostream& out, const EventFile& file);

// Frame count implied by an event file: covers every event and the declared
// duration, if any.
std::size_t frame_count_for(const EventFile& file, double window_ms);

// Expands frames back into events (one per set bit). Events of frame k are
// spread over the window by row so timestamps stay inside it.
EventFile frames_to_events(const FrameStream& stream, const CropRegion& placement,
                           std::size_t sensor_width, std::size_t sensor_height);

// Loads an event file, crops it and accumulates it into raw frames.
FrameStream load_frames(const std::string& path, double window_ms, std::size_t crop_width,
                        std::size_t crop_height, std::optional<CropRegion> crop = std::nullopt);

// Portable bitmap (P1) text format.
void write_pbm(std::ostream& out, const BinaryFrame& frame);
BinaryFrame read_pbm(std::istream& in);

} // namespace gaitsim
