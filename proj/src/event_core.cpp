#include "gaitsim/event_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace gaitsim {

namespace {

std::string dims(const BinaryFrame& f)
{
    return std::to_string(f.width()) + "x" + std::to_string(f.height());
}

void require_same_shape(const BinaryFrame& a, const BinaryFrame& b, const char* op)
{
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": frame shapes differ (" + dims(a) + " vs " + dims(b) + ")");
    }
}

void require_divisible(const BinaryFrame& frame, std::size_t k)
{
    if (k == 0) {
        throw DimensionError("pooling kernel must be >= 1");
    }
    if (frame.width() % k != 0) {
        throw DimensionError("frame width " + std::to_string(frame.width()) +
                             " is not divisible by kernel " + std::to_string(k));
    }
    if (frame.height() % k != 0) {
        throw DimensionError("frame height " + std::to_string(frame.height()) +
                             " is not divisible by kernel " + std::to_string(k));
    }
}

template <bool IsAnd>
BinaryFrame pool(const BinaryFrame& frame, std::size_t k)
{
    require_divisible(frame, k);
    const std::size_t ow = frame.width() / k;
    const std::size_t oh = frame.height() / k;
    BinaryFrame out(ow, oh, frame.scale() * k);
    const auto in = frame.bits();
    auto dst = out.mutable_bits();
    const std::size_t w = frame.width();

    // Row-wise reduction: fold each input row into a per-tile accumulator,
    // then write the tile row once all k input rows are seen.
    std::vector<std::uint8_t> acc(ow);
    for (std::size_t ty = 0; ty < oh; ++ty) {
        std::fill(acc.begin(), acc.end(), IsAnd ? 1 : 0);
        for (std::size_t dy = 0; dy < k; ++dy) {
            const std::uint8_t* row = in.data() + (ty * k + dy) * w;
            for (std::size_t tx = 0; tx < ow; ++tx) {
                const std::uint8_t* cell = row + tx * k;
                std::uint8_t v = acc[tx];
                for (std::size_t dx = 0; dx < k; ++dx) {
                    if constexpr (IsAnd) {
                        v &= cell[dx];
                    } else {
                        v |= cell[dx];
                    }
                }
                acc[tx] = v;
            }
        }
        std::copy(acc.begin(), acc.end(), dst.begin() + static_cast<std::ptrdiff_t>(ty * ow));
    }
    return out;
}

template <typename Op>
BinaryFrame elementwise(const BinaryFrame& a, const BinaryFrame& b, const char* name, Op op)
{
    require_same_shape(a, b, name);
    BinaryFrame out(a.width(), a.height(), a.scale());
    auto dst = out.mutable_bits();
    const auto x = a.bits();
    const auto y = b.bits();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = op(x[i], y[i]);
    }
    return out;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
bool parse_uint(std::string_view text, T& out)
{
    const auto t = trim(text);
    if (t.empty()) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size();
}

} // namespace

BinaryFrame::BinaryFrame(std::size_t width, std::size_t height, std::size_t scale, bool value)
    : width_(width), height_(height), scale_(scale), bits_(width * height, value ? 1 : 0)
{
    if (scale == 0) {
        throw DimensionError("frame scale must be >= 1");
    }
}

void FrameStream::validate() const
{
    if (frames.empty()) {
        return;
    }
    const auto& first = frames.front();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        if (!f.same_shape(first) || f.scale() != scale) {
            throw DimensionError("frame " + std::to_string(i) + " (" + dims(f) + ", scale " +
                                 std::to_string(f.scale()) + ") does not match stream (" + dims(first) +
                                 ", scale " + std::to_string(scale) + ")");
        }
    }
}

FrameStream accumulate_frames(std::span<const Event> events, double window_ms, std::size_t width,
                              std::size_t height)
{
    if (!(window_ms > 0.0)) {
        throw DataError("accumulation window must be positive");
    }
    const auto window_us = static_cast<std::uint64_t>(std::llround(window_ms * 1000.0));
    if (window_us == 0) {
        throw DataError("accumulation window shorter than one microsecond");
    }

    FrameStream stream;
    stream.window_ms = window_ms;
    stream.scale = 1;
    if (events.empty()) {
        return stream;
    }

    std::uint64_t t_max = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (e.x >= width || e.y >= height) {
            throw DataError("event " + std::to_string(i) + " at (" + std::to_string(e.x) + "," +
                            std::to_string(e.y) + ") lies outside the " + std::to_string(width) + "x" +
                            std::to_string(height) + " sensor");
        }
        t_max = std::max(t_max, e.t_us);
    }

    const std::size_t n_frames = static_cast<std::size_t>((t_max + 1 + window_us - 1) / window_us);
    stream.frames.assign(n_frames, BinaryFrame(width, height));
    for (const Event& e : events) {
        stream.frames[static_cast<std::size_t>(e.t_us / window_us)].set(e.x, e.y);
    }
    return stream;
}

BinaryFrame andpool(const BinaryFrame& frame, std::size_t k) { return pool<true>(frame, k); }

BinaryFrame orpool(const BinaryFrame& frame, std::size_t k) { return pool<false>(frame, k); }

BinaryFrame frame_and(const BinaryFrame& a, const BinaryFrame& b)
{
    return elementwise(a, b, "frame_and", [](std::uint8_t x, std::uint8_t y) -> std::uint8_t { return x & y; });
}

BinaryFrame frame_or(const BinaryFrame& a, const BinaryFrame& b)
{
    return elementwise(a, b, "frame_or", [](std::uint8_t x, std::uint8_t y) -> std::uint8_t { return x | y; });
}

BinaryFrame frame_not(const BinaryFrame& frame)
{
    BinaryFrame out(frame.width(), frame.height(), frame.scale());
    auto dst = out.mutable_bits();
    const auto src = frame.bits();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = src[i] ^ 1u;
    }
    return out;
}

std::size_t popcount(const BinaryFrame& frame)
{
    const auto b = frame.bits();
    return static_cast<std::size_t>(std::count(b.begin(), b.end(), std::uint8_t{1}));
}

Point centroid(const BinaryFrame& frame)
{
    double sx = 0.0;
    double sy = 0.0;
    std::size_t n = 0;
    for (std::size_t y = 0; y < frame.height(); ++y) {
        for (std::size_t x = 0; x < frame.width(); ++x) {
            if (frame.at(x, y)) {
                sx += static_cast<double>(x);
                sy += static_cast<double>(y);
                ++n;
            }
        }
    }
    if (n == 0) {
        throw EmptyFrameError("centroid of an empty frame");
    }
    const double nx = frame.width() > 1 ? static_cast<double>(frame.width() - 1) : 1.0;
    const double ny = frame.height() > 1 ? static_cast<double>(frame.height() - 1) : 1.0;
    const double count = static_cast<double>(n);
    return {sx / count / nx, sy / count / ny};
}

FrameStream pool_stream(const FrameStream& stream, PoolOp op, std::size_t k, unsigned threads)
{
    FrameStream out;
    out.window_ms = stream.window_ms;
    out.scale = stream.scale * k;
    out.frames.resize(stream.frames.size());

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            out.frames[i] = op == PoolOp::And ? andpool(stream.frames[i], k) : orpool(stream.frames[i], k);
        }
    };

    const std::size_t n = stream.frames.size();
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2) {
        work(0, n);
        return out;
    }
    // Each worker owns a contiguous slice of output slots; frame order is
    // preserved by construction.
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        pool.emplace_back(work, begin, std::min(n, begin + chunk));
    }
    return out;
}

CropRegion centered_crop(std::size_t sensor_width, std::size_t sensor_height, std::size_t width,
                         std::size_t height)
{
    if (width > sensor_width || height > sensor_height) {
        throw ConfigError("crop " + std::to_string(width) + "x" + std::to_string(height) +
                          " exceeds sensor " + std::to_string(sensor_width) + "x" +
                          std::to_string(sensor_height));
    }
    return {(sensor_width - width) / 2, (sensor_height - height) / 2, width, height};
}

std::vector<Event> crop_events(std::span<const Event> events, const CropRegion& crop)
{
    std::vector<Event> out;
    out.reserve(events.size());
    for (const Event& e : events) {
        if (e.x >= crop.x0 && e.y >= crop.y0 && e.x < crop.x0 + crop.width && e.y < crop.y0 + crop.height) {
            out.push_back({static_cast<std::uint32_t>(e.x - crop.x0), static_cast<std::uint32_t>(e.y - crop.y0),
                           e.t_us});
        }
    }
    return out;
}

EventFile parse_event_file(std::istream& in)
{
    EventFile file;
    bool have_sensor = false;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw DataError("line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        if (body.front() == '!') {
            std::istringstream hs(body.substr(1));
            std::string key;
            std::string value;
            hs >> key >> value;
            if (key == "sensor") {
                const auto xpos = value.find('x');
                if (xpos == std::string::npos || !parse_uint(std::string_view(value).substr(0, xpos), file.sensor_width) ||
                    !parse_uint(std::string_view(value).substr(xpos + 1), file.sensor_height) ||
                    file.sensor_width == 0 || file.sensor_height == 0) {
                    fail("malformed sensor header '" + body + "'");
                }
                have_sensor = true;
            } else if (key == "duration_us") {
                std::uint64_t d = 0;
                if (!parse_uint(value, d)) {
                    fail("malformed duration header '" + body + "'");
                }
                file.duration_us = d;
            } else {
                fail("unknown header '" + key + "'");
            }
            continue;
        }
        if (!have_sensor) {
            fail("event before '!sensor WxH' header");
        }
        const std::string_view sv(body);
        const auto c1 = sv.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
        if (c2 == std::string_view::npos) {
            fail("expected x,y,t_us");
        }
        auto c3 = sv.find(',', c2 + 1);  // optional polarity column, ignored
        if (c3 == std::string_view::npos) {
            c3 = sv.size();
        }
        Event e;
        if (!parse_uint(sv.substr(0, c1), e.x) || !parse_uint(sv.substr(c1 + 1, c2 - c1 - 1), e.y) ||
            !parse_uint(sv.substr(c2 + 1, c3 - c2 - 1), e.t_us)) {
            fail("expected non-negative integers x,y,t_us");
        }
        if (e.x >= file.sensor_width || e.y >= file.sensor_height) {
            fail("event (" + std::to_string(e.x) + "," + std::to_string(e.y) + ") outside sensor");
        }
        file.events.push_back(e);
    }
    if (!have_sensor) {
        throw DataError("missing '!sensor WxH' header");
    }
    std::stable_sort(file.events.begin(), file.events.end(),
                     [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
    return file;
}

EventFile read_event_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open event file '" + path + "'");
    }
    try {
        return parse_event_file(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_event_file(std::ostream& out, const EventFile& file)
{
    out << "!sensor " << file.sensor_width << 'x' << file.sensor_height << '\n';
    if (file.duration_us) {
        out << "!duration_us " << *file.duration_us << '\n';
    }
    out << "# x,y,t_us\n";
    for (const Event& e : file.events) {
        out << e.x << ',' << e.y << ',' << e.t_us << '\n';
    }
}

std::size_t frame_count_for(const EventFile& file, double window_ms)
{
    const auto window_us = static_cast<std::uint64_t>(std::llround(window_ms * 1000.0));
    std::uint64_t span_us = file.duration_us.value_or(0);
    for (const Event& e : file.events) {
        span_us = std::max(span_us, e.t_us + 1);
    }
    return static_cast<std::size_t>((span_us + window_us - 1) / window_us);
}

EventFile frames_to_events(const FrameStream& stream, const CropRegion& placement, std::size_t sensor_width,
                           std::size_t sensor_height)
{
    if (placement.x0 + stream.width() > sensor_width || placement.y0 + stream.height() > sensor_height) {
        throw DimensionError("frames do not fit the sensor at the requested placement");
    }
    const auto window_us = static_cast<std::uint64_t>(std::llround(stream.window_ms * 1000.0));
    EventFile file;
    file.sensor_width = sensor_width;
    file.sensor_height = sensor_height;
    file.duration_us = window_us * stream.size();
    const std::size_t h = std::max<std::size_t>(1, stream.height());
    for (std::size_t k = 0; k < stream.size(); ++k) {
        const BinaryFrame& f = stream.frames[k];
        for (std::size_t y = 0; y < f.height(); ++y) {
            const std::uint64_t t = k * window_us + (y * window_us) / h;
            for (std::size_t x = 0; x < f.width(); ++x) {
                if (f.at(x, y)) {
                    file.events.push_back({static_cast<std::uint32_t>(x + placement.x0),
                                           static_cast<std::uint32_t>(y + placement.y0), t});
                }
            }
        }
    }
    return file;
}

FrameStream load_frames(const std::string& path, double window_ms, std::size_t crop_width, std::size_t crop_height,
                        std::optional<CropRegion> crop)
{
    const EventFile file = read_event_file(path);
    const CropRegion region = crop.value_or(centered_crop(file.sensor_width, file.sensor_height, crop_width, crop_height));
    if (region.x0 + region.width > file.sensor_width || region.y0 + region.height > file.sensor_height) {
        throw ConfigError("crop region exceeds the sensor of '" + path + "'");
    }
    const auto local = crop_events(file.events, region);
    FrameStream stream = accumulate_frames(local, window_ms, region.width, region.height);
    const std::size_t wanted = frame_count_for(file, window_ms);
    if (stream.frames.size() < wanted) {
        stream.frames.resize(wanted, BinaryFrame(region.width, region.height));
    }
    return stream;
}

void write_pbm(std::ostream& out, const BinaryFrame& frame)
{
    out << "P1\n" << frame.width() << ' ' << frame.height() << '\n';
    for (std::size_t y = 0; y < frame.height(); ++y) {
        for (std::size_t x = 0; x < frame.width(); ++x) {
            if (x) {
                out << ' ';
            }
            out << (frame.at(x, y) ? '1' : '0');
        }
        out << '\n';
    }
}

BinaryFrame read_pbm(std::istream& in)
{
    // P1 allows comments and arbitrary whitespace between tokens.
    auto next_token = [&in]() {
        std::string tok;
        char c = 0;
        while (in.get(c)) {
            if (c == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!tok.empty()) {
                    break;
                }
                continue;
            }
            tok.push_back(c);
        }
        return tok;
    };
    if (next_token() != "P1") {
        throw DataError("not a P1 bitmap");
    }
    std::size_t w = 0;
    std::size_t h = 0;
    if (!parse_uint(next_token(), w) || !parse_uint(next_token(), h)) {
        throw DataError("malformed bitmap dimensions");
    }
    BinaryFrame frame(w, h);
    std::size_t i = 0;
    auto bits = frame.mutable_bits();
    while (i < bits.size()) {
        const std::string tok = next_token();
        if (tok.empty()) {
            throw DataError("bitmap truncated");
        }
        for (char c : tok) {  // P1 permits packed digits without separators
            if (c != '0' && c != '1') {
                throw DataError("bitmap cell is not 0 or 1");
            }
            if (i >= bits.size()) {
                throw DataError("bitmap has extra cells");
            }
            bits[i++] = c == '1' ? 1 : 0;
        }
    }
    return frame;
}

} // namespace gaitsim
