#include "gaitsim/synth_scene.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace gaitsim {

namespace {

// Counter-based uniform in [0,1): every (seed, frame, index, stream) tuple
// maps to its own value, so frames can be rendered in any order.
double counter_uniform(std::uint64_t seed, std::uint64_t frame, std::uint64_t index, std::uint64_t stream)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(seed);
    h = mix(h ^ frame);
    h = mix(h ^ index);
    h = mix(h ^ stream);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kBodyStream = 2;

struct PixelMapper {
    double sx;
    double sy;
    double px(double nx) const { return nx * sx; }
    double py(double ny) const { return ny * sy; }
};

PixelMapper mapper_for(const RenderOptions& o)
{
    return {static_cast<double>(o.width - 1), static_cast<double>(o.height - 1)};
}

void set_block(BinaryFrame& f, long cx, long cy)
{
    // (cx, cy) index 2x2 blocks.
    if (cx < 0 || cy < 0) {
        return;
    }
    const auto x = static_cast<std::size_t>(cx) * 2;
    const auto y = static_cast<std::size_t>(cy) * 2;
    if (x + 1 >= f.width() || y + 1 >= f.height()) {
        return;
    }
    f.set(x, y);
    f.set(x + 1, y);
    f.set(x, y + 1);
    f.set(x + 1, y + 1);
}

Point foot_position(const HexapodGeometry& g, LegLabel leg, double deflection)
{
    const Point a = g.leg_anchors[leg.index()];
    const double angle = g.rest_angle(leg) + deflection;
    return {a.x + g.leg_length * std::cos(angle), a.y + g.leg_length * std::sin(angle)};
}

// Foot rectangle in pixels, snapped to even coordinates.
PixelBox foot_box(Point foot, const RenderOptions& o)
{
    const PixelMapper m = mapper_for(o);
    const auto fw = static_cast<long>(o.style.foot_width_px);
    const auto fh = static_cast<long>(o.style.foot_height_px);
    long x0 = std::lround(m.px(foot.x) - static_cast<double>(fw) / 2.0);
    long y0 = std::lround(m.py(foot.y) - static_cast<double>(fh) / 2.0);
    x0 -= x0 & 1;
    y0 -= y0 & 1;
    auto clamp = [](long v, std::size_t hi) {
        return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(hi)));
    };
    return {clamp(x0, o.width), clamp(y0, o.height), clamp(x0 + fw, o.width), clamp(y0 + fh, o.height)};
}

void draw_leg(BinaryFrame& f, const HexapodGeometry& g, LegLabel leg, double deflection, const RenderOptions& o)
{
    const PixelMapper m = mapper_for(o);
    const Point a = g.leg_anchors[leg.index()];
    const Point foot = foot_position(g, leg, deflection);

    if (o.style.draw_shaft) {
        const double ax = m.px(a.x);
        const double ay = m.py(a.y);
        const double bx = m.px(foot.x);
        const double by = m.py(foot.y);
        const double len = std::hypot(bx - ax, by - ay);
        const auto samples = static_cast<std::size_t>(std::ceil(len)) + 1;
        for (std::size_t i = 0; i <= samples; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(samples);
            set_block(f, static_cast<long>(std::floor((ax + t * (bx - ax)) / 2.0)),
                      static_cast<long>(std::floor((ay + t * (by - ay)) / 2.0)));
        }
    }

    const PixelBox box = foot_box(foot, o);
    for (std::size_t y = box.y0; y < box.y1; ++y) {
        for (std::size_t x = box.x0; x < box.x1; ++x) {
            f.set(x, y);
        }
    }
}

void draw_body_flicker(BinaryFrame& f, const HexapodGeometry& g, const RenderOptions& o, std::size_t frame_index)
{
    if (o.style.body_flicker <= 0.0) {
        return;
    }
    const PixelBox box = body_box(g, o);
    const std::size_t step = o.style.body_block_spacing_px;
    const PixelMapper m = mapper_for(o);
    const double cx = m.px(g.body_center.x);
    const double cy = m.py(g.body_center.y);
    const double rx = m.px(g.body_radius);
    const double ry = m.py(g.body_radius);
    for (std::size_t y = (box.y0 + step - 1) / step * step; y + 1 < box.y1; y += step) {
        for (std::size_t x = (box.x0 + step - 1) / step * step; x + 1 < box.x1; x += step) {
            const double dx = (static_cast<double>(x) + 1.0 - cx) / rx;
            const double dy = (static_cast<double>(y) + 1.0 - cy) / ry;
            if (dx * dx + dy * dy > 1.0) {
                continue;
            }
            if (counter_uniform(o.seed, frame_index, y * o.width + x, kBodyStream) < o.style.body_flicker) {
                set_block(f, static_cast<long>(x / 2), static_cast<long>(y / 2));
            }
        }
    }
}

bool neighbourhood_empty(const BinaryFrame& f, std::size_t x, std::size_t y)
{
    const std::size_t x0 = x == 0 ? 0 : x - 1;
    const std::size_t y0 = y == 0 ? 0 : y - 1;
    const std::size_t x1 = std::min(f.width() - 1, x + 1);
    const std::size_t y1 = std::min(f.height() - 1, y + 1);
    for (std::size_t yy = y0; yy <= y1; ++yy) {
        for (std::size_t xx = x0; xx <= x1; ++xx) {
            if (f.at(xx, yy)) {
                return false;
            }
        }
    }
    return true;
}

void add_salt_noise(BinaryFrame& f, const RenderOptions& o, std::size_t frame_index)
{
    if (o.noise_density <= 0.0) {
        return;
    }
    for (std::size_t y = 0; y < f.height(); ++y) {
        for (std::size_t x = 0; x < f.width(); ++x) {
            if (counter_uniform(o.seed, frame_index, y * f.width() + x, kNoiseStream) < o.noise_density &&
                neighbourhood_empty(f, x, y)) {
                f.set(x, y);
            }
        }
    }
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

} // namespace

void HexapodGeometry::validate() const
{
    if (!(body_radius > 0.0) || !(leg_length > 0.0)) {
        throw ConfigError("body radius and leg length must be positive");
    }
    if (!(sweep_angle >= 0.0) || sweep_angle >= std::numbers::pi) {
        throw ConfigError("sweep angle must lie in [0, pi)");
    }
    for (std::size_t i = 0; i < leg_anchors.size(); ++i) {
        const Point& a = leg_anchors[i];
        if (std::hypot(a.x - body_center.x, a.y - body_center.y) <= 1e-9) {
            throw ConfigError("leg " + std::to_string(i + 1) + " anchor coincides with the body center");
        }
        for (std::size_t j = i + 1; j < leg_anchors.size(); ++j) {
            const Point& b = leg_anchors[j];
            if (std::hypot(a.x - b.x, a.y - b.y) < body_radius / 2.0) {
                throw ConfigError("anchors of legs " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                  " are closer than half the body radius");
            }
        }
    }
}

double HexapodGeometry::rest_angle(LegLabel leg) const
{
    const Point& a = leg_anchors[leg.index()];
    return std::atan2(a.y - body_center.y, a.x - body_center.x);
}

HexapodGeometry make_geometry(const std::array<double, kLegCount>& rest_angles_deg, double body_radius,
                              double leg_length, double sweep_angle)
{
    HexapodGeometry g;
    g.body_radius = body_radius;
    g.leg_length = leg_length;
    g.sweep_angle = sweep_angle;
    for (std::size_t i = 0; i < kLegCount; ++i) {
        const double a = rest_angles_deg[i] * std::numbers::pi / 180.0;
        g.leg_anchors[i] = {g.body_center.x + body_radius * std::cos(a), g.body_center.y + body_radius * std::sin(a)};
    }
    return g;
}

HexapodGeometry default_geometry() { return make_geometry({-130.0, 180.0, 130.0, -50.0, 0.0, 50.0}); }

void GaitSchedule::validate() const
{
    if (entries.empty()) {
        throw ConfigError("gait schedule references no legs");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].legs.empty()) {
            throw ConfigError("gait schedule step " + std::to_string(entries[i].step) + " moves no legs");
        }
        if (i > 0 && entries[i].step <= entries[i - 1].step) {
            throw ConfigError("gait schedule steps must be strictly increasing");
        }
    }
}

GaitSchedule sequential_schedule()
{
    GaitSchedule s;
    for (int l = 1; l <= kLegCount; ++l) {
        s.entries.push_back({static_cast<std::size_t>(l - 1), LegSet{l}});
    }
    return s;
}

GaitSchedule tripod_schedule(std::size_t repeats)
{
    GaitSchedule s;
    for (std::size_t r = 0; r < repeats; ++r) {
        s.entries.push_back({2 * r, LegSet{1, 3, 5}});
        s.entries.push_back({2 * r + 1, LegSet{2, 4, 6}});
    }
    return s;
}

GaitSchedule parse_schedule_spec(const std::string& spec)
{
    GaitSchedule s;
    std::size_t pos = 0;
    std::size_t step = 0;
    const std::string text = trim(spec);
    if (text.empty()) {
        return s;
    }
    while (pos <= text.size()) {
        std::size_t semi = text.find(';', pos);
        if (semi == std::string::npos) {
            semi = text.size();
        }
        const std::string group = trim(text.substr(pos, semi - pos));
        if (group.empty()) {
            throw ConfigError("empty step in schedule '" + spec + "'");
        }
        try {
            s.entries.push_back({step++, LegSet::parse(group)});
        } catch (const DataError& e) {
            throw ConfigError(std::string("schedule '") + spec + "': " + e.what());
        }
        pos = semi + 1;
    }
    return s;
}

void write_schedule(std::ostream& out, const GaitSchedule& schedule, std::size_t frames_per_cycle)
{
    out << "!frames_per_cycle " << frames_per_cycle << '\n';
    out << "# step legs\n";
    for (const auto& e : schedule.entries) {
        out << e.step << ' ' << e.legs.to_string() << '\n';
    }
}

ScheduleFile read_schedule(std::istream& in)
{
    ScheduleFile file;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        if (line.front() == '!') {
            std::string key;
            ls >> key;
            if (key != "!frames_per_cycle" || !(ls >> file.frames_per_cycle)) {
                throw DataError("schedule line " + std::to_string(line_no) + ": bad header");
            }
            continue;
        }
        std::size_t step = 0;
        std::string legs;
        if (!(ls >> step >> legs)) {
            throw DataError("schedule line " + std::to_string(line_no) + ": expected 'step legs'");
        }
        try {
            const LegSet set = LegSet::parse(legs);
            if (!file.schedule.entries.empty() && step <= file.schedule.entries.back().step) {
                throw DataError("steps must be strictly increasing");
            }
            file.schedule.entries.push_back({step, set});
        } catch (const DataError& e) {
            throw DataError("schedule line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return file;
}

double leg_deflection(const HexapodGeometry& geom, std::size_t frame, std::size_t frames_per_cycle)
{
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(frame) / static_cast<double>(frames_per_cycle);
    return 0.5 * geom.sweep_angle * std::sin(phase);
}

std::size_t peak_offset(std::size_t frames_per_cycle)
{
    std::size_t best = 0;
    double best_v = -2.0;
    for (std::size_t f = 0; f < frames_per_cycle; ++f) {
        const double v = std::sin(2.0 * std::numbers::pi * static_cast<double>(f) / static_cast<double>(frames_per_cycle));
        if (v > best_v) {
            best_v = v;
            best = f;
        }
    }
    return best;
}

FrameStream render_expert_sequence(const HexapodGeometry& geom, const GaitSchedule& schedule,
                                   const RenderOptions& o)
{
    geom.validate();
    schedule.validate();
    if (o.frames_per_cycle < 2) {
        throw ConfigError("frames_per_cycle must be at least 2");
    }
    if (!(o.noise_density >= 0.0 && o.noise_density < 1.0)) {
        throw ConfigError("noise density must lie in [0, 1)");
    }
    if (o.width < 2 || o.height < 2 || o.width % 2 || o.height % 2) {
        throw ConfigError("scene dimensions must be even and at least 2");
    }
    if (o.style.foot_width_px % 2 || o.style.foot_height_px % 2 || o.style.foot_width_px == 0 ||
        o.style.foot_height_px == 0) {
        throw ConfigError("foot size must be positive and even");
    }
    if (o.style.body_block_spacing_px < 4 || o.style.body_block_spacing_px % 2) {
        throw ConfigError("body block spacing must be even and at least 4");
    }

    FrameStream stream;
    stream.window_ms = o.window_ms;
    stream.scale = 1;
    const std::size_t total = schedule.step_count() * o.frames_per_cycle;
    stream.frames.assign(total, BinaryFrame(o.width, o.height));

    std::vector<LegSet> moving(schedule.step_count());
    for (const auto& e : schedule.entries) {
        moving[e.step] = e.legs;
    }

    for (std::size_t k = 0; k < total; ++k) {
        const LegSet legs = moving[k / o.frames_per_cycle];
        BinaryFrame& f = stream.frames[k];
        if (!legs.empty()) {
            const double deflection = leg_deflection(geom, k % o.frames_per_cycle, o.frames_per_cycle);
            for (LegLabel leg : legs.labels()) {
                draw_leg(f, geom, leg, deflection, o);
            }
            draw_body_flicker(f, geom, o, k);
        }
        add_salt_noise(f, o, k);
    }
    return stream;
}

PixelBox leg_sweep_box(const HexapodGeometry& geom, LegLabel leg, const RenderOptions& o)
{
    // Envelope of anchor, shaft and foot rectangle over a dense angle sweep.
    const PixelMapper m = mapper_for(o);
    const Point a = geom.leg_anchors[leg.index()];
    double x0 = m.px(a.x);
    double x1 = x0;
    double y0 = m.py(a.y);
    double y1 = y0;
    constexpr int kSamples = 720;
    PixelBox box{o.width, o.height, 0, 0};
    for (int i = 0; i <= kSamples; ++i) {
        const double d = geom.sweep_angle * (static_cast<double>(i) / kSamples - 0.5);
        const Point foot = foot_position(geom, leg, d);
        const PixelBox fb = foot_box(foot, o);
        box.x0 = std::min(box.x0, fb.x0);
        box.y0 = std::min(box.y0, fb.y0);
        box.x1 = std::max(box.x1, fb.x1);
        box.y1 = std::max(box.y1, fb.y1);
        x0 = std::min(x0, m.px(foot.x));
        x1 = std::max(x1, m.px(foot.x));
        y0 = std::min(y0, m.py(foot.y));
        y1 = std::max(y1, m.py(foot.y));
    }
    // Shaft blocks can reach one block beyond the sampled line.
    auto lo = [](double v) { return static_cast<std::size_t>(std::max(0.0, std::floor(v / 2.0) * 2.0 - 2.0)); };
    auto hi = [](double v, std::size_t cap) {
        return std::min(cap, static_cast<std::size_t>(std::floor(v / 2.0) * 2.0 + 4.0));
    };
    box.x0 = std::min(box.x0, lo(x0));
    box.y0 = std::min(box.y0, lo(y0));
    box.x1 = std::max(box.x1, hi(x1, o.width));
    box.y1 = std::max(box.y1, hi(y1, o.height));
    return box;
}

PixelBox body_box(const HexapodGeometry& geom, const RenderOptions& o)
{
    const PixelMapper m = mapper_for(o);
    auto clamp = [](double v, std::size_t hi) {
        return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(hi)));
    };
    const double cx = m.px(geom.body_center.x);
    const double cy = m.py(geom.body_center.y);
    const double rx = m.px(geom.body_radius);
    const double ry = m.py(geom.body_radius);
    return {clamp(std::floor(cx - rx) - 2.0, o.width), clamp(std::floor(cy - ry) - 2.0, o.height),
            clamp(std::ceil(cx + rx) + 3.0, o.width), clamp(std::ceil(cy + ry) + 3.0, o.height)};
}

LegSegments segments_from_schedule(const GaitSchedule& schedule, std::size_t frames_per_cycle)
{
    schedule.validate();
    LegSegments seg{};
    std::array<bool, kLegCount> seen{};
    for (const auto& e : schedule.entries) {
        if (e.legs.size() != 1) {
            throw DataError("segment extraction needs a schedule moving one leg per step");
        }
        const LegLabel leg = e.legs.labels().front();
        if (seen[leg.index()]) {
            throw DataError("leg " + std::to_string(leg.value()) + " moves more than once");
        }
        seen[leg.index()] = true;
        seg[leg.index()] = {e.step * frames_per_cycle, (e.step + 1) * frames_per_cycle};
    }
    for (std::size_t i = 0; i < kLegCount; ++i) {
        if (!seen[i]) {
            throw DataError("leg " + std::to_string(i + 1) + " never moves in the schedule");
        }
    }
    return seg;
}

FrameStream splice_segments(const FrameStream& stream, const LegSegments& boundaries,
                            const GaitSchedule& new_schedule)
{
    new_schedule.validate();
    stream.validate();

    // Boundaries must tile [0, stream.size()) exactly.
    std::array<std::size_t, kLegCount> order{};
    for (std::size_t i = 0; i < kLegCount; ++i) {
        order[i] = i;
        if (boundaries[i].end <= boundaries[i].begin) {
            throw DataError("segment of leg " + std::to_string(i + 1) + " is empty");
        }
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return boundaries[a].begin < boundaries[b].begin; });
    std::size_t cursor = 0;
    for (std::size_t i : order) {
        if (boundaries[i].begin < cursor) {
            throw DataError("segment of leg " + std::to_string(i + 1) + " overlaps another segment");
        }
        if (boundaries[i].begin > cursor) {
            throw DataError("frames " + std::to_string(cursor) + ".." + std::to_string(boundaries[i].begin) +
                            " belong to no leg segment");
        }
        cursor = boundaries[i].end;
    }
    if (cursor != stream.size()) {
        throw DataError("segments cover " + std::to_string(cursor) + " frames but the stream has " +
                        std::to_string(stream.size()));
    }

    std::size_t longest = 0;
    for (const auto& b : boundaries) {
        longest = std::max(longest, b.length());
    }

    FrameStream out;
    out.window_ms = stream.window_ms;
    out.scale = stream.scale;
    const BinaryFrame blank(stream.width(), stream.height(), stream.scale);

    std::size_t next_step = 0;
    for (const auto& entry : new_schedule.entries) {
        for (; next_step < entry.step; ++next_step) {
            out.frames.insert(out.frames.end(), longest, blank);
        }
        std::size_t len = 0;
        for (LegLabel leg : entry.legs.labels()) {
            len = std::max(len, boundaries[leg.index()].length());
        }
        const std::size_t base = out.frames.size();
        out.frames.insert(out.frames.end(), len, blank);
        for (LegLabel leg : entry.legs.labels()) {
            const SegmentRange& r = boundaries[leg.index()];
            for (std::size_t i = 0; i < r.length(); ++i) {
                out.frames[base + i] = frame_or(out.frames[base + i], stream.frames[r.begin + i]);
            }
        }
        next_step = entry.step + 1;
    }
    return out;
}

SpikeRaster ground_truth_raster(const GaitSchedule& schedule, std::size_t frames_per_cycle, double dt)
{
    SpikeRaster raster;
    raster.dt = dt;
    const std::size_t offset = peak_offset(frames_per_cycle);
    for (const auto& e : schedule.entries) {
        if (!e.legs.empty()) {
            raster.push(e.step * frames_per_cycle + offset, e.legs);
        }
    }
    return raster;
}

} // namespace gaitsim
