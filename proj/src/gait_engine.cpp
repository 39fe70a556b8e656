#include "gaitsim/gait_engine.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace gaitsim {

std::size_t GaitTrace::cycle_count() const
{
    std::size_t n = 0;
    for (const auto& l : legs) {
        n += l.size();
    }
    return n;
}

GaitTrace spikes_to_gait(const SpikeRaster& raster, double period)
{
    if (!(period > 0.0)) {
        throw ConfigError("oscillation period must be positive");
    }
    GaitTrace trace;
    for (const RasterStep& s : raster.steps) {
        const double t = raster.time_of(s);
        for (LegLabel leg : s.spikes.labels()) {
            auto& cycles = trace.legs[leg.index()];
            if (!cycles.empty() && t < cycles.back().end) {
                continue;  // mid-cycle: absorbed
            }
            cycles.push_back({t, t + period});
        }
    }
    return trace;
}

LabelSequence label_sequence(const SpikeRaster& raster, const LabelingOptions& options)
{
    LabelSequence out;
    std::array<double, kLegCount> last_counted{};
    std::array<bool, kLegCount> counted{};
    double event_start = 0.0;
    bool open = false;
    // Spike times are multiples of dt; half a step absorbs rounding so a
    // re-fire exactly one window later starts a new event.
    const double slack = 0.5 * raster.dt;

    for (const RasterStep& s : raster.steps) {
        const double t = raster.time_of(s);
        LegSet fresh;
        for (LegLabel leg : s.spikes.labels()) {
            const std::size_t i = leg.index();
            if (counted[i] && t - last_counted[i] < options.refractory - slack) {
                continue;
            }
            counted[i] = true;
            last_counted[i] = t;
            fresh.insert(leg);
        }
        if (fresh.empty()) {
            continue;
        }
        if (open && t - event_start < options.coincidence_window - slack) {
            out.back() |= fresh;
        } else {
            out.push_back(fresh);
            event_start = t;
            open = true;
        }
    }
    return out;
}

double sequence_accuracy(std::span<const LegSet> observed, std::span<const LegSet> expected)
{
    const std::size_t n_obs = observed.size();
    const std::size_t n_exp = expected.size();
    if (n_obs == 0 && n_exp == 0) {
        return 1.0;
    }
    if (n_obs == 0 || n_exp == 0) {
        return 0.0;
    }
    std::size_t best = 0;
    for (std::size_t r = 0; r < n_obs; ++r) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < std::min(n_obs, n_exp); ++i) {
            if (observed[(i + r) % n_obs] == expected[i]) {
                ++hits;
            }
        }
        best = std::max(best, hits);
    }
    return static_cast<double>(best) / static_cast<double>(std::max(n_obs, n_exp));
}

bool is_tripod(std::span<const LegSet> sequence)
{
    if (sequence.size() < 2) {
        return false;
    }
    const LegSet odd{1, 3, 5};
    const LegSet even{2, 4, 6};
    if (sequence[0] != odd && sequence[0] != even) {
        return false;
    }
    for (std::size_t i = 1; i < sequence.size(); ++i) {
        const LegSet want = sequence[i - 1] == odd ? even : odd;
        if (sequence[i] != want) {
            return false;
        }
    }
    return true;
}

void write_gait_trace(std::ostream& out, const GaitTrace& trace)
{
    out << "# leg cycle_start_s cycle_end_s\n";
    char buf[80];
    for (std::size_t l = 0; l < trace.legs.size(); ++l) {
        for (const Cycle& c : trace.legs[l]) {
            std::snprintf(buf, sizeof buf, "%zu %.6f %.6f\n", l + 1, c.start, c.end);
            out << buf;
        }
    }
}

void write_label_sequence(std::ostream& out, std::span<const LegSet> sequence)
{
    out << "# event legs\n";
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        out << i << ' ' << sequence[i].to_string() << '\n';
    }
}

} // namespace gaitsim
