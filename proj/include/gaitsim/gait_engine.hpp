#pragma once

// Output spikes to leg oscillation cycles, and scoring of spike rasters
// against gait schedules.

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "gaitsim/legs.hpp"

namespace gaitsim {

struct Cycle {
    double start = 0.0;
    double end = 0.0;

    friend bool operator==(const Cycle&, const Cycle&) = default;
};

struct GaitTrace {
    std::array<std::vector<Cycle>, kLegCount> legs;

    std::size_t cycle_count() const;
};

// A spike opens one oscillation period for its leg unless that leg is
// mid-cycle, in which case the spike is absorbed.
GaitTrace spikes_to_gait(const SpikeRaster& raster, double period);

struct LabelingOptions {
    // Spikes less than this long after the first spike of an event join it.
    double coincidence_window = 0.5;
    // A neuron re-firing within this long of its last counted spike is part
    // of the same burst and is dropped.
    double refractory = 2.0;
};

using LabelSequence = std::vector<LegSet>;

// Collapses a raster into the temporal sequence of spike events.
LabelSequence label_sequence(const SpikeRaster& raster, const LabelingOptions& options = {});

// Fraction of expected positions matched under the best cyclic rotation of
// `observed`, over max(|observed|, |expected|). Two empty sequences score 1.
double sequence_accuracy(std::span<const LegSet> observed, std::span<const LegSet> expected);

// True iff the sequence has at least two events and alternates {1,3,5} and
// {2,4,6} throughout.
bool is_tripod(std::span<const LegSet> sequence);

void write_gait_trace(std::ostream& out, const GaitTrace& trace);
void write_label_sequence(std::ostream& out, std::span<const LegSet> sequence);

} // namespace gaitsim
