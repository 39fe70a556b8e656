#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

namespace gaitsim {

// Linear energy approximation for the testing phase: a fixed cost per input
// spike reaching the network plus a fixed cost per frame the andpool filter
// processes with activity.
struct EnergyModel {
    double energy_per_spike = 1.7e-9;           // J
    double andpool_energy_per_frame = 2.5e-9;   // J
    std::size_t gates = 3600;
    std::string technology = "14nm CMOS AND gates, 6 transistors each; neuromorphic spike cost";
    double reference_per_leg = 10e-9;           // J, used for the deviation flag

    void validate() const;
};

struct EnergyInputs {
    std::size_t input_spikes = 0;   // set bits of the leg frames fed to the network
    std::size_t active_frames = 0;  // frames whose leg frame is nonempty
    std::size_t leg_events = 0;     // leg movements the energy is shared over
};

struct EnergyReport {
    EnergyInputs inputs;
    double spike_energy = 0.0;
    double andpool_energy = 0.0;
    double total = 0.0;
    double per_leg = 0.0;  // 0 when there are no leg events
    // Set when per_leg differs from the reference by more than 2x.
    bool off_reference = false;
};

EnergyReport energy_estimate(const EnergyInputs& inputs, const EnergyModel& model);

void write_energy_report(std::ostream& out, const EnergyReport& report, const EnergyModel& model);

} // namespace gaitsim
