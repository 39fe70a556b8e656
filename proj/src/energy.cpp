#include "gaitsim/energy.hpp"

#include <cstdio>
#include <ostream>

#include "gaitsim/errors.hpp"

namespace gaitsim {

void EnergyModel::validate() const
{
    if (!(energy_per_spike >= 0.0) || !(andpool_energy_per_frame >= 0.0) || !(reference_per_leg > 0.0)) {
        throw ConfigError("energy model costs must be non-negative");
    }
}

EnergyReport energy_estimate(const EnergyInputs& inputs, const EnergyModel& model)
{
    model.validate();
    EnergyReport r;
    r.inputs = inputs;
    r.spike_energy = static_cast<double>(inputs.input_spikes) * model.energy_per_spike;
    r.andpool_energy = static_cast<double>(inputs.active_frames) * model.andpool_energy_per_frame;
    r.total = r.spike_energy + r.andpool_energy;
    if (inputs.leg_events > 0) {
        r.per_leg = r.total / static_cast<double>(inputs.leg_events);
        r.off_reference = r.per_leg > 2.0 * model.reference_per_leg || r.per_leg < 0.5 * model.reference_per_leg;
    }
    return r;
}

void write_energy_report(std::ostream& out, const EnergyReport& r, const EnergyModel& model)
{
    char buf[160];
    out << "# energy estimate (linear model)\n";
    out << "technology: " << model.technology << '\n';
    std::snprintf(buf, sizeof buf, "gates: %zu\n", model.gates);
    out << buf;
    std::snprintf(buf, sizeof buf, "input_spikes: %zu x %.17g J = %.17g J\n", r.inputs.input_spikes,
                  model.energy_per_spike, r.spike_energy);
    out << buf;
    std::snprintf(buf, sizeof buf, "active_frames: %zu x %.17g J = %.17g J\n", r.inputs.active_frames,
                  model.andpool_energy_per_frame, r.andpool_energy);
    out << buf;
    std::snprintf(buf, sizeof buf, "total: %.17g J\n", r.total);
    out << buf;
    std::snprintf(buf, sizeof buf, "leg_events: %zu\n", r.inputs.leg_events);
    out << buf;
    std::snprintf(buf, sizeof buf, "per_leg: %.17g J (%.3f nJ)\n", r.per_leg, r.per_leg * 1e9);
    out << buf;
    out << "per_leg_off_reference: " << (r.off_reference ? "yes" : "no") << '\n';
}

} // namespace gaitsim
