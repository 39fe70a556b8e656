#pragma once

// Pipeline commands behind the `gaitsim` CLI. Each writes deterministic text
// files into an output directory; files are written to a temporary name and
// renamed into place.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gaitsim/config.hpp"
#include "gaitsim/energy.hpp"
#include "gaitsim/gait_engine.hpp"

namespace gaitsim {

namespace fs = std::filesystem;

// Output file names inside --out.
namespace files {
inline constexpr const char* kTrainEvents = "train_events.txt";
inline constexpr const char* kTrainSchedule = "train_schedule.txt";
inline constexpr const char* kTestEvents = "test_events.txt";
inline constexpr const char* kTestSchedule = "test_schedule.txt";
inline constexpr const char* kWeights = "weights.txt";
inline constexpr const char* kTrainLog = "train_log.txt";
inline constexpr const char* kTrainRaster = "train_raster.txt";
inline constexpr const char* kTestRaster = "test_raster.txt";
inline constexpr const char* kGaitTrace = "gait_trace.txt";
inline constexpr const char* kLabels = "labels.txt";
inline constexpr const char* kTestReport = "test_report.txt";
inline constexpr const char* kEnergyReport = "energy_report.txt";
inline constexpr const char* kReport = "report.txt";
} // namespace files

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body);
std::string read_file(const fs::path& path);
// FNV-1a 64 of the file contents.
std::uint64_t file_checksum(const fs::path& path);

// Renders the training video and the spliced test video; writes both as event
// files plus their schedules.
void cmd_synth(const RunConfig& cfg, const fs::path& out);

struct TrainSummary {
    std::size_t repeats = 0;
    std::size_t updates = 0;
    std::size_t skipped = 0;
    std::size_t frames_per_repeat = 0;
};

// Trains from all-zero weights; writes weights, training log and raster.
TrainSummary cmd_train(const RunConfig& cfg, const fs::path& events, const fs::path& out);

struct TestReport {
    LabelSequence observed;
    LabelSequence expected;
    double accuracy = 0.0;
    bool tripod = false;
    std::size_t frames = 0;
    std::size_t output_spikes = 0;
    EnergyInputs energy_inputs;
};

// Frozen network on an event file; the weight file is only read. Writes the
// raster, gait trace, label sequence and a report.
TestReport cmd_test(const RunConfig& cfg, const fs::path& weights, const fs::path& events, const fs::path& schedule,
                    const fs::path& out);

// Energy of a test run: input activity from the event file, leg events from
// the output raster.
EnergyReport cmd_energy(const RunConfig& cfg, const fs::path& events, const fs::path& raster,
                        const std::optional<fs::path>& out);

struct ReproReport {
    std::optional<std::size_t> converged_after;  // repetitions
    std::vector<double> accuracy_per_repeat;
    double final_sequential_accuracy = 0.0;
    TestReport tripod;
    bool weights_unchanged = false;
    EnergyReport energy;
    bool passed = false;
};

// synth -> train -> splice -> frozen test -> report.
ReproReport cmd_repro(const RunConfig& cfg, const fs::path& out, std::ostream* progress = nullptr);

} // namespace gaitsim
