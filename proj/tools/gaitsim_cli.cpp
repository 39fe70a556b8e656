// gaitsim: synth | train | test | energy | repro
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 repro acceptance failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gaitsim/commands.hpp"
#include "gaitsim/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitAcceptance = 4;

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool verbose = false;
    bool dump_config = false;
    std::string events;
    std::string weights;
    std::string schedule;
    std::string raster;
};

std::string or_default(const std::string& v, const gaitsim::fs::path& fallback)
{
    return v.empty() ? fallback.string() : v;
}

std::string set_text(const gaitsim::LabelSequence& seq)
{
    std::string s;
    for (const auto& l : seq) {
        s += (s.empty() ? "{" : " {") + l.to_string() + "}";
    }
    return s;
}

int run(CLI::App& app, const Options& o)
{
    using namespace gaitsim;
    if (o.dump_config) {
        write_default_config(std::cout);
        return 0;
    }
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (o.seed) {
        cfg.render.seed = *o.seed;
    }
    if (o.threads) {
        cfg.threads = *o.threads;
    }
    cfg.validate();
    const fs::path out = o.out;

    if (app.got_subcommand("synth")) {
        cmd_synth(cfg, out);
        if (o.verbose) {
            std::cerr << "wrote " << (out / files::kTrainEvents).string() << " and "
                      << (out / files::kTestEvents).string() << '\n';
        }
    } else if (app.got_subcommand("train")) {
        const TrainSummary s = cmd_train(cfg, or_default(o.events, out / files::kTrainEvents), out);
        if (o.verbose) {
            std::cerr << "trained " << s.repeats << " repetitions of " << s.frames_per_repeat << " frames: "
                      << s.updates << " updates, " << s.skipped << " skipped\n";
        }
    } else if (app.got_subcommand("test")) {
        const TestReport r = cmd_test(cfg, or_default(o.weights, out / files::kWeights),
                                      or_default(o.events, out / files::kTestEvents),
                                      or_default(o.schedule, out / files::kTestSchedule), out);
        std::printf("sequence_accuracy %.6f is_tripod %s\n", r.accuracy, r.tripod ? "true" : "false");
        if (o.verbose) {
            std::cerr << "observed: " << set_text(r.observed) << '\n';
            std::cerr << "expected: " << set_text(r.expected) << '\n';
        }
    } else if (app.got_subcommand("energy")) {
        const EnergyReport r = cmd_energy(cfg, or_default(o.events, out / files::kTestEvents),
                                          or_default(o.raster, out / files::kTestRaster), out);
        std::printf("total %.6g J per_leg %.6g J\n", r.total, r.per_leg);
    } else if (app.got_subcommand("repro")) {
        const ReproReport r = cmd_repro(cfg, out, o.verbose ? &std::cerr : nullptr);
        std::printf("sequential_accuracy %.6f test_accuracy %.6f is_tripod %s weights_unchanged %s\n",
                    r.final_sequential_accuracy, r.tripod.accuracy, r.tripod.tripod ? "true" : "false",
                    r.weights_unchanged ? "true" : "false");
        std::printf("%s\n", r.passed ? "PASS" : "FAIL");
        return r.passed ? 0 : kExitAcceptance;
    } else {
        std::cerr << app.help();
        return kExitConfig;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hexapod gait imitation from synthetic event-camera footage"};
    Options o;
    app.fallthrough();
    app.add_option("--config", o.config, "Config file (key = value, sections per module)");
    app.add_option("--out", o.out, "Output directory")->capture_default_str();
    app.add_option("--seed", o.seed, "Override the scene seed");
    app.add_option("--threads", o.threads, "Worker threads for frame pooling")->check(CLI::Range(1u, 256u));
    app.add_flag("--verbose,-v", o.verbose, "Progress on stderr");
    app.add_flag("--dump-config", o.dump_config, "Print the default config and exit");

    app.add_subcommand("synth", "Render the training video and the spliced test video as event files");
    auto* train = app.add_subcommand("train", "Train from all-zero weights");
    train->add_option("--events", o.events, "Training event file (default OUT/train_events.txt)");
    auto* test = app.add_subcommand("test", "Run the frozen network on an event file");
    test->add_option("--weights", o.weights, "Weight file (default OUT/weights.txt)");
    test->add_option("--events", o.events, "Test event file (default OUT/test_events.txt)");
    test->add_option("--schedule", o.schedule, "Expected schedule (default OUT/test_schedule.txt)");
    auto* energy = app.add_subcommand("energy", "Energy estimate for a test run");
    energy->add_option("--events", o.events, "Event file (default OUT/test_events.txt)");
    energy->add_option("--raster", o.raster, "Output raster (default OUT/test_raster.txt)");
    app.add_subcommand("repro", "synth, train, splice, test and report in one run");
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        return run(app, o);
    } catch (const gaitsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const gaitsim::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
