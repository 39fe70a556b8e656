#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "gaitsim/errors.hpp"
#include "gaitsim/gait_engine.hpp"
#include "gaitsim/synth_scene.hpp"

using namespace gaitsim;

namespace {

SpikeRaster raster_of(std::initializer_list<std::pair<std::size_t, LegSet>> spikes, double dt = 0.04)
{
    SpikeRaster r;
    r.dt = dt;
    for (const auto& [step, legs] : spikes) {
        r.push(step, legs);
    }
    return r;
}

// Exhaustive alignment: best number of equal positions over all rotations of
// `obs`, comparing position i of the rotated sequence with exp[i].
double alignment_oracle(const LabelSequence& obs, const LabelSequence& exp)
{
    if (obs.empty() && exp.empty()) {
        return 1.0;
    }
    if (obs.empty() || exp.empty()) {
        return 0.0;
    }
    std::size_t best = 0;
    for (std::size_t r = 0; r < obs.size(); ++r) {
        LabelSequence rotated(obs.begin() + static_cast<long>(r), obs.end());
        rotated.insert(rotated.end(), obs.begin(), obs.begin() + static_cast<long>(r));
        std::size_t hits = 0;
        for (std::size_t i = 0; i < rotated.size() && i < exp.size(); ++i) {
            hits += rotated[i] == exp[i] ? 1 : 0;
        }
        best = std::max(best, hits);
    }
    return static_cast<double>(best) / static_cast<double>(std::max(obs.size(), exp.size()));
}

LabelSequence random_sequence(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_int_distribution<int> mask(1, 63);
    std::uniform_int_distribution<int> coin(0, 3);
    LabelSequence s;
    for (std::size_t i = 0; i < n; ++i) {
        // Bias toward a small alphabet so matches happen.
        s.push_back(coin(rng) == 0 ? LegSet::from_mask(static_cast<std::uint8_t>(mask(rng)))
                                   : LegSet{1 + coin(rng)});
    }
    return s;
}

} // namespace

TEST(SpikesToGait, EmptyRaster)
{
    EXPECT_EQ(spikes_to_gait(SpikeRaster{}, 1.0).cycle_count(), 0u);
    EXPECT_THROW(spikes_to_gait(SpikeRaster{}, 0.0), ConfigError);
}

TEST(SpikesToGait, OneCyclePerSeparatedSpike)
{
    const SpikeRaster r = raster_of({{0, {3}}, {50, {1}}, {100, {6}}, {150, {2}}, {200, {5}}, {250, {4}}});
    const GaitTrace g = spikes_to_gait(r, 1.0);
    EXPECT_EQ(g.cycle_count(), 6u);
    EXPECT_EQ(g.legs[2], (std::vector<Cycle>{{0.0, 1.0}}));
    EXPECT_DOUBLE_EQ(g.legs[0][0].start, 2.0);
    EXPECT_DOUBLE_EQ(g.legs[3][0].end, 11.0);
}

TEST(SpikesToGait, MidCycleSpikeIsAbsorbed)
{
    // Two leg-1 spikes half a period apart.
    const SpikeRaster r = raster_of({{0, {1}}, {25, {1}}});
    const GaitTrace g = spikes_to_gait(r, 2.0);
    ASSERT_EQ(g.legs[0].size(), 1u);
    EXPECT_DOUBLE_EQ(g.legs[0][0].end, 2.0);
    // A spike right at the end of the cycle starts the next one.
    const GaitTrace g2 = spikes_to_gait(raster_of({{0, {1}}, {25, {1}}}), 1.0);
    EXPECT_EQ(g2.legs[0].size(), 2u);
}

TEST(SpikesToGait, CyclesNeverOverlap)
{
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> mask(0, 63);
    for (int trial = 0; trial < 50; ++trial) {
        SpikeRaster r;
        for (std::size_t k = 0; k < 400; ++k) {
            if (mask(rng) < 10) {
                r.push(k, LegSet::from_mask(static_cast<std::uint8_t>(mask(rng))));
            }
        }
        const double period = 0.1 + 0.05 * trial;
        const GaitTrace g = spikes_to_gait(r, period);
        for (const auto& cycles : g.legs) {
            for (std::size_t i = 0; i < cycles.size(); ++i) {
                EXPECT_NEAR(cycles[i].end - cycles[i].start, period, 1e-12);
                if (i > 0) {
                    EXPECT_GE(cycles[i].start, cycles[i - 1].end);
                }
            }
        }
    }
}

TEST(LabelSequence, Examples)
{
    const SpikeRaster seq = raster_of({{6, {1}}, {31, {2}}, {56, {3}}, {81, {4}}, {106, {5}}, {131, {6}}});
    EXPECT_EQ(label_sequence(seq), (LabelSequence{{1}, {2}, {3}, {4}, {5}, {6}}));

    const SpikeRaster tri = raster_of({{6, {1, 3, 5}}, {31, {2, 4, 6}}, {56, {1, 3, 5}}, {81, {2, 4, 6}}});
    EXPECT_EQ(label_sequence(tri), (LabelSequence{{1, 3, 5}, {2, 4, 6}, {1, 3, 5}, {2, 4, 6}}));

    // Two-step burst of neuron 4.
    const SpikeRaster burst = raster_of({{10, {4}}, {11, {4}}});
    EXPECT_EQ(label_sequence(burst), (LabelSequence{{4}}));
}

TEST(LabelSequence, StaggeredSpikesJoinOneEvent)
{
    // Tripod legs firing a few steps apart form one event.
    const SpikeRaster r = raster_of({{6, {1}}, {7, {3, 5}}, {31, {2, 4}}, {33, {6}}});
    EXPECT_EQ(label_sequence(r), (LabelSequence{{1, 3, 5}, {2, 4, 6}}));
    // Outside the coincidence window they stay separate.
    LabelingOptions narrow{0.02, 2.0};
    EXPECT_EQ(label_sequence(r, narrow), (LabelSequence{{1}, {3, 5}, {2, 4}, {6}}));
}

TEST(LabelSequence, RoundTripsGroundTruth)
{
    // Every schedule whose repeats of a leg are at least one refractory
    // window apart.
    GaitSchedule mixed = parse_schedule_spec("1;2;3;4;5;6;1,4;2,5;3,6");
    mixed.entries.push_back({11, LegSet{1, 2, 3, 4, 5, 6}});
    const std::vector<GaitSchedule> schedules{sequential_schedule(), tripod_schedule(4), mixed};
    for (const auto& s : schedules) {
        const LabelSequence seq = label_sequence(ground_truth_raster(s, 25), {0.5, 2.0});
        ASSERT_EQ(seq.size(), s.entries.size());
        for (std::size_t i = 0; i < seq.size(); ++i) {
            EXPECT_EQ(seq[i], s.entries[i].legs);
        }
    }
}

TEST(LabelSequence, RefireInsideRefractoryWindowIsDropped)
{
    const SpikeRaster r = raster_of({{6, {3, 6}}, {31, {1, 2, 3, 4, 5, 6}}, {56, {3}}});
    EXPECT_EQ(label_sequence(r, {0.5, 2.0}), (LabelSequence{{3, 6}, {1, 2, 4, 5}, {3}}));
}

TEST(Accuracy, Examples)
{
    const LabelSequence six{{1}, {2}, {3}, {4}, {5}, {6}};
    EXPECT_DOUBLE_EQ(sequence_accuracy(six, six), 1.0);
    const LabelSequence disjoint{{1, 2}, {1, 2}, {1, 2}, {1, 2}, {1, 2}, {1, 2}};
    EXPECT_DOUBLE_EQ(sequence_accuracy(disjoint, six), 0.0);
    LabelSequence one_wrong = six;
    one_wrong[3] = LegSet{5};
    EXPECT_DOUBLE_EQ(sequence_accuracy(one_wrong, six), 5.0 / 6.0);
    // Locking on mid-video.
    const LabelSequence late{{3}, {4}, {5}, {6}, {1}, {2}};
    EXPECT_DOUBLE_EQ(sequence_accuracy(late, six), 1.0);
    EXPECT_DOUBLE_EQ(sequence_accuracy({}, six), 0.0);
    EXPECT_DOUBLE_EQ(sequence_accuracy({}, {}), 1.0);
    // Missing events count against the score.
    EXPECT_DOUBLE_EQ(sequence_accuracy(LabelSequence(six.begin(), six.begin() + 3), six), 0.5);
}

TEST(Accuracy, MatchesExhaustiveOracle)
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const LabelSequence a = random_sequence(rng, 1 + trial % 9);
        const LabelSequence b = random_sequence(rng, 1 + (trial / 9) % 9);
        EXPECT_DOUBLE_EQ(sequence_accuracy(a, b), alignment_oracle(a, b));
    }
}

TEST(Accuracy, InvariantUnderJointRotation)
{
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + trial % 8;
        const LabelSequence a = random_sequence(rng, n);
        const LabelSequence b = random_sequence(rng, n);
        const double base = sequence_accuracy(a, b);
        for (std::size_t r = 1; r < n; ++r) {
            LabelSequence ra(a.begin() + static_cast<long>(r), a.end());
            ra.insert(ra.end(), a.begin(), a.begin() + static_cast<long>(r));
            LabelSequence rb(b.begin() + static_cast<long>(r), b.end());
            rb.insert(rb.end(), b.begin(), b.begin() + static_cast<long>(r));
            EXPECT_DOUBLE_EQ(sequence_accuracy(ra, rb), base);
        }
        // 1.0 exactly when some rotation of a equals b.
        bool some_rotation = false;
        for (std::size_t r = 0; r < n; ++r) {
            LabelSequence ra(a.begin() + static_cast<long>(r), a.end());
            ra.insert(ra.end(), a.begin(), a.begin() + static_cast<long>(r));
            some_rotation = some_rotation || ra == b;
        }
        EXPECT_EQ(base == 1.0, some_rotation);
        EXPECT_DOUBLE_EQ(sequence_accuracy(a, a), 1.0);
    }
}

TEST(Tripod, Examples)
{
    EXPECT_TRUE(is_tripod(LabelSequence{{1, 3, 5}, {2, 4, 6}, {1, 3, 5}}));
    EXPECT_TRUE(is_tripod(LabelSequence{{2, 4, 6}, {1, 3, 5}}));
    EXPECT_FALSE(is_tripod(LabelSequence{{1, 3, 5}, {1, 3, 5}}));
    EXPECT_FALSE(is_tripod(LabelSequence{{1}, {2}, {3}, {4}, {5}, {6}}));
    EXPECT_FALSE(is_tripod(LabelSequence{{1, 3, 5}}));
    EXPECT_FALSE(is_tripod(LabelSequence{}));
    EXPECT_FALSE(is_tripod(LabelSequence{{1, 3, 5}, {2, 4}}));
}

TEST(Export, TraceAndLabels)
{
    const GaitTrace g = spikes_to_gait(raster_of({{0, {2}}, {25, {5}}}), 1.0);
    std::ostringstream t;
    write_gait_trace(t, g);
    EXPECT_EQ(t.str(), "# leg cycle_start_s cycle_end_s\n2 0.000000 1.000000\n5 1.000000 2.000000\n");
    std::ostringstream l;
    write_label_sequence(l, LabelSequence{{1, 3, 5}, {2}});
    EXPECT_EQ(l.str(), "# event legs\n0 1,3,5\n1 2\n");
}
