#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gaitsim/errors.hpp"

namespace gaitsim {

inline constexpr int kLegCount = 6;

// A leg (and its output neuron), numbered 1..6. Legs 1-3 sit on the left
// side of the body front to back, legs 4-6 on the right side.
class LegLabel {
public:
    explicit LegLabel(int value) : value_(value)
    {
        if (value < 1 || value > kLegCount) {
            throw DataError("leg label " + std::to_string(value) + " outside 1..6");
        }
    }

    int value() const { return value_; }
    std::size_t index() const { return static_cast<std::size_t>(value_ - 1); }

    friend bool operator==(LegLabel, LegLabel) = default;
    friend auto operator<=>(LegLabel, LegLabel) = default;

private:
    int value_;
};

// Small bitset over the six legs.
class LegSet {
public:
    LegSet() = default;
    LegSet(std::initializer_list<int> legs)
    {
        for (int l : legs) {
            insert(LegLabel(l));
        }
    }

    static LegSet from_mask(std::uint8_t mask)
    {
        if (mask & ~kAllMask) {
            throw DataError("leg mask has bits beyond leg 6");
        }
        LegSet s;
        s.mask_ = mask;
        return s;
    }

    void insert(LegLabel leg) { mask_ |= bit(leg); }
    void erase(LegLabel leg) { mask_ &= static_cast<std::uint8_t>(~bit(leg)); }
    bool contains(LegLabel leg) const { return (mask_ & bit(leg)) != 0; }
    bool empty() const { return mask_ == 0; }
    int size() const { return __builtin_popcount(mask_); }
    std::uint8_t mask() const { return mask_; }

    LegSet operator|(LegSet other) const { return from_mask(mask_ | other.mask_); }
    LegSet& operator|=(LegSet other)
    {
        mask_ |= other.mask_;
        return *this;
    }

    std::vector<LegLabel> labels() const
    {
        std::vector<LegLabel> out;
        for (int l = 1; l <= kLegCount; ++l) {
            if (contains(LegLabel(l))) {
                out.emplace_back(l);
            }
        }
        return out;
    }

    // "1,3,5"; empty set prints as "-".
    std::string to_string() const
    {
        if (empty()) {
            return "-";
        }
        std::string s;
        for (LegLabel l : labels()) {
            if (!s.empty()) {
                s += ',';
            }
            s += std::to_string(l.value());
        }
        return s;
    }

    static LegSet parse(const std::string& text);

    friend bool operator==(LegSet, LegSet) = default;

private:
    static constexpr std::uint8_t kAllMask = 0x3f;
    static std::uint8_t bit(LegLabel leg) { return static_cast<std::uint8_t>(1u << leg.index()); }

    std::uint8_t mask_ = 0;
};

inline LegSet LegSet::parse(const std::string& text)
{
    if (text == "-") {
        return {};
    }
    LegSet s;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) {
            comma = text.size();
        }
        const std::string item = text.substr(pos, comma - pos);
        if (item.empty()) {
            throw DataError("empty leg label in '" + text + "'");
        }
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw DataError("bad leg label '" + item + "'");
        }
        if (used != item.size()) {
            throw DataError("bad leg label '" + item + "'");
        }
        s.insert(LegLabel(value));
        pos = comma + 1;
    }
    return s;
}

// Time-indexed record of which output neurons spiked. Steps are stored by
// integer index so every time is an exact multiple of dt.
struct RasterStep {
    std::size_t step = 0;
    LegSet spikes;

    friend bool operator==(const RasterStep&, const RasterStep&) = default;
};

struct SpikeRaster {
    double dt = 0.04;
    std::vector<RasterStep> steps;  // strictly increasing step index

    double time_of(const RasterStep& s) const { return static_cast<double>(s.step) * dt; }
    std::size_t spike_count() const
    {
        std::size_t n = 0;
        for (const auto& s : steps) {
            n += static_cast<std::size_t>(s.spikes.size());
        }
        return n;
    }

    // Appends a step; the index must exceed the last stored one.
    void push(std::size_t step, LegSet spikes)
    {
        if (!steps.empty() && step <= steps.back().step) {
            throw DataError("raster steps must be strictly increasing");
        }
        steps.push_back({step, spikes});
    }

    friend bool operator==(const SpikeRaster&, const SpikeRaster&) = default;
};

} // namespace gaitsim
