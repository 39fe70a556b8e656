#include "gaitsim/imitation_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

namespace gaitsim {

void GaussianPriors::validate() const
{
    for (std::size_t i = 0; i < legs.size(); ++i) {
        const LegPrior& p = legs[i];
        if (!(p.sigma > 0.0) || !(p.weight > 0.0)) {
            throw ConfigError("prior of leg " + std::to_string(i + 1) + " needs positive sigma and weight");
        }
        if (!std::isfinite(p.mean)) {
            throw ConfigError("prior mean of leg " + std::to_string(i + 1) + " is not finite");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (std::abs(wrap_angle(legs[j].mean - p.mean)) < 1e-12) {
                throw ConfigError("legs " + std::to_string(j + 1) + " and " + std::to_string(i + 1) +
                                  " share a prior mean");
            }
        }
    }
}

void TrainSchedule::validate() const
{
    if (!(omega > 0.0) || !(alpha > 0.0) || !(sigma_d > 0.0) || !(beta > 0.0) || !(w_max > 0.0)) {
        throw ConfigError("training schedule constants must all be positive");
    }
}

double TrainSchedule::potentiation(double t_sec) const { return omega * std::exp(-alpha * t_sec); }

double TrainSchedule::depression(double t_sec) const { return sigma_d * std::exp(-beta * t_sec); }

void EstimatorConfig::validate() const
{
    if (leg_kernel == 0 || body_and_kernel == 0 || body_or_kernel == 0 || history == 0) {
        throw ConfigError("estimator kernels and history must be >= 1");
    }
    const std::size_t body = body_and_kernel * body_or_kernel;
    if (body < leg_kernel || body % leg_kernel != 0) {
        throw ConfigError("body-map tile (" + std::to_string(body) + " px) must be a multiple of the leg tile (" +
                          std::to_string(leg_kernel) + " px)");
    }
}

std::size_t EstimatorConfig::mask_factor() const { return body_and_kernel * body_or_kernel / leg_kernel; }

double wrap_angle(double theta)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(theta, two_pi);
    if (r <= -std::numbers::pi) {
        r += two_pi;
    } else if (r > std::numbers::pi) {
        r -= two_pi;
    }
    return r;
}

LegLabel classify_angle(double theta, const GaussianPriors& priors)
{
    int best = 1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int l = 1; l <= kLegCount; ++l) {
        const LegPrior& p = priors.legs[static_cast<std::size_t>(l - 1)];
        const double d = wrap_angle(theta - p.mean);
        // log of weight * N(d; 0, sigma), constant terms dropped
        const double score = std::log(p.weight) - std::log(p.sigma) - d * d / (2.0 * p.sigma * p.sigma);
        if (score > best_score) {
            best_score = score;
            best = l;
        }
    }
    return LegLabel(best);
}

LegEstimate estimate_leg_pooled(std::span<const BinaryFrame> body_maps, const BinaryFrame& leg_frame,
                                const GaussianPriors& priors, const EstimatorConfig& cfg)
{
    if (popcount(leg_frame) == 0) {
        throw EmptyFrameError("no leg movement in the current frame");
    }
    if (body_maps.empty()) {
        throw DataError("leg estimation needs at least one body map");
    }
    const std::size_t n = std::min(cfg.history, body_maps.size());
    BinaryFrame body = body_maps[body_maps.size() - n];
    for (std::size_t i = body_maps.size() - n + 1; i < body_maps.size(); ++i) {
        body = frame_or(body, body_maps[i]);
    }

    // Anti-leg mask: the leg frame brought down to the body-map grid.
    const BinaryFrame leg_on_body_grid = orpool(leg_frame, cfg.mask_factor());
    if (!leg_on_body_grid.same_shape(body)) {
        throw DimensionError("leg frame does not map onto the body-map grid");
    }
    body = frame_and(frame_not(leg_on_body_grid), body);
    if (popcount(body) == 0) {
        throw DegenerateSceneError("body map is empty after masking the leg");
    }

    LegEstimate est;
    est.body = centroid(body);
    est.leg = centroid(leg_frame);
    est.theta = std::atan2(est.body.y - est.leg.y, est.body.x - est.leg.x);
    est.label = classify_angle(est.theta, priors);
    return est;
}

LegEstimate estimate_leg(std::span<const BinaryFrame> history, const GaussianPriors& priors,
                         const EstimatorConfig& cfg)
{
    if (history.empty()) {
        throw DataError("leg estimation needs at least the current frame");
    }
    const BinaryFrame& current = history.back();
    for (const auto& f : history) {
        if (!f.same_shape(current)) {
            throw DimensionError("history frames differ in shape");
        }
    }
    const BinaryFrame leg = andpool(current, cfg.leg_kernel);
    if (popcount(leg) == 0) {
        throw EmptyFrameError("no leg movement in the current frame");
    }
    const std::size_t n = std::min(cfg.history, history.size());
    std::vector<BinaryFrame> maps;
    maps.reserve(n);
    for (std::size_t i = history.size() - n; i < history.size(); ++i) {
        maps.push_back(orpool(andpool(history[i], cfg.body_and_kernel), cfg.body_or_kernel));
    }
    return estimate_leg_pooled(maps, leg, priors, cfg);
}

GaussianPriors calibrate_priors(const HexapodGeometry& geom, double sigma)
{
    geom.validate();
    GaussianPriors priors;
    for (int l = 1; l <= kLegCount; ++l) {
        const LegLabel leg(l);
        const Point a = geom.leg_anchors[leg.index()];
        const double rest = geom.rest_angle(leg);
        const Point mid{a.x + geom.leg_length * std::cos(rest), a.y + geom.leg_length * std::sin(rest)};
        priors.legs[leg.index()] = {std::atan2(geom.body_center.y - mid.y, geom.body_center.x - mid.x), sigma, 1.0};
    }
    priors.validate();
    return priors;
}

PreparedStream prepare_stream(const FrameStream& raw, const EstimatorConfig& cfg, unsigned threads)
{
    cfg.validate();
    PreparedStream out;
    out.leg_frames = pool_stream(raw, PoolOp::And, cfg.leg_kernel, threads).frames;
    out.body_maps =
        pool_stream(pool_stream(raw, PoolOp::And, cfg.body_and_kernel, threads), PoolOp::Or, cfg.body_or_kernel, threads)
            .frames;
    return out;
}

void write_train_log(std::ostream& out, std::span<const TrainLogEntry> log)
{
    out << "# t_sec leg_label theta_rad p m popcount_i10\n";
    char buf[160];
    for (const auto& e : log) {
        if (e.leg) {
            std::snprintf(buf, sizeof buf, "%.2f %d %.6f %.9g %.9g %zu\n", e.t_sec, *e.leg, e.theta, e.p, e.m,
                          e.popcount);
        } else {
            std::snprintf(buf, sizeof buf, "# skipped %.2f %zu %s\n", e.t_sec, e.popcount, e.note.c_str());
        }
        out << buf;
    }
}

ImitationTrainer::ImitationTrainer(TrainerConfig cfg, std::size_t leg_width, std::size_t leg_height)
    : cfg_(std::move(cfg)), weights_(kLegCount, leg_width, leg_height)
{
    cfg_.neuron.validate();
    cfg_.schedule.validate();
    cfg_.priors.validate();
    cfg_.estimator.validate();
    states_ = network_at_rest(cfg_.neuron);
    raster_.dt = cfg_.neuron.dt;
}

void ImitationTrainer::step(const BinaryFrame& leg_frame, const BinaryFrame& body_map)
{
    const double t = now();
    history_.push_back(body_map);
    while (history_.size() > cfg_.estimator.history) {
        history_.pop_front();
    }

    NetworkStep net = step_network(states_, weights_, leg_frame, cfg_.neuron, t);
    states_ = net.states;
    raster_.push(step_, net.spikes);

    const std::size_t active = popcount(leg_frame);
    if (active > 0) {
        const double p = cfg_.schedule.potentiation(t);
        const double m = cfg_.schedule.depression(t);
        const std::vector<BinaryFrame> maps(history_.begin(), history_.end());
        try {
            const LegEstimate est = estimate_leg_pooled(maps, leg_frame, cfg_.priors, cfg_.estimator);
            auto row = weights_.row(est.label.index());
            const auto bits = leg_frame.bits();
            const double w_max = cfg_.schedule.w_max;
            for (std::size_t i = 0; i < row.size(); ++i) {
                row[i] = std::clamp(bits[i] ? row[i] + p : row[i] - m, 0.0, w_max);
            }
            ++updates_;
            log_.push_back({t, est.label.value(), est.theta, p, m, active, {}});
        } catch (const DegenerateSceneError& e) {
            ++skipped_;
            log_.push_back({t, std::nullopt, 0.0, p, m, active, "empty-body-map"});
        }
    }
    ++step_;
}

void ImitationTrainer::run(const PreparedStream& video)
{
    for (std::size_t k = 0; k < video.size(); ++k) {
        step(video.leg_frames[k], video.body_maps[k]);
    }
}

TrainResult train(const FrameStream& raw, const TrainerConfig& cfg, std::size_t repeats, unsigned threads)
{
    raw.validate();
    const PreparedStream video = prepare_stream(raw, cfg.estimator, threads);
    const std::size_t w = raw.width() / cfg.estimator.leg_kernel;
    const std::size_t h = raw.height() / cfg.estimator.leg_kernel;
    ImitationTrainer trainer(cfg, w, h);
    for (std::size_t r = 0; r < repeats; ++r) {
        trainer.run(video);
    }
    return {trainer.weights(), trainer.raster(), trainer.log()};
}

SpikeRaster run_frozen(const WeightMap& weights, std::span<const BinaryFrame> leg_frames, const NeuronParams& params)
{
    params.validate();
    return run_network(leg_frames, weights, params);
}

} // namespace gaitsim
