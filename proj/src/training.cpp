#include "streamflow/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "streamflow/checkpoint.hpp"
#include "streamflow/errors.hpp"

namespace streamflow {

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
    if (!(lr_first_epoch > 0.0) || !(lr_rest > 0.0)) throw ConfigError("train: learning rates must be > 0");
    if (!(clip_norm > 0.0)) throw ConfigError("train: clip_norm must be > 0");
    if (!(weight_decay >= 0.0)) throw ConfigError("train: weight_decay must be >= 0");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
        !(adam.eps > 0.0)) {
        throw ConfigError("train: invalid Adam hyperparameters");
    }
    if (!(nse_epsilon >= 0.0)) throw ConfigError("train: nse_epsilon must be >= 0");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("train: validation_fraction must lie in [0, 1)");
    }
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"lr_first_epoch", c.lr_first_epoch},
            {"lr_rest", c.lr_rest},
            {"adam_beta1", c.adam.beta1},
            {"adam_beta2", c.adam.beta2},
            {"adam_eps", c.adam.eps},
            {"clip_norm", c.clip_norm},
            {"weight_decay", c.weight_decay},
            {"loss", c.loss == LossKind::nse ? "nse" : "mse"},
            {"nse_epsilon", c.nse_epsilon},
            {"seed", c.seed},
            {"samples_per_epoch", c.samples_per_epoch},
            {"validation_fraction", c.validation_fraction},
            {"keep_best", c.keep_best},
            {"freeze_representation", c.freeze_representation}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    if (!j.is_object()) throw ConfigError("train config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "epochs") c.epochs = value.get<std::size_t>();
            else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
            else if (key == "lr_first_epoch") c.lr_first_epoch = value.get<double>();
            else if (key == "lr_rest") c.lr_rest = value.get<double>();
            else if (key == "adam_beta1") c.adam.beta1 = value.get<double>();
            else if (key == "adam_beta2") c.adam.beta2 = value.get<double>();
            else if (key == "adam_eps") c.adam.eps = value.get<double>();
            else if (key == "clip_norm") c.clip_norm = value.get<double>();
            else if (key == "weight_decay") c.weight_decay = value.get<double>();
            else if (key == "loss") {
                const auto s = value.get<std::string>();
                if (s == "nse") c.loss = LossKind::nse;
                else if (s == "mse") c.loss = LossKind::mse;
                else throw ConfigError("train.loss must be 'nse' or 'mse'");
            } else if (key == "nse_epsilon") c.nse_epsilon = value.get<double>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "samples_per_epoch") c.samples_per_epoch = value.get<std::size_t>();
            else if (key == "validation_fraction") c.validation_fraction = value.get<double>();
            else if (key == "keep_best") c.keep_best = value.get<bool>();
            else if (key == "freeze_representation") c.freeze_representation = value.get<bool>();
            else throw ConfigError("unknown train config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

double lr_schedule(const TrainConfig& config, std::size_t epoch_index) {
    return epoch_index == 0 ? config.lr_first_epoch : config.lr_rest;
}

void adam_step(ParameterSet& params, const GradientSet& grads, OptimizerState& state, double lr,
               const AdamHyper& hyper) {
    const std::size_t n = params.size();
    if (grads.size() != n) throw ShapeError("adam gradients", n, grads.size());
    if (state.m.size() != n || state.v.size() != n) throw ShapeError("adam state", n, state.m.size());
    const auto g = grads.values();
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(g[i])) {
            throw NumericalError("non-finite gradient in " + params.layout().block_name(i));
        }
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(hyper.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, double(state.step));
    auto p = params.values();
    for (std::size_t i = 0; i < n; ++i) {
        state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g[i];
        state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
}

namespace {

std::mt19937_64 shuffle_rng(std::uint64_t seed) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), 0x5AFFu};
    return std::mt19937_64(seq);
}

struct BatchResult {
    double loss_sum = 0.0;  // sum of per-sample losses
    bool finite = true;
};

}  // namespace

TrainingRun train(const ModelConfig& model, const SampleSet& samples, const TrainConfig& config,
                  const TrainOptions& options) {
    config.validate();
    model.validate();
    if (!(samples.config() == model)) throw ShapeError("sample set model config", model.input_dim(), samples.config().input_dim());
    if (samples.empty()) throw InsufficientDataError("train: no training samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples.at(i).target_observed) throw ConfigError("train: sample set contains unobserved targets");
        if (config.loss == LossKind::nse && !samples.basins()[samples.refs()[i].basin].has_loss_stats) {
            throw InsufficientDataError("train: basin without loss statistics");
        }
    }

    TrainingRun run(model);
    run.config = config;
    run.seed = config.seed;
    ParameterSet params = options.initial ? *options.initial : init_parameters(model, config.seed);
    if (!(params.config() == model)) throw ShapeError("initial parameters", model.input_dim(), params.config().input_dim());
    run.final_params = params;
    if (config.epochs == 0) return run;

    OptimizerState opt(params.size());
    GradientSet grads(model);
    ForwardTrace trace;
    BackwardWorkspace ws;
    auto rng = shuffle_rng(config.seed);
    std::vector<std::size_t> order(samples.size());

    const std::size_t per_epoch = config.samples_per_epoch == 0
                                      ? samples.size()
                                      : std::min(config.samples_per_epoch, samples.size());

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_schedule(config, epoch);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        const ParameterSet epoch_start = params;
        double loss_sum = 0.0;
        bool diverged = false;
        std::string reason;
        std::vector<SampleRef> batch_refs;

        for (std::size_t begin = 0; begin < per_epoch && !diverged; begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, per_epoch);
            const double n = double(end - begin);
            grads.fill(0.0);
            double batch_loss = 0.0;
            batch_refs.clear();
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t idx = order[k];
                const Sample s = samples.at(idx);
                batch_refs.push_back(samples.refs()[idx]);
                const double sim = forward_into(params, s.window, trace);
                if (!std::isfinite(sim)) {
                    diverged = true;
                    reason = "non-finite prediction";
                    break;
                }
                const double obs = s.target;
                const LossResult lr_i = config.loss == LossKind::nse
                                            ? nse_loss(std::span(&sim, 1), std::span(&obs, 1),
                                                       std::span(&samples.loss_stats(idx), 1))
                                            : mse_loss(std::span(&sim, 1), std::span(&obs, 1));
                batch_loss += lr_i.loss / n;
                backward_accumulate(params, trace, lr_i.d_sim[0] / n, grads, ws);
            }
            if (diverged || !std::isfinite(batch_loss)) {
                diverged = true;
                if (reason.empty()) reason = "non-finite loss";
                break;
            }
            if (config.weight_decay > 0.0) {
                auto g = grads.values();
                const auto p = params.values();
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += config.weight_decay * p[i];
            }
            if (config.freeze_representation) grads.zero_representation();
            const double pre = grads.global_norm();
            if (!std::isfinite(pre)) {
                diverged = true;
                reason = "non-finite gradient";
                break;
            }
            if (pre > config.clip_norm) grads.scale(config.clip_norm / pre);
            adam_step(params, grads, opt, lr, config.adam);
            loss_sum += batch_loss * n;
            run.samples_seen += end - begin;
            if (options.on_step) {
                options.on_step({epoch, std::size_t(opt.step), lr, batch_loss, pre, grads.global_norm(),
                                 end - begin, batch_refs});
            }
        }
        if (diverged) {
            run.status = RunStatus::diverged;
            run.message = reason + " in epoch " + std::to_string(epoch + 1);
            run.final_params = epoch_start;
            break;
        }

        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.lr = lr;
        rec.samples = per_epoch;
        rec.train_loss = loss_sum / double(per_epoch);
        if (options.validation && !options.validation->empty()) {
            rec.validation = evaluate(params, *options.validation).summary;
            if (config.keep_best && rec.validation &&
                (!run.best_params || rec.validation->median > run.best_validation_median)) {
                run.best_params = params;
                run.best_validation_median = rec.validation->median;
            }
        }
        run.history.push_back(rec);
        run.final_params = params;
        if (options.on_epoch) options.on_epoch(rec, params);
    }

    if (!options.checkpoint_dir.empty()) {
        const auto meta = nlohmann::json{{"seed", config.seed}, {"train_config", train_config_to_json(config)}};
        const auto final_path = options.checkpoint_dir / "checkpoint_final.json";
        save_checkpoint(final_path, {run.final_params, meta});
        run.checkpoints.push_back(final_path);
        if (run.best_params) {
            const auto best_path = options.checkpoint_dir / "checkpoint_best.json";
            save_checkpoint(best_path, {*run.best_params, meta});
            run.checkpoints.push_back(best_path);
        }
    }
    return run;
}

std::string training_log_jsonl(const TrainingRun& run) {
    std::ostringstream os;
    for (const auto& rec : run.history) {
        nlohmann::json j{{"epoch", rec.epoch}, {"lr", rec.lr}, {"train_loss", rec.train_loss},
                         {"samples", rec.samples}};
        j["validation"] = rec.validation ? summary_to_json(*rec.validation) : nlohmann::json(nullptr);
        os << j.dump() << '\n';
    }
    return os.str();
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_validation_basins(
    const DomainDataset& dataset, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("validation fraction must lie in [0, 1)");
    std::vector<std::string> ids = dataset.basin_ids();
    std::size_t held = std::size_t(std::ceil(fraction * double(ids.size())));
    if (held >= ids.size()) held = ids.size() - 1;
    if (held == 0) return {ids, {}};
    std::vector<std::size_t> idx(ids.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), 0x7A1Du};
    std::mt19937_64 rng(seq);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::uint8_t> is_val(ids.size(), 0);
    for (std::size_t i = 0; i < held; ++i) is_val[idx[i]] = 1;
    std::vector<std::string> tr, va;
    for (std::size_t i = 0; i < ids.size(); ++i) (is_val[i] ? va : tr).push_back(ids[i]);
    return {tr, va};
}

}  // namespace streamflow
