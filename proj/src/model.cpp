#include "streamflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "streamflow/errors.hpp"
#include "streamflow/kernels.hpp"

namespace streamflow {

void ModelConfig::validate() const {
    if (dynamic_dim == 0) throw ConfigError("model: dynamic_dim must be >= 1");
    if (hidden_dim == 0) throw ConfigError("model: hidden_dim must be >= 1");
    if (num_layers == 0) throw ConfigError("model: num_layers must be >= 1");
    if (sequence_length == 0) throw ConfigError("model: sequence_length must be >= 1");
    if (use_static && static_dim == 0) {
        throw ConfigError("model: use_static requires static_dim >= 1");
    }
}

ParameterLayout::ParameterLayout(const ModelConfig& config)
    : input_(config.input_dim()), hidden_(config.hidden_dim), layers_(config.num_layers) {
    config.validate();
    std::size_t offset = 0;
    for (std::size_t l = 0; l < layers_; ++l) {
        weight_offsets_.push_back(offset);
        offset += 4 * hidden_ * layer_row_width(l) + 4 * hidden_;
    }
    representation_size_ = offset;
}

std::size_t ParameterLayout::layer_input_dim(std::size_t layer) const {
    if (layer >= layers_) throw ShapeError("layer index", layers_, layer);
    return layer == 0 ? input_ : hidden_;
}

std::size_t ParameterLayout::layer_bias_offset(std::size_t layer) const {
    return layer_weight_offset(layer) + 4 * hidden_ * layer_row_width(layer);
}

std::string ParameterLayout::block_name(std::size_t flat_index) const {
    if (flat_index >= total_size()) return "out-of-range";
    if (flat_index >= head_bias_offset()) return "head.bias";
    if (flat_index >= head_weight_offset()) return "head.weights";
    for (std::size_t l = layers_; l-- > 0;) {
        if (flat_index >= layer_bias_offset(l)) return "layer" + std::to_string(l) + ".bias";
        if (flat_index >= layer_weight_offset(l)) return "layer" + std::to_string(l) + ".weights";
    }
    return "out-of-range";
}

ParameterBlocks::ParameterBlocks(const ModelConfig& config)
    : config_(config), layout_(config), values_(layout_.total_size(), 0.0) {}

ParameterBlocks::ParameterBlocks(const ModelConfig& config, std::vector<double> flat)
    : config_(config), layout_(config), values_(std::move(flat)) {
    if (values_.size() != layout_.total_size()) {
        throw ShapeError("flat parameter vector", layout_.total_size(), values_.size());
    }
}

std::span<double> ParameterBlocks::representation() {
    return std::span<double>(values_).first(layout_.representation_size());
}
std::span<const double> ParameterBlocks::representation() const {
    return std::span<const double>(values_).first(layout_.representation_size());
}
std::span<double> ParameterBlocks::head() {
    return std::span<double>(values_).subspan(layout_.representation_size());
}
std::span<const double> ParameterBlocks::head() const {
    return std::span<const double>(values_).subspan(layout_.representation_size());
}

std::span<double> ParameterBlocks::layer_weights(std::size_t layer) {
    return std::span<double>(values_).subspan(layout_.layer_weight_offset(layer),
                                              4 * config_.hidden_dim * layout_.layer_row_width(layer));
}
std::span<const double> ParameterBlocks::layer_weights(std::size_t layer) const {
    return std::span<const double>(values_).subspan(
        layout_.layer_weight_offset(layer), 4 * config_.hidden_dim * layout_.layer_row_width(layer));
}
std::span<double> ParameterBlocks::layer_bias(std::size_t layer) {
    return std::span<double>(values_).subspan(layout_.layer_bias_offset(layer), 4 * config_.hidden_dim);
}
std::span<const double> ParameterBlocks::layer_bias(std::size_t layer) const {
    return std::span<const double>(values_).subspan(layout_.layer_bias_offset(layer),
                                                    4 * config_.hidden_dim);
}
std::span<double> ParameterBlocks::forget_bias(std::size_t layer) {
    return layer_bias(layer).subspan(config_.hidden_dim, config_.hidden_dim);
}
std::span<const double> ParameterBlocks::forget_bias(std::size_t layer) const {
    return layer_bias(layer).subspan(config_.hidden_dim, config_.hidden_dim);
}
std::span<double> ParameterBlocks::head_weights() {
    return std::span<double>(values_).subspan(layout_.head_weight_offset(), config_.hidden_dim);
}
std::span<const double> ParameterBlocks::head_weights() const {
    return std::span<const double>(values_).subspan(layout_.head_weight_offset(), config_.hidden_dim);
}

void ParameterBlocks::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

ParameterSet ParameterSet::unflatten(const ModelConfig& config, std::span<const double> flat) {
    return ParameterSet(config, std::vector<double>(flat.begin(), flat.end()));
}

double GradientSet::global_norm() const {
    double s = 0.0;
    for (double g : values()) s += g * g;
    return std::sqrt(s);
}

void GradientSet::scale(double factor) {
    for (double& g : values()) g *= factor;
}

void GradientSet::zero_representation() {
    auto rep = representation();
    std::fill(rep.begin(), rep.end(), 0.0);
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);
}

std::uint64_t representation_hash(const ParameterBlocks& params) {
    std::uint64_t h = 1469598103934665603ULL;
    const auto rep = params.representation();
    const auto* bytes = reinterpret_cast<const unsigned char*>(rep.data());
    for (std::size_t i = 0; i < rep.size_bytes(); ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[std::size_t(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

namespace {

constexpr std::uint64_t kRepresentationStream = 0x5EEDu;
constexpr std::uint64_t kHeadStream = 0x4EADu;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream)};
    return std::mt19937_64(seq);
}

void draw_head(ParameterSet& params, std::uint64_t seed) {
    const double bound = 1.0 / std::sqrt(double(params.config().hidden_dim));
    auto rng = stream_rng(seed, kHeadStream);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : params.head_weights()) w = dist(rng);
    params.head_bias() = 0.0;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_window(const ModelConfig& config, ConstMatrixView window) {
    if (window.rows != config.sequence_length) {
        throw ShapeError("window rows (sequence_length)", config.sequence_length, window.rows);
    }
    if (window.cols != config.input_dim()) {
        throw ShapeError("window columns (input_dim)", config.input_dim(), window.cols);
    }
    if (window.data.size() != window.rows * window.cols) {
        throw ShapeError("window storage", window.rows * window.cols, window.data.size());
    }
    for (double v : window.data) {
        if (!std::isfinite(v)) throw NumericalError("forward: window contains a non-finite entry");
    }
}

}  // namespace

ParameterSet init_parameters(const ModelConfig& config, std::uint64_t seed) {
    ParameterSet params(config);
    const std::size_t hidden = config.hidden_dim;
    const double bound = 1.0 / std::sqrt(double(hidden));
    auto rng = stream_rng(seed, kRepresentationStream);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t l = 0; l < config.num_layers; ++l) {
        for (double& w : params.layer_weights(l)) w = dist(rng);
        auto bias = params.layer_bias(l);
        std::fill(bias.begin(), bias.end(), 0.0);
        auto fb = params.forget_bias(l);
        std::fill(fb.begin(), fb.end(), 1.0);
    }
    draw_head(params, seed);
    return params;
}

ParameterSet swap_head(const ParameterSet& params, std::uint64_t seed) {
    ParameterSet out = params;
    draw_head(out, seed);
    return out;
}

std::span<const double> ForwardTrace::final_hidden() const {
    if (layers.empty() || steps == 0) return {};
    const std::size_t h = config.hidden_dim;
    return std::span<const double>(layers.back().hidden).subspan((steps - 1) * h, h);
}

double forward_into(const ParameterSet& params, ConstMatrixView window, ForwardTrace& trace) {
    const ModelConfig& config = params.config();
    check_window(config, window);
    const auto& k = kernels::active();
    const std::size_t steps = config.sequence_length;
    const std::size_t hidden = config.hidden_dim;

    trace.config = config;
    trace.steps = steps;
    trace.layers.resize(config.num_layers);

    for (std::size_t l = 0; l < config.num_layers; ++l) {
        const std::size_t in = params.layout().layer_input_dim(l);
        const std::size_t width = in + hidden;
        LayerTrace& lt = trace.layers[l];
        lt.inputs.assign(steps * width, 0.0);
        lt.gates.assign(steps * 4 * hidden, 0.0);
        lt.cells.assign(steps * hidden, 0.0);
        lt.cell_tanh.assign(steps * hidden, 0.0);
        lt.hidden.assign(steps * hidden, 0.0);
        const auto w = params.layer_weights(l);
        const auto b = params.layer_bias(l);

        for (std::size_t t = 0; t < steps; ++t) {
            double* a = lt.inputs.data() + t * width;
            const double* x = (l == 0) ? window.data.data() + t * window.cols
                                       : trace.layers[l - 1].hidden.data() + t * hidden;
            std::copy(x, x + in, a);
            if (t > 0) {
                const double* hp = lt.hidden.data() + (t - 1) * hidden;
                std::copy(hp, hp + hidden, a + in);
            }
            double* z = lt.gates.data() + t * 4 * hidden;
            k.gemv(w.data(), 4 * hidden, width, a, b.data(), z);

            const double* c_prev = t > 0 ? lt.cells.data() + (t - 1) * hidden : nullptr;
            double* c = lt.cells.data() + t * hidden;
            double* ct = lt.cell_tanh.data() + t * hidden;
            double* h = lt.hidden.data() + t * hidden;
            for (std::size_t j = 0; j < hidden; ++j) {
                const double ig = sigmoid(z[j]);
                const double fg = sigmoid(z[hidden + j]);
                const double gg = std::tanh(z[2 * hidden + j]);
                const double og = sigmoid(z[3 * hidden + j]);
                z[j] = ig;
                z[hidden + j] = fg;
                z[2 * hidden + j] = gg;
                z[3 * hidden + j] = og;
                c[j] = fg * (c_prev ? c_prev[j] : 0.0) + ig * gg;
                ct[j] = std::tanh(c[j]);
                h[j] = og * ct[j];
            }
        }
    }
    trace.prediction = replay_prediction(params, trace);
    return trace.prediction;
}

ForwardResult forward(const ParameterSet& params, ConstMatrixView window) {
    ForwardResult result{0.0, {}};
    result.prediction = forward_into(params, window, result.trace);
    return result;
}

double replay_prediction(const ParameterSet& params, const ForwardTrace& trace) {
    const auto h = trace.final_hidden();
    if (h.size() != params.config().hidden_dim) {
        throw ShapeError("trace hidden state", params.config().hidden_dim, h.size());
    }
    return kernels::active().dot(params.head_weights().data(), h.data(), h.size()) + params.head_bias();
}

void backward_accumulate(const ParameterSet& params, const ForwardTrace& trace, double d_prediction,
                         GradientSet& grads, BackwardWorkspace& ws) {
    const ModelConfig& config = params.config();
    if (!(trace.config == config) || trace.layers.size() != config.num_layers ||
        trace.steps != config.sequence_length) {
        throw ShapeError("trace layers/steps", config.num_layers * config.sequence_length,
                         trace.layers.size() * trace.steps);
    }
    if (!(grads.config() == config)) {
        throw ShapeError("gradient set size", params.size(), grads.size());
    }
    const auto& k = kernels::active();
    const std::size_t steps = trace.steps;
    const std::size_t hidden = config.hidden_dim;

    // Head: prediction = w . h_T + b.
    const auto h_final = trace.final_hidden();
    k.axpy(d_prediction, h_final.data(), grads.head_weights().data(), hidden);
    grads.head_bias() += d_prediction;

    ws.dh_external.assign(steps * hidden, 0.0);
    k.axpy(d_prediction, params.head_weights().data(), ws.dh_external.data() + (steps - 1) * hidden,
           hidden);

    ws.dh_next.resize(hidden);
    ws.dc_next.resize(hidden);
    ws.dz.resize(4 * hidden);

    for (std::size_t l = config.num_layers; l-- > 0;) {
        const std::size_t in = params.layout().layer_input_dim(l);
        const std::size_t width = in + hidden;
        const LayerTrace& lt = trace.layers[l];
        const auto w = params.layer_weights(l);
        auto dw = grads.layer_weights(l);
        auto db = grads.layer_bias(l);
        const bool need_below = l > 0;
        if (need_below) ws.dh_below.assign(steps * in, 0.0);
        ws.da.resize(width);
        std::fill(ws.dh_next.begin(), ws.dh_next.end(), 0.0);
        std::fill(ws.dc_next.begin(), ws.dc_next.end(), 0.0);

        for (std::size_t t = steps; t-- > 0;) {
            const double* gates = lt.gates.data() + t * 4 * hidden;
            const double* ct = lt.cell_tanh.data() + t * hidden;
            const double* c_prev = t > 0 ? lt.cells.data() + (t - 1) * hidden : nullptr;
            const double* dh_ext = ws.dh_external.data() + t * hidden;
            for (std::size_t j = 0; j < hidden; ++j) {
                const double ig = gates[j];
                const double fg = gates[hidden + j];
                const double gg = gates[2 * hidden + j];
                const double og = gates[3 * hidden + j];
                const double dh = dh_ext[j] + ws.dh_next[j];
                const double d_o = dh * ct[j];
                const double dc = ws.dc_next[j] + dh * og * (1.0 - ct[j] * ct[j]);
                const double d_i = dc * gg;
                const double d_g = dc * ig;
                const double d_f = dc * (c_prev ? c_prev[j] : 0.0);
                ws.dc_next[j] = dc * fg;
                ws.dz[j] = d_i * ig * (1.0 - ig);
                ws.dz[hidden + j] = d_f * fg * (1.0 - fg);
                ws.dz[2 * hidden + j] = d_g * (1.0 - gg * gg);
                ws.dz[3 * hidden + j] = d_o * og * (1.0 - og);
            }
            const double* a = lt.inputs.data() + t * width;
            k.rank1_acc(dw.data(), 4 * hidden, width, ws.dz.data(), a);
            k.axpy(1.0, ws.dz.data(), db.data(), 4 * hidden);

            std::fill(ws.da.begin(), ws.da.end(), 0.0);
            k.gemv_t_acc(w.data(), 4 * hidden, width, ws.dz.data(), ws.da.data());
            if (need_below) std::copy(ws.da.begin(), ws.da.begin() + std::ptrdiff_t(in),
                                      ws.dh_below.begin() + std::ptrdiff_t(t * in));
            std::copy(ws.da.begin() + std::ptrdiff_t(in), ws.da.end(), ws.dh_next.begin());
        }
        if (need_below) ws.dh_external.swap(ws.dh_below);
    }
}

GradientSet backward(const ParameterSet& params, const ForwardTrace& trace, double d_prediction) {
    GradientSet grads(params.config());
    BackwardWorkspace ws;
    backward_accumulate(params, trace, d_prediction, grads, ws);
    return grads;
}

}  // namespace streamflow
