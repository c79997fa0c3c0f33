#pragma once

// Stacked LSTM sequence-to-one regressor.
//
// Parameters live in one flat vector: every LSTM layer's gate matrix and
// bias first (the "representation"), then the affine regression head. Each
// layer's gate matrix is (4H x (in + H)) row-major and multiplies the
// concatenation [x_t, h_{t-1}]; gate row blocks are ordered input, forget,
// cell candidate, output.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace streamflow {

struct ModelConfig {
    std::size_t dynamic_dim = 4;
    std::size_t static_dim = 0;
    std::size_t hidden_dim = 128;
    std::size_t num_layers = 1;
    std::size_t sequence_length = 270;
    bool use_static = false;

    /// Width of one window row: dynamic features, then static attributes when enabled.
    std::size_t input_dim() const { return use_static ? dynamic_dim + static_dim : dynamic_dim; }

    /// Throws ConfigError when any dimension is zero or static conditioning
    /// is requested without static attributes.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

/// Offsets of every parameter block inside the flat vector.
class ParameterLayout {
public:
    explicit ParameterLayout(const ModelConfig& config);

    std::size_t layer_input_dim(std::size_t layer) const;
    std::size_t layer_row_width(std::size_t layer) const { return layer_input_dim(layer) + hidden_; }
    std::size_t layer_weight_offset(std::size_t layer) const { return weight_offsets_.at(layer); }
    std::size_t layer_bias_offset(std::size_t layer) const;
    std::size_t representation_size() const { return representation_size_; }
    std::size_t head_weight_offset() const { return representation_size_; }
    std::size_t head_bias_offset() const { return representation_size_ + hidden_; }
    std::size_t total_size() const { return representation_size_ + hidden_ + 1; }

    /// Human-readable block name for a flat index, e.g. "layer1.bias" or "head.weights".
    std::string block_name(std::size_t flat_index) const;

private:
    std::size_t input_;
    std::size_t hidden_;
    std::size_t layers_;
    std::vector<std::size_t> weight_offsets_;
    std::size_t representation_size_ = 0;
};

/// Flat parameter-shaped storage with named block views. Shared by
/// ParameterSet and GradientSet, which are deliberately distinct types.
class ParameterBlocks {
public:
    const ModelConfig& config() const { return config_; }
    const ParameterLayout& layout() const { return layout_; }
    std::size_t size() const { return values_.size(); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    std::span<double> representation();
    std::span<const double> representation() const;
    std::span<double> head();
    std::span<const double> head() const;

    std::span<double> layer_weights(std::size_t layer);
    std::span<const double> layer_weights(std::size_t layer) const;
    std::span<double> layer_bias(std::size_t layer);
    std::span<const double> layer_bias(std::size_t layer) const;
    std::span<double> forget_bias(std::size_t layer);
    std::span<const double> forget_bias(std::size_t layer) const;
    std::span<double> head_weights();
    std::span<const double> head_weights() const;
    double& head_bias() { return values_[layout_.head_bias_offset()]; }
    double head_bias() const { return values_[layout_.head_bias_offset()]; }

    void fill(double v);

protected:
    explicit ParameterBlocks(const ModelConfig& config);
    ParameterBlocks(const ModelConfig& config, std::vector<double> flat);

private:
    ModelConfig config_;
    ParameterLayout layout_;
    std::vector<double> values_;
};

class ParameterSet : public ParameterBlocks {
public:
    /// Zero-filled parameters for `config` (validated).
    explicit ParameterSet(const ModelConfig& config) : ParameterBlocks(config) {}

    std::vector<double> flatten() const { return {values().begin(), values().end()}; }
    /// Inverse of flatten; throws ShapeError if the length disagrees with the layout.
    static ParameterSet unflatten(const ModelConfig& config, std::span<const double> flat);

private:
    ParameterSet(const ModelConfig& config, std::vector<double> flat)
        : ParameterBlocks(config, std::move(flat)) {}
};

class GradientSet : public ParameterBlocks {
public:
    explicit GradientSet(const ModelConfig& config) : ParameterBlocks(config) {}

    /// Euclidean norm over every block.
    double global_norm() const;
    void scale(double factor);
    void zero_representation();
};

/// Bitwise comparison (distinguishes -0.0 from 0.0, equal NaN payloads match).
bool bitwise_equal(std::span<const double> a, std::span<const double> b);

/// FNV-1a over the raw bytes of the representation block.
std::uint64_t representation_hash(const ParameterBlocks& params);
std::string hash_hex(std::uint64_t h);

/// Read-only row-major matrix view (one window: rows = timesteps).
struct ConstMatrixView {
    std::span<const double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const double> row(std::size_t r) const { return data.subspan(r * cols, cols); }
};

struct LayerTrace {
    std::vector<double> inputs;     // T x (in + H): [x_t, h_{t-1}]
    std::vector<double> gates;      // T x 4H, post-activation
    std::vector<double> cells;      // T x H
    std::vector<double> cell_tanh;  // T x H
    std::vector<double> hidden;     // T x H
};

/// Everything forward computed, enough to run BPTT and to replay the readout.
struct ForwardTrace {
    ModelConfig config;
    std::size_t steps = 0;
    std::vector<LayerTrace> layers;
    double prediction = 0.0;

    std::span<const double> final_hidden() const;
};

struct ForwardResult {
    double prediction;
    ForwardTrace trace;
};

/// Deterministic initialisation: weights ~ U[-1/sqrt(H), 1/sqrt(H)], forget
/// biases 1, all other biases 0. Head weights come from their own seeded
/// stream so that swap_head with the same seed reproduces them.
ParameterSet init_parameters(const ModelConfig& config, std::uint64_t seed);

/// Replaces the head with a fresh draw from the init distribution; the
/// representation is copied bit for bit.
ParameterSet swap_head(const ParameterSet& params, std::uint64_t seed);

ForwardResult forward(const ParameterSet& params, ConstMatrixView window);
/// Same as forward, reusing the trace's storage. Returns the prediction.
double forward_into(const ParameterSet& params, ConstMatrixView window, ForwardTrace& trace);
/// Head applied to the trace's final top-layer hidden state.
double replay_prediction(const ParameterSet& params, const ForwardTrace& trace);

/// Scratch buffers for backward_accumulate.
struct BackwardWorkspace {
    std::vector<double> dh_external;
    std::vector<double> dh_below;
    std::vector<double> dh_next;
    std::vector<double> dc_next;
    std::vector<double> dz;
    std::vector<double> da;
};

/// d(prediction)/d(theta) * d_prediction through the full window.
GradientSet backward(const ParameterSet& params, const ForwardTrace& trace, double d_prediction);
/// Adds d(prediction)/d(theta) * d_prediction into `grads`.
void backward_accumulate(const ParameterSet& params, const ForwardTrace& trace, double d_prediction,
                         GradientSet& grads, BackwardWorkspace& ws);

}  // namespace streamflow
