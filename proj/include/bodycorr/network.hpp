#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bodycorr/io.hpp"
#include "bodycorr/layers.hpp"
#include "bodycorr/random.hpp"
#include "bodycorr/tensor.hpp"

namespace bodycorr {

enum class LayerKind { Conv, Pool, Lrn, Relu, Interleave, Upsample };

struct LayerSpec {
    LayerKind kind;
    int out_channels = 0;  // Conv: filter count; Upsample: descriptor dim
    int kernel = 0;
    int stride = 1;
    int factor = 1;  // Upsample resolution factor
};

// Architecture and training hyperparameters for the descriptor tower. The
// schedule must downsample and then restore the input resolution exactly.
struct NetConfig {
    int input_height = 64;
    int input_width = 64;
    int descriptor_dim = 8;
    std::vector<LayerSpec> layers;
    LrnConfig lrn;
    double learning_rate = 0.05;
    double momentum = 0.5;
    // Step decay: the rate is multiplied by lr_decay at 70% and again at 90%
    // of the run (1.0 disables it).
    double lr_decay = 0.1;
    int batch_size = 128;
    int iterations = 4000;
    int log_every = 50;
    double keypoint_radius = 2.0;  // pixels around a projected keypoint that are supervised
    std::uint64_t rng_seed = 1;

    // Small tower for 64x64 scans: conv-pool-conv-conv-interleave-upsample.
    static NetConfig desk(int resolution = 64, int d = 8) {
        NetConfig cfg;
        cfg.input_height = cfg.input_width = resolution;
        cfg.descriptor_dim = d;
        cfg.layers = {
            {LayerKind::Conv, 16, 5, 2}, {LayerKind::Relu},
            {LayerKind::Pool},           {LayerKind::Lrn},
            {LayerKind::Conv, 32, 3, 1}, {LayerKind::Relu},
            {LayerKind::Conv, 32, 1, 1}, {LayerKind::Relu},
            {LayerKind::Interleave},     {LayerKind::Upsample, d, 3, 1, 2},
            {LayerKind::Relu},
        };
        cfg.validate();
        return cfg;
    }

    // Full-scale 512x512 / d=16 schedule with the AlexNet-derived tower.
    // Documentation-grade: constructible and shape-checked, but far too heavy
    // for the test suite to train.
    static NetConfig paper() {
        NetConfig cfg;
        cfg.input_height = cfg.input_width = 512;
        cfg.descriptor_dim = 16;
        cfg.layers = {
            {LayerKind::Conv, 96, 11, 4},  {LayerKind::Relu},
            {LayerKind::Pool},             {LayerKind::Lrn},
            {LayerKind::Conv, 256, 5, 1},  {LayerKind::Relu},
            {LayerKind::Pool},             {LayerKind::Lrn},
            {LayerKind::Conv, 384, 3, 1},  {LayerKind::Relu},
            {LayerKind::Conv, 384, 3, 1},  {LayerKind::Relu},
            {LayerKind::Conv, 256, 3, 1},  {LayerKind::Relu},
            {LayerKind::Pool},
            {LayerKind::Conv, 4096, 1, 1}, {LayerKind::Relu},
            {LayerKind::Conv, 4096, 1, 1}, {LayerKind::Relu},
            {LayerKind::Interleave},       {LayerKind::Upsample, 16, 3, 1, 4},
            {LayerKind::Relu},
        };
        cfg.batch_size = 128;
        cfg.iterations = 200000;
        cfg.validate();
        return cfg;
    }

    struct SimShape {
        int copies = 1, c = 1, h = 0, w = 0, scale = 1;
    };

    // Walks the schedule symbolically; throws if any step is inconsistent or
    // the output resolution differs from the input.
    SimShape simulate() const {
        if (descriptor_dim < 2) throw std::invalid_argument("net: descriptor_dim must be >= 2");
        SimShape s;
        s.h = input_height;
        s.w = input_width;
        for (const LayerSpec& layer : layers) {
            switch (layer.kind) {
                case LayerKind::Conv: {
                    if (layer.out_channels < 1 || layer.kernel < 1 || layer.stride < 1) {
                        throw std::invalid_argument("net: bad conv spec");
                    }
                    s.h = (s.h + layer.stride - 1) / layer.stride;
                    s.w = (s.w + layer.stride - 1) / layer.stride;
                    s.c = layer.out_channels;
                    break;
                }
                case LayerKind::Pool:
                    if (s.h % 2 != 0 || s.w % 2 != 0) {
                        throw std::invalid_argument("net: pool input must have even dims");
                    }
                    s.h /= 2;
                    s.w /= 2;
                    s.copies *= 4;
                    s.scale *= 2;
                    break;
                case LayerKind::Lrn:
                case LayerKind::Relu:
                    break;
                case LayerKind::Interleave:
                    s.h *= s.scale;
                    s.w *= s.scale;
                    s.copies = 1;
                    s.scale = 1;
                    break;
                case LayerKind::Upsample:
                    if (layer.out_channels != descriptor_dim) {
                        throw std::invalid_argument("net: upsample must emit descriptor_dim channels");
                    }
                    if (s.copies != 1) {
                        throw std::invalid_argument("net: upsample requires interleaved input");
                    }
                    s.h *= layer.factor;
                    s.w *= layer.factor;
                    s.c = descriptor_dim;
                    break;
            }
        }
        if (s.h != input_height || s.w != input_width || s.c != descriptor_dim || s.copies != 1) {
            throw std::invalid_argument("net: schedule does not restore the input resolution");
        }
        return s;
    }

    void validate() const { (void)simulate(); }

    std::string serialize() const {
        std::ostringstream out;
        out << "input " << input_height << 'x' << input_width << " d " << descriptor_dim
            << " lrn " << lrn.window << ' ' << lrn.alpha << ' ' << lrn.beta << ' ' << lrn.k
            << " lr " << learning_rate << " momentum " << momentum << " decay " << lr_decay
            << " batch " << batch_size
            << " iters " << iterations << " seed " << rng_seed << " kp_radius "
            << keypoint_radius << "\n";
        for (const LayerSpec& layer : layers) {
            out << static_cast<int>(layer.kind) << ' ' << layer.out_channels << ' '
                << layer.kernel << ' ' << layer.stride << ' ' << layer.factor << "\n";
        }
        return out.str();
    }

    std::uint64_t hash() const { return fnv1a_hash(serialize()); }
};

// Shared descriptor extraction tower. Parameter slots are indexed by layer;
// non-parametric layers keep empty tensors.
template <typename Scalar>
class Tower {
public:
    Tower() = default;
    explicit Tower(NetConfig config) : config_(std::move(config)) {
        config_.validate();
        weights_.resize(config_.layers.size());
        biases_.resize(config_.layers.size());
        int channels = 1;
        for (size_t i = 0; i < config_.layers.size(); ++i) {
            const LayerSpec& layer = config_.layers[i];
            if (layer.kind == LayerKind::Conv) {
                weights_[i].resize(layer.out_channels, channels, layer.kernel, layer.kernel);
                biases_[i].setZero(layer.out_channels);
                channels = layer.out_channels;
            } else if (layer.kind == LayerKind::Upsample) {
                const int packed = layer.out_channels * layer.factor * layer.factor;
                weights_[i].resize(packed, channels, 3, 3);
                biases_[i].setZero(packed);
                channels = layer.out_channels;
            }
        }
    }

    // Gaussian fan-in initialization for convolutions; the upsampling layer
    // starts as bilinear interpolation.
    void init(RandomStream& rng) {
        for (size_t i = 0; i < config_.layers.size(); ++i) {
            const LayerSpec& layer = config_.layers[i];
            if (layer.kind == LayerKind::Conv) {
                const double stddev =
                    1.0 / std::sqrt(static_cast<double>(weights_[i].c) * layer.kernel * layer.kernel);
                for (Eigen::Index j = 0; j < weights_[i].data.size(); ++j) {
                    weights_[i].data[j] = Scalar(rng.normal() * stddev);
                }
                biases_[i].setZero();
            } else if (layer.kind == LayerKind::Upsample) {
                upsample_bilinear_init(weights_[i], layer.factor);
                biases_[i].setZero();
            }
        }
    }

    struct Cache {
        std::vector<Tensor<Scalar>> inputs;   // input tensor of each layer
        std::vector<PhaseMap> phases;         // phase map before each layer
        std::vector<PoolResult<Scalar>> pools;  // filled only at pool layers
        Tensor<Scalar> output;
    };

    Tensor<Scalar> forward(const Tensor<Scalar>& input, Cache* cache = nullptr) const {
        if (input.h != config_.input_height || input.w != config_.input_width || input.c != 1 ||
            input.n != 1) {
            throw std::invalid_argument("tower: input resolution mismatch, got " +
                                        input.shape_string());
        }
        Tensor<Scalar> current = input;
        PhaseMap phase;
        if (cache != nullptr) {
            cache->inputs.assign(config_.layers.size(), {});
            cache->phases.assign(config_.layers.size(), {});
            cache->pools.assign(config_.layers.size(), {});
        }
        for (size_t i = 0; i < config_.layers.size(); ++i) {
            const LayerSpec& layer = config_.layers[i];
            if (cache != nullptr) {
                cache->inputs[i] = current;
                cache->phases[i] = phase;
            }
            switch (layer.kind) {
                case LayerKind::Conv:
                    current = conv2d(current, weights_[i], biases_[i], layer.stride);
                    break;
                case LayerKind::Pool: {
                    auto pooled = maxpool_all_offsets(current, phase);
                    phase = pooled.phase;
                    current = pooled.output;
                    if (cache != nullptr) cache->pools[i] = std::move(pooled);
                    break;
                }
                case LayerKind::Lrn:
                    current = lrn(current, config_.lrn);
                    break;
                case LayerKind::Relu:
                    current = relu(current);
                    break;
                case LayerKind::Interleave:
                    current = interleave(current, phase);
                    phase = PhaseMap{};
                    break;
                case LayerKind::Upsample:
                    current = upsample3x3(current, weights_[i], biases_[i], layer.factor);
                    break;
            }
            check_finite(current, "tower layer");
        }
        if (cache != nullptr) cache->output = current;
        return current;
    }

    struct Grads {
        std::vector<Tensor<Scalar>> weights;
        std::vector<Eigen::Array<Scalar, Eigen::Dynamic, 1>> biases;
    };

    Grads zero_grads() const {
        Grads grads;
        grads.weights.resize(weights_.size());
        grads.biases.resize(biases_.size());
        for (size_t i = 0; i < weights_.size(); ++i) {
            grads.weights[i].resize(weights_[i].n, weights_[i].c, weights_[i].h, weights_[i].w);
            grads.biases[i].setZero(biases_[i].size());
        }
        return grads;
    }

    // Accumulates parameter gradients into `grads`; returns nothing for the
    // input since the image is not learned.
    void backward(const Cache& cache, const Tensor<Scalar>& grad_output, Grads& grads) const {
        Tensor<Scalar> grad = grad_output;
        for (int i = static_cast<int>(config_.layers.size()) - 1; i >= 0; --i) {
            const LayerSpec& layer = config_.layers[static_cast<size_t>(i)];
            const Tensor<Scalar>& input = cache.inputs[static_cast<size_t>(i)];
            switch (layer.kind) {
                case LayerKind::Conv: {
                    auto g = conv2d_backward(input, weights_[static_cast<size_t>(i)], grad,
                                             layer.stride);
                    grads.weights[static_cast<size_t>(i)].data += g.weights.data;
                    grads.biases[static_cast<size_t>(i)] += g.bias;
                    grad = std::move(g.input);
                    break;
                }
                case LayerKind::Pool:
                    grad = maxpool_all_offsets_backward(input, cache.pools[static_cast<size_t>(i)],
                                                        grad);
                    break;
                case LayerKind::Lrn:
                    grad = lrn_backward(input, grad, config_.lrn);
                    break;
                case LayerKind::Relu:
                    grad = relu_backward(input, grad);
                    break;
                case LayerKind::Interleave:
                    grad = interleave_backward(input, cache.phases[static_cast<size_t>(i)], grad);
                    break;
                case LayerKind::Upsample: {
                    auto g = upsample3x3_backward(input, weights_[static_cast<size_t>(i)], grad,
                                                  layer.factor);
                    grads.weights[static_cast<size_t>(i)].data += g.weights.data;
                    grads.biases[static_cast<size_t>(i)] += g.bias;
                    grad = std::move(g.input);
                    break;
                }
            }
        }
    }

    const NetConfig& config() const { return config_; }
    std::vector<Tensor<Scalar>>& weights() { return weights_; }
    const std::vector<Tensor<Scalar>>& weights() const { return weights_; }
    std::vector<Eigen::Array<Scalar, Eigen::Dynamic, 1>>& biases() { return biases_; }
    const std::vector<Eigen::Array<Scalar, Eigen::Dynamic, 1>>& biases() const { return biases_; }

private:
    NetConfig config_;
    std::vector<Tensor<Scalar>> weights_;
    std::vector<Eigen::Array<Scalar, Eigen::Dynamic, 1>> biases_;
};

// Per-task classification head; rows of `weight` are the representative
// descriptors of the classes, and logits are plain dot products.
template <typename Scalar>
struct Head {
    std::string name;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weight;  // classes x d

    int classes() const { return static_cast<int>(weight.rows()); }
};

template <typename Scalar>
struct NetworkParams {
    Tower<Scalar> tower;
    std::vector<Head<Scalar>> heads;

    void init_heads(RandomStream& rng) {
        const double stddev = 1.0 / std::sqrt(static_cast<double>(tower.config().descriptor_dim));
        for (Head<Scalar>& head : heads) {
            for (Eigen::Index i = 0; i < head.weight.size(); ++i) {
                head.weight.data()[i] = Scalar(rng.normal() * stddev);
            }
        }
    }
};

namespace detail {

inline void put_bytes(std::vector<char>& out, const void* src, size_t len) {
    const size_t at = out.size();
    out.resize(at + len);
    std::memcpy(out.data() + at, src, len);
}

template <typename T>
void put_pod(std::vector<char>& out, T value) {
    put_bytes(out, &value, sizeof(T));
}

}  // namespace detail

// Checkpoint: "BCKP" magic, version, config hash, then named arrays
// (name length, name, rank, dims, float64 payload), all little-endian.
template <typename Scalar>
void save_checkpoint(const NetworkParams<Scalar>& params, const std::string& path) {
    std::vector<char> out;
    detail::put_bytes(out, "BCKP", 4);
    detail::put_pod<std::uint32_t>(out, 1);
    detail::put_pod<std::uint64_t>(out, params.tower.config().hash());

    struct NamedArray {
        std::string name;
        std::vector<std::uint32_t> dims;
        std::vector<double> values;
    };
    std::vector<NamedArray> arrays;
    const auto& layers = params.tower.config().layers;
    for (size_t i = 0; i < layers.size(); ++i) {
        const auto& w = params.tower.weights()[i];
        if (w.size() == 0) continue;
        NamedArray wa;
        wa.name = "tower.layer" + std::to_string(i) + ".weight";
        wa.dims = {static_cast<std::uint32_t>(w.n), static_cast<std::uint32_t>(w.c),
                   static_cast<std::uint32_t>(w.h), static_cast<std::uint32_t>(w.w)};
        wa.values.assign(w.data.data(), w.data.data() + w.data.size());
        arrays.push_back(std::move(wa));
        const auto& b = params.tower.biases()[i];
        NamedArray ba;
        ba.name = "tower.layer" + std::to_string(i) + ".bias";
        ba.dims = {static_cast<std::uint32_t>(b.size())};
        ba.values.assign(b.data(), b.data() + b.size());
        arrays.push_back(std::move(ba));
    }
    for (size_t hidx = 0; hidx < params.heads.size(); ++hidx) {
        const auto& head = params.heads[hidx];
        NamedArray ha;
        ha.name = "head." + head.name + ".weight";
        ha.dims = {static_cast<std::uint32_t>(head.weight.rows()),
                   static_cast<std::uint32_t>(head.weight.cols())};
        ha.values.reserve(static_cast<size_t>(head.weight.size()));
        for (Eigen::Index r = 0; r < head.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < head.weight.cols(); ++c)
                ha.values.push_back(static_cast<double>(head.weight(r, c)));
        arrays.push_back(std::move(ha));
    }

    detail::put_pod<std::uint32_t>(out, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& a : arrays) {
        detail::put_pod<std::uint32_t>(out, static_cast<std::uint32_t>(a.name.size()));
        detail::put_bytes(out, a.name.data(), a.name.size());
        detail::put_pod<std::uint32_t>(out, static_cast<std::uint32_t>(a.dims.size()));
        for (auto d : a.dims) detail::put_pod(out, d);
        detail::put_bytes(out, a.values.data(), a.values.size() * sizeof(double));
    }
    atomic_write_bytes(path, out);
}

// Loads a checkpoint into params constructed with the same config; throws on a
// config-hash mismatch or missing arrays.
template <typename Scalar>
void load_checkpoint(NetworkParams<Scalar>& params, const std::string& path,
                     std::vector<std::string>* head_names = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    size_t at = 0;
    auto need = [&](size_t len) {
        if (at + len > bytes.size()) throw std::runtime_error("checkpoint: truncated " + path);
    };
    need(4);
    if (std::memcmp(bytes.data(), "BCKP", 4) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path);
    }
    at = 4;
    auto take_u32 = [&]() {
        need(4);
        std::uint32_t v;
        std::memcpy(&v, bytes.data() + at, 4);
        at += 4;
        return v;
    };
    auto take_u64 = [&]() {
        need(8);
        std::uint64_t v;
        std::memcpy(&v, bytes.data() + at, 8);
        at += 8;
        return v;
    };
    const std::uint32_t version = take_u32();
    if (version != 1) throw std::runtime_error("checkpoint: unsupported version");
    const std::uint64_t hash = take_u64();
    if (hash != params.tower.config().hash()) {
        throw std::runtime_error("checkpoint: config hash mismatch for " + path);
    }

    const std::uint32_t count = take_u32();
    std::vector<Head<Scalar>> heads;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = take_u32();
        need(name_len);
        std::string name(bytes.data() + at, name_len);
        at += name_len;
        const std::uint32_t rank = take_u32();
        std::vector<std::uint32_t> dims(rank);
        std::size_t total = 1;
        for (auto& d : dims) {
            d = take_u32();
            total *= d;
        }
        need(total * sizeof(double));
        std::vector<double> values(total);
        std::memcpy(values.data(), bytes.data() + at, total * sizeof(double));
        at += total * sizeof(double);

        if (name.rfind("tower.layer", 0) == 0) {
            const size_t dot = name.find('.', 11);
            const size_t layer = std::stoul(name.substr(11, dot - 11));
            const std::string field = name.substr(dot + 1);
            if (field == "weight") {
                auto& w = params.tower.weights().at(layer);
                if (static_cast<size_t>(w.data.size()) != total) {
                    throw std::runtime_error("checkpoint: shape mismatch for " + name);
                }
                for (size_t j = 0; j < total; ++j) w.data[static_cast<Eigen::Index>(j)] = Scalar(values[j]);
            } else {
                auto& b = params.tower.biases().at(layer);
                if (static_cast<size_t>(b.size()) != total) {
                    throw std::runtime_error("checkpoint: shape mismatch for " + name);
                }
                for (size_t j = 0; j < total; ++j) b[static_cast<Eigen::Index>(j)] = Scalar(values[j]);
            }
        } else if (name.rfind("head.", 0) == 0 && name.size() > 12 &&
                   name.substr(name.size() - 7) == ".weight") {
            Head<Scalar> head;
            head.name = name.substr(5, name.size() - 12);
            if (dims.size() != 2) throw std::runtime_error("checkpoint: bad head rank");
            head.weight.resize(dims[0], dims[1]);
            size_t j = 0;
            for (std::uint32_t r = 0; r < dims[0]; ++r)
                for (std::uint32_t c = 0; c < dims[1]; ++c, ++j)
                    head.weight(r, c) = Scalar(values[j]);
            heads.push_back(std::move(head));
        } else {
            throw std::runtime_error("checkpoint: unknown array " + name);
        }
    }
    params.heads = std::move(heads);
    if (head_names != nullptr) {
        head_names->clear();
        for (const auto& head : params.heads) head_names->push_back(head.name);
    }
}

}  // namespace bodycorr
