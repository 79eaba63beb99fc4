#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bodycorr/network.hpp"
#include "bodycorr/render.hpp"

namespace bodycorr {

// One rendered scan prepared for training: normalized depth input, foreground
// pixel list, per-segmentation label grids, and keypoint supervision pixels.
template <typename Scalar>
struct TrainImage {
    Tensor<Scalar> input;                       // (1, 1, H, W)
    std::vector<int> foreground;                // flat pixel indices
    std::vector<Eigen::VectorXi> seg_labels;    // per segmentation, H*W, -1 on background
    std::vector<std::pair<int, int>> keypoint_pixels;  // (flat pixel, keypoint class)
};

template <typename Scalar>
struct Dataset {
    std::vector<TrainImage<Scalar>> images;
    std::vector<int> seg_class_counts;  // classes per dense task
    int keypoint_classes = 0;           // 0 disables the keypoint task

    int seg_count() const { return static_cast<int>(seg_class_counts.size()); }
    bool has_keypoint_task() const {
        if (keypoint_classes == 0) return false;
        for (const auto& image : images) {
            if (!image.keypoint_pixels.empty()) return true;
        }
        return false;
    }
};

// A classification task instance: one head, one image, a supervised pixel set.
template <typename Scalar>
struct TrainTask {
    int head = 0;
    const Tensor<Scalar>* image = nullptr;
    std::vector<std::pair<int, int>> pixels;  // (flat pixel index, class id)
};

template <typename Scalar>
struct EnsembleGrads {
    typename Tower<Scalar>::Grads tower;
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> heads;
};

// Sum of per-task softmax cross-entropies through the shared tower. Tower
// gradients accumulate from every task; each head only sees its own.
template <typename Scalar>
std::pair<Scalar, EnsembleGrads<Scalar>> ensemble_loss(const NetworkParams<Scalar>& params,
                                                       const std::vector<TrainTask<Scalar>>& batch) {
    EnsembleGrads<Scalar> grads;
    grads.tower = params.tower.zero_grads();
    grads.heads.resize(params.heads.size());
    for (size_t h = 0; h < params.heads.size(); ++h) {
        grads.heads[h].setZero(params.heads[h].weight.rows(), params.heads[h].weight.cols());
    }

    const int d = params.tower.config().descriptor_dim;
    Scalar total_loss = 0;
    for (const TrainTask<Scalar>& task : batch) {
        if (task.head < 0 || task.head >= static_cast<int>(params.heads.size())) {
            throw std::invalid_argument("ensemble_loss: unknown task head");
        }
        if (task.image == nullptr || task.pixels.empty()) {
            throw std::invalid_argument("ensemble_loss: task without image or pixels");
        }
        typename Tower<Scalar>::Cache cache;
        const Tensor<Scalar> descriptors = params.tower.forward(*task.image, &cache);
        const Eigen::Index plane = static_cast<Eigen::Index>(descriptors.h) * descriptors.w;

        const Eigen::Index samples = static_cast<Eigen::Index>(task.pixels.size());
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> columns(d, samples);
        std::vector<int> targets(task.pixels.size());
        for (Eigen::Index s = 0; s < samples; ++s) {
            const auto [pixel, cls] = task.pixels[static_cast<size_t>(s)];
            if (pixel < 0 || pixel >= plane) {
                throw std::invalid_argument("ensemble_loss: pixel index out of range");
            }
            for (int c = 0; c < d; ++c) {
                columns(c, s) = descriptors.data[static_cast<Eigen::Index>(c) * plane + pixel];
            }
            targets[static_cast<size_t>(s)] = cls;
        }

        const Head<Scalar>& head = params.heads[static_cast<size_t>(task.head)];
        const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> logits = head.weight * columns;
        const SoftmaxResult<Scalar> sm = softmax_xent(logits, targets);
        total_loss += sm.loss;

        grads.heads[static_cast<size_t>(task.head)].noalias() += sm.grad * columns.transpose();
        const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> grad_columns =
            head.weight.transpose() * sm.grad;

        Tensor<Scalar> grad_desc(descriptors.n, descriptors.c, descriptors.h, descriptors.w);
        for (Eigen::Index s = 0; s < samples; ++s) {
            const int pixel = task.pixels[static_cast<size_t>(s)].first;
            for (int c = 0; c < d; ++c) {
                grad_desc.data[static_cast<Eigen::Index>(c) * plane + pixel] += grad_columns(c, s);
            }
        }
        params.tower.backward(cache, grad_desc, grads.tower);
    }
    return {total_loss, std::move(grads)};
}

struct LossLogEntry {
    int iteration;
    std::string task;
    double loss;
};

template <typename Scalar>
struct TrainResult {
    NetworkParams<Scalar> params;
    std::vector<LossLogEntry> log;
};

// Optimizer state paired with the parameters it updates.
template <typename Scalar>
struct SgdState {
    typename Tower<Scalar>::Grads velocity;
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> head_velocity;

    static SgdState zero(const NetworkParams<Scalar>& params) {
        SgdState state;
        state.velocity = params.tower.zero_grads();
        state.head_velocity.resize(params.heads.size());
        for (size_t h = 0; h < params.heads.size(); ++h) {
            state.head_velocity[h].setZero(params.heads[h].weight.rows(),
                                           params.heads[h].weight.cols());
        }
        return state;
    }
};

template <typename Scalar>
void apply_sgd(NetworkParams<Scalar>& params, const EnsembleGrads<Scalar>& grads,
               SgdState<Scalar>& state, Scalar lr, Scalar momentum) {
    auto& weights = params.tower.weights();
    auto& biases = params.tower.biases();
    for (size_t i = 0; i < weights.size(); ++i) {
        if (weights[i].size() == 0) continue;
        sgd_step(weights[i].data, grads.tower.weights[i].data, state.velocity.weights[i].data, lr,
                 momentum);
        sgd_step(biases[i], grads.tower.biases[i], state.velocity.biases[i], lr, momentum);
    }
    for (size_t h = 0; h < params.heads.size(); ++h) {
        state.head_velocity[h] = momentum * state.head_velocity[h] - lr * grads.heads[h];
        params.heads[h].weight += state.head_velocity[h];
    }
}

template <typename Scalar>
NetworkParams<Scalar> init_params(const Dataset<Scalar>& dataset, const NetConfig& config) {
    NetworkParams<Scalar> params;
    params.tower = Tower<Scalar>(config);
    RandomStream rng(config.rng_seed);
    params.tower.init(rng);
    for (int s = 0; s < dataset.seg_count(); ++s) {
        Head<Scalar> head;
        head.name = "seg" + std::to_string(s);
        head.weight.resize(dataset.seg_class_counts[static_cast<size_t>(s)], config.descriptor_dim);
        params.heads.push_back(std::move(head));
    }
    if (dataset.has_keypoint_task()) {
        Head<Scalar> head;
        head.name = "keypoints";
        head.weight.resize(dataset.keypoint_classes, config.descriptor_dim);
        params.heads.push_back(std::move(head));
    }
    params.init_heads(rng);
    return params;
}

// Training loop: each iteration samples a task kind (dense labels or
// keypoints), an image, for dense tasks a segmentation, then a batch of
// supervised pixels, and takes one SGD step on the ensemble loss. Fully
// reproducible from config.rng_seed.
template <typename Scalar>
TrainResult<Scalar> train(const Dataset<Scalar>& dataset, const NetConfig& config) {
    if (dataset.images.empty()) throw std::invalid_argument("train: empty dataset");
    for (const auto& image : dataset.images) {
        if (static_cast<int>(image.seg_labels.size()) != dataset.seg_count()) {
            throw std::invalid_argument("train: image segmentation count mismatch");
        }
        if (image.foreground.empty()) throw std::invalid_argument("train: image without foreground");
    }
    const bool keypoint_task = dataset.has_keypoint_task();
    if (!keypoint_task && dataset.seg_count() == 0) {
        throw std::invalid_argument("train: dataset defines no tasks");
    }

    TrainResult<Scalar> result;
    result.params = init_params(dataset, config);
    SgdState<Scalar> state = SgdState<Scalar>::zero(result.params);
    RandomStream rng = RandomStream(config.rng_seed).fork(0x7261696e);  // independent of init
    const int keypoint_head = dataset.seg_count();
    const int n_images = static_cast<int>(dataset.images.size());

    std::vector<int> pool;
    for (int it = 0; it < config.iterations; ++it) {
        // Task kind, then image, then (for dense tasks) a uniform segmentation.
        bool dense = true;
        if (keypoint_task && dataset.seg_count() > 0) {
            dense = rng.uniform_int(2) == 0;
        } else if (keypoint_task) {
            dense = false;
        }
        int image_idx = rng.uniform_int(n_images);
        TrainTask<Scalar> task;
        std::string task_name;
        if (dense) {
            const int seg = rng.uniform_int(dataset.seg_count());
            task.head = seg;
            task_name = "dense:" + std::to_string(seg);
            const TrainImage<Scalar>& image = dataset.images[static_cast<size_t>(image_idx)];
            task.image = &image.input;
            pool = image.foreground;
            const int batch = std::min<int>(config.batch_size, static_cast<int>(pool.size()));
            task.pixels.clear();
            task.pixels.reserve(static_cast<size_t>(batch));
            for (int b = 0; b < batch; ++b) {  // partial Fisher-Yates, no replacement
                const int j = b + rng.uniform_int(static_cast<int>(pool.size()) - b);
                std::swap(pool[static_cast<size_t>(b)], pool[static_cast<size_t>(j)]);
                const int pixel = pool[static_cast<size_t>(b)];
                task.pixels.emplace_back(pixel, image.seg_labels[static_cast<size_t>(seg)][pixel]);
            }
        } else {
            // Walk forward deterministically if the sampled image has no
            // keypoint pixels (rare back views).
            int tries = 0;
            while (dataset.images[static_cast<size_t>(image_idx)].keypoint_pixels.empty()) {
                image_idx = (image_idx + 1) % n_images;
                if (++tries > n_images) {
                    throw std::invalid_argument("train: keypoint task enabled but unsupervised");
                }
            }
            task.head = keypoint_head;
            task_name = "keypoint";
            const TrainImage<Scalar>& image = dataset.images[static_cast<size_t>(image_idx)];
            task.image = &image.input;
            const auto& kp = image.keypoint_pixels;
            const int batch = std::min<int>(config.batch_size, static_cast<int>(kp.size()));
            std::vector<int> order(kp.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
            task.pixels.clear();
            task.pixels.reserve(static_cast<size_t>(batch));
            for (int b = 0; b < batch; ++b) {
                const int j = b + rng.uniform_int(static_cast<int>(order.size()) - b);
                std::swap(order[static_cast<size_t>(b)], order[static_cast<size_t>(j)]);
                task.pixels.push_back(kp[static_cast<size_t>(order[static_cast<size_t>(b)])]);
            }
        }

        double lr = config.learning_rate;
        if (it >= config.iterations * 9 / 10) {
            lr *= config.lr_decay * config.lr_decay;
        } else if (it >= config.iterations * 7 / 10) {
            lr *= config.lr_decay;
        }
        auto [loss, grads] = ensemble_loss(result.params, std::vector<TrainTask<Scalar>>{task});
        apply_sgd(result.params, grads, state, Scalar(lr), Scalar(config.momentum));
        if (it % config.log_every == 0 || it == config.iterations - 1) {
            result.log.push_back({it, task_name, static_cast<double>(loss)});
        }
    }
    return result;
}

// Shared preprocessing: zero-mean foreground depth, zero-filled background.
template <typename Scalar>
Tensor<Scalar> depth_to_input(const DepthImage& image) {
    const DepthImage normalized = normalize_depth(image);
    Tensor<Scalar> input(1, 1, normalized.height, normalized.width);
    for (int y = 0; y < normalized.height; ++y) {
        for (int x = 0; x < normalized.width; ++x) {
            input.at(0, 0, y, x) =
                normalized.foreground(y, x) ? Scalar(normalized.at(y, x)) : Scalar(0);
        }
    }
    return input;
}

void write_loss_log(const std::vector<LossLogEntry>& log, const std::string& path);

}  // namespace bodycorr
