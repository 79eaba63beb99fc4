// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. The desk pipeline run is shared between the criteria that need a
// trained network.
#include <doctest.h>

#include <algorithm>
#include <cstdarg>
#include <map>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "bodycorr/descriptor.hpp"
#include "bodycorr/metrics.hpp"
#include "bodycorr/pipeline.hpp"
#include "bodycorr/render.hpp"
#include "bodycorr/train.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace bodycorr;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void announce(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
}

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

double spearman(const std::vector<std::pair<double, double>>& xy) {
    auto ranks = [](std::vector<double> values) {
        std::vector<int> order(values.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return values[static_cast<size_t>(a)] < values[static_cast<size_t>(b)]; });
        std::vector<double> rank(values.size());
        for (size_t i = 0; i < order.size(); ++i) {
            rank[static_cast<size_t>(order[i])] = static_cast<double>(i);
        }
        return rank;
    };
    std::vector<double> xs, ys;
    xs.reserve(xy.size());
    ys.reserve(xy.size());
    for (const auto& [x, y] : xy) {
        xs.push_back(x);
        ys.push_back(y);
    }
    const std::vector<double> rx = ranks(xs), ry = ranks(ys);
    double mx = 0, my = 0;
    for (size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(rx.size());
    my /= static_cast<double>(ry.size());
    double num = 0, dx = 0, dy = 0;
    for (size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    return num / std::sqrt(dx * dy);
}

// The standard desk run shared by criteria 4 and 7.
struct DeskRun {
    RunConfig config;
    double pipeline_seconds = 0;
    bool ok = false;
};

const DeskRun& desk_run() {
    static DeskRun run = [] {
        DeskRun r;
        r.config = RunConfig::preset_desk();
        r.config.out_dir = (fs::temp_directory_path() / "bodycorr_acceptance" / "desk").string();
        r.config.finalize();
        fs::remove_all(r.config.out_dir);
        const auto start = Clock::now();
        run_all(r.config);
        r.pipeline_seconds = seconds_since(start);
        r.ok = true;
        return r;
    }();
    return run;
}

}  // namespace

TEST_CASE("criterion 1: finite-difference gradient suite") {
    const auto start = Clock::now();
    RandomStream rng(20260811);
    double worst = 0;
    auto track = [&](double err) { worst = std::max(worst, err); return err; };

    {  // conv2d, strides 1 and 2
        for (const int stride : {1, 2}) {
            Tensor<double> x = gradcheck::random_tensor<double>(1, 2, 6, 6, rng);
            Tensor<double> w = gradcheck::random_tensor<double>(3, 2, 3, 3, rng);
            Eigen::Array<double, Eigen::Dynamic, 1> b(3);
            for (int i = 0; i < 3; ++i) b[i] = rng.normal();
            const Tensor<double> out = conv2d(x, w, b, stride);
            const Tensor<double> r =
                gradcheck::random_tensor<double>(out.n, out.c, out.h, out.w, rng);
            const auto grads = conv2d_backward(x, w, r, stride);
            auto loss = [&] { return gradcheck::weighted_sum(conv2d(x, w, b, stride), r); };
            CHECK(track(gradcheck::probe(x.data, grads.input.data, 50, rng, loss)) < 1e-4);
            CHECK(track(gradcheck::probe(w.data, grads.weights.data, 50, rng, loss)) < 1e-4);
            Eigen::Array<double, Eigen::Dynamic, 1> bias_grad = grads.bias;
            CHECK(track(gradcheck::probe(b, bias_grad, 12, rng, loss)) < 1e-4);
        }
    }
    {  // 4-offset max pooling
        Tensor<double> x = gradcheck::random_tensor<double>(1, 3, 8, 8, rng);
        const auto pooled = maxpool_all_offsets(x, PhaseMap{});
        const Tensor<double> r = gradcheck::random_tensor<double>(
            pooled.output.n, pooled.output.c, pooled.output.h, pooled.output.w, rng);
        const Tensor<double> gin = maxpool_all_offsets_backward(x, pooled, r);
        auto loss = [&] {
            return gradcheck::weighted_sum(maxpool_all_offsets(x, PhaseMap{}).output, r);
        };
        CHECK(track(gradcheck::probe(x.data, gin.data, 120, rng, loss)) < 1e-4);
    }
    {  // relu
        Tensor<double> x = gradcheck::random_tensor<double>(1, 4, 6, 6, rng);
        const Tensor<double> r = gradcheck::random_tensor<double>(1, 4, 6, 6, rng);
        const Tensor<double> gin = relu_backward(x, r);
        auto loss = [&] { return gradcheck::weighted_sum(relu(x), r); };
        auto off_kink = [&](Eigen::Index i) { return std::abs(x.data[i]) > 1e-3; };
        CHECK(track(gradcheck::probe(x.data, gin.data, 120, rng, loss, off_kink)) < 1e-4);
    }
    {  // lrn
        const LrnConfig cfg;
        Tensor<double> x = gradcheck::random_tensor<double>(1, 8, 5, 5, rng);
        const Tensor<double> r = gradcheck::random_tensor<double>(1, 8, 5, 5, rng);
        const Tensor<double> gin = lrn_backward(x, r, cfg);
        auto loss = [&] { return gradcheck::weighted_sum(lrn(x, cfg), r); };
        CHECK(track(gradcheck::probe(x.data, gin.data, 120, rng, loss)) < 1e-4);
    }
    {  // upsample3x3
        Tensor<double> x = gradcheck::random_tensor<double>(1, 4, 5, 5, rng);
        Tensor<double> w = gradcheck::random_tensor<double>(3 * 4, 4, 3, 3, rng, 0.4);
        Eigen::Array<double, Eigen::Dynamic, 1> b(12);
        for (int i = 0; i < 12; ++i) b[i] = rng.normal();
        const Tensor<double> r = gradcheck::random_tensor<double>(1, 3, 10, 10, rng);
        const auto grads = upsample3x3_backward(x, w, r, 2);
        auto loss = [&] { return gradcheck::weighted_sum(upsample3x3(x, w, b, 2), r); };
        CHECK(track(gradcheck::probe(x.data, grads.input.data, 50, rng, loss)) < 1e-4);
        CHECK(track(gradcheck::probe(w.data, grads.weights.data, 50, rng, loss)) < 1e-4);
        Eigen::Array<double, Eigen::Dynamic, 1> bias_grad = grads.bias;
        CHECK(track(gradcheck::probe(b, bias_grad, 12, rng, loss)) < 1e-4);
    }
    {  // softmax cross entropy
        Eigen::MatrixXd logits(7, 24);
        std::vector<int> targets;
        for (int s = 0; s < 24; ++s) {
            for (int c = 0; c < 7; ++c) logits(c, s) = rng.normal();
            targets.push_back(rng.uniform_int(7));
        }
        const auto result = softmax_xent<double>(logits, targets);
        Eigen::Array<double, Eigen::Dynamic, 1> flat(logits.size()), analytic(logits.size());
        for (Eigen::Index i = 0; i < logits.size(); ++i) {
            flat[i] = logits.data()[i];
            analytic[i] = result.grad.data()[i];
        }
        auto loss = [&] {
            Eigen::MatrixXd current = logits;
            for (Eigen::Index i = 0; i < current.size(); ++i) current.data()[i] = flat[i];
            return static_cast<double>(softmax_xent<double>(current, targets).loss);
        };
        CHECK(track(gradcheck::probe(flat, analytic, 120, rng, loss)) < 1e-4);
    }
    {  // ensemble loss through the full tower
        const NetConfig cfg = NetConfig::desk(16, 4);
        Dataset<double> dataset;
        dataset.seg_class_counts = {5, 3};
        dataset.keypoint_classes = 0;
        TrainImage<double> image;
        image.input = gradcheck::random_tensor<double>(1, 1, 16, 16, rng, 0.5);
        for (int pix = 0; pix < 256; ++pix) image.foreground.push_back(pix);
        for (int s = 0; s < 2; ++s) {
            Eigen::VectorXi labels(256);
            for (int pix = 0; pix < 256; ++pix) {
                labels[pix] = rng.uniform_int(dataset.seg_class_counts[static_cast<size_t>(s)]);
            }
            image.seg_labels.push_back(labels);
        }
        dataset.images.push_back(std::move(image));
        NetworkParams<double> params = init_params(dataset, cfg);
        std::vector<TrainTask<double>> batch;
        for (int s = 0; s < 2; ++s) {
            TrainTask<double> task;
            task.head = s;
            task.image = &dataset.images[0].input;
            for (int i = 0; i < 20; ++i) {
                const int pix = rng.uniform_int(256);
                task.pixels.emplace_back(pix, dataset.images[0].seg_labels[static_cast<size_t>(s)][pix]);
            }
            batch.push_back(std::move(task));
        }
        const auto [loss_value, grads] = ensemble_loss(params, batch);
        auto loss = [&] { return static_cast<double>(ensemble_loss(params, batch).first); };
        int probes_done = 0;
        for (size_t layer = 0; layer < params.tower.weights().size(); ++layer) {
            if (params.tower.weights()[layer].size() == 0) continue;
            CHECK(track(gradcheck::probe(params.tower.weights()[layer].data,
                                         grads.tower.weights[layer].data, 25, rng, loss)) < 1e-4);
            probes_done += 25;
        }
        for (size_t h = 0; h < params.heads.size(); ++h) {
            Eigen::Array<double, Eigen::Dynamic, 1> flat(params.heads[h].weight.size());
            Eigen::Array<double, Eigen::Dynamic, 1> analytic(params.heads[h].weight.size());
            for (Eigen::Index i = 0; i < flat.size(); ++i) {
                flat[i] = params.heads[h].weight.data()[i];
                analytic[i] = grads.heads[h].data()[i];
            }
            auto head_loss = [&] {
                for (Eigen::Index i = 0; i < flat.size(); ++i) {
                    params.heads[h].weight.data()[i] = flat[i];
                }
                return static_cast<double>(ensemble_loss(params, batch).first);
            };
            CHECK(track(gradcheck::probe(flat, analytic, 15, rng, head_loss)) < 1e-4);
            probes_done += 15;
        }
        CHECK(probes_done >= 100);
    }

    const double elapsed = seconds_since(start);
    const bool pass = worst < 1e-4 && elapsed < 120.0;
    announce(1, pass,
             format("gradient checks: max relative error %.2e (< 1e-4), %.1fs (< 120s)", worst,
                    elapsed));
    CHECK(pass);
}

TEST_CASE("criterion 2: geometry oracles on small meshes") {
    const auto start = Clock::now();
    const TriMesh mesh = oracles::random_grid_mesh(10, 20, 17);  // 200 vertices
    const Eigen::MatrixXd fw = oracles::floyd_warshall(mesh);

    // Dijkstra against Floyd-Warshall; the two associate the path sums
    // differently, so "exact" means equal to the last ulp of the sums.
    double geodesic_err = 0;
    for (int source = 0; source < mesh.vertex_count(); source += 5) {
        const Eigen::VectorXd dist = geodesic_distances(mesh, source);
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            geodesic_err = std::max(geodesic_err, std::abs(dist[v] - fw(source, v)));
        }
    }
    const bool geodesic_ok = geodesic_err < 1e-12;

    // Farthest-point sampling maximality by exhaustive scan.
    bool fps_ok = true;
    const std::vector<int> initial = {3, 77, 150};
    const std::vector<int> seeds = farthest_point_sample(mesh, initial, 12);
    for (size_t i = initial.size(); i < seeds.size(); ++i) {
        auto min_dist = [&](int v) {
            double best = std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < i; ++j) best = std::min(best, fw(v, seeds[j]));
            return best;
        };
        const double chosen = min_dist(seeds[i]);
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            if (std::find(seeds.begin(), seeds.begin() + static_cast<long>(i + 1), v) !=
                seeds.begin() + static_cast<long>(i + 1)) {
                continue;
            }
            if (min_dist(v) > chosen) fps_ok = false;
        }
    }

    // Voronoi labels against the all-pairs argmin.
    bool voronoi_ok = true;
    const Segmentation seg = voronoi_segmentation(mesh, seeds);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        int best = 0;
        for (int s = 1; s < static_cast<int>(seeds.size()); ++s) {
            if (fw(v, seeds[static_cast<size_t>(s)]) < fw(v, seeds[static_cast<size_t>(best)])) {
                best = s;
            }
        }
        if (seg.labels[static_cast<size_t>(v)] != best) voronoi_ok = false;
    }

    // Greedy selection against the per-step exhaustive oracle.
    bool selection_ok = true;
    std::vector<Segmentation> candidates;
    for (int i = 0; i < 16; ++i) {
        candidates.push_back(random_segmentation(mesh, 8, 4, 4000 + static_cast<std::uint64_t>(i)));
    }
    SelectionOptions options;
    options.max_count = 6;
    options.min_gain = 1;
    options.min_gain_fraction = 0.0;
    options.rng_seed = 55;
    const SegmentationSet selected = select_segmentation_set(candidates, options);
    {
        RandomStream rng(options.rng_seed);
        const int first = rng.uniform_int(static_cast<int>(candidates.size()));
        if (selected[0].labels != candidates[static_cast<size_t>(first)].labels) selection_ok = false;
        std::vector<bool> used(candidates.size(), false);
        used[static_cast<size_t>(first)] = true;
        SegmentationSet replay;
        replay.append(candidates[static_cast<size_t>(first)]);
        for (int step = 1; step < selected.size(); ++step) {
            int best = -1, best_count = -1;
            for (size_t c = 0; c < candidates.size(); ++c) {
                if (used[c]) continue;
                const int count = replay.intersection_region_count_with(candidates[c]);
                if (count > best_count) {
                    best_count = count;
                    best = static_cast<int>(c);
                }
            }
            if (selected[step].labels != candidates[static_cast<size_t>(best)].labels) {
                selection_ok = false;
                break;
            }
            used[static_cast<size_t>(best)] = true;
            replay.append(candidates[static_cast<size_t>(best)]);
        }
    }

    const double elapsed = seconds_since(start);
    const bool pass = geodesic_ok && fps_ok && voronoi_ok && selection_ok && elapsed < 60.0;
    announce(2, pass,
             format("geodesic err %.1e, fps %s, voronoi %s, selection %s, %.1fs (< 60s)",
                    geodesic_err, fps_ok ? "maximal" : "BROKEN", voronoi_ok ? "argmin" : "BROKEN",
                    selection_ok ? "greedy-optimal" : "BROKEN", elapsed));
    CHECK(pass);
}

TEST_CASE("criterion 3: overfit a single image with one 8-class segmentation") {
    const auto start = Clock::now();
    const GeneratedBody body = generate_body(BodySpec{});
    SegmentationSet set;
    set.append(random_segmentation(body.mesh, 8, 4, 11));
    const Eigen::Vector3d lo = body.mesh.vertices.colwise().minCoeff().transpose();
    const Eigen::Vector3d hi = body.mesh.vertices.colwise().maxCoeff().transpose();
    Camera cam;
    cam.look_at = 0.5 * (lo + hi);
    cam.eye = cam.look_at + Eigen::Vector3d(0, 0, 1.5);
    cam.width = cam.height = 64;
    const RenderResult render = rasterize_depth(body.mesh, &set, {}, cam);

    Dataset<double> dataset;
    dataset.seg_class_counts.push_back(8);
    dataset.keypoint_classes = 0;
    TrainImage<double> image;
    image.input = depth_to_input<double>(render.image);
    for (int pix = 0; pix < 64 * 64; ++pix) {
        if (render.image.mask[static_cast<size_t>(pix)]) image.foreground.push_back(pix);
    }
    image.seg_labels.push_back(render.labels[0]);
    dataset.images.push_back(std::move(image));

    NetConfig cfg = NetConfig::desk(64, 8);
    cfg.learning_rate = 0.1;
    cfg.iterations = 2000;
    cfg.log_every = 50;
    const TrainResult<double> result = train(dataset, cfg);
    double best = std::numeric_limits<double>::infinity();
    int best_iteration = -1;
    for (const LossLogEntry& entry : result.log) {
        if (entry.loss < best) {
            best = entry.loss;
            best_iteration = entry.iteration;
        }
    }
    const double elapsed = seconds_since(start);
    const bool pass = best < 0.05 && elapsed < 300.0;
    announce(3, pass,
             format("cross-entropy %.4f (< 0.05) at iteration %d of 2000, %.1fs (< 300s)", best,
                    best_iteration, elapsed));
    CHECK(pass);
}

TEST_CASE("criterion 4: descriptor smoothness and pose stability after the desk run") {
    const DeskRun& desk = desk_run();
    REQUIRE(desk.ok);
    const std::string out = desk.config.out_dir;

    const TriMesh tmpl = load_mesh(out + "/body/template.obj");
    const VertexDescriptorTable ref = read_vertex_table(out + "/desc/verts_p000.bin");
    const VertexDescriptorTable held = read_vertex_table(out + "/desc/verts_held.bin");

    std::vector<int> usable;
    for (int v = 0; v < ref.vertex_count(); ++v) {
        if (ref.usable(v)) usable.push_back(v);
    }
    RandomStream rng(404);
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(10000);
    while (pairs.size() < 10000) {
        const int a = usable[static_cast<size_t>(rng.uniform_int(static_cast<int>(usable.size())))];
        const Eigen::VectorXd geo = geodesic_distances(tmpl, a);
        for (int t = 0; t < 100 && pairs.size() < 10000; ++t) {
            const int b = usable[static_cast<size_t>(rng.uniform_int(static_cast<int>(usable.size())))];
            if (a == b) continue;
            pairs.emplace_back(geo[b], (ref.values.row(a) - ref.values.row(b)).norm());
        }
    }
    const double rho = spearman(pairs);

    double corresponding = 0;
    int corresponding_count = 0;
    for (int v = 0; v < ref.vertex_count(); ++v) {
        if (ref.usable(v) && held.usable(v)) {
            corresponding += (ref.values.row(v) - held.values.row(v)).norm();
            ++corresponding_count;
        }
    }
    std::vector<int> usable_held;
    for (int v = 0; v < held.vertex_count(); ++v) {
        if (held.usable(v)) usable_held.push_back(v);
    }
    double random_sum = 0;
    const int random_count = 20000;
    for (int i = 0; i < random_count; ++i) {
        const int a =
            usable_held[static_cast<size_t>(rng.uniform_int(static_cast<int>(usable_held.size())))];
        const int b = usable[static_cast<size_t>(rng.uniform_int(static_cast<int>(usable.size())))];
        random_sum += (held.values.row(a) - ref.values.row(b)).norm();
    }
    const double ratio = (corresponding / corresponding_count) / (random_sum / random_count);

    const bool pass = rho > 0.5 && ratio < 0.5;
    announce(4, pass,
             format("spearman(geodesic, descriptor) %.3f (> 0.5) over %zu pairs; "
                    "corresponding/random ratio %.3f (< 0.5)",
                    rho, pairs.size(), ratio));
    CHECK(pass);
}

TEST_CASE("criterion 5: the multi-segmentation ensemble smooths region boundaries") {
    const auto start = Clock::now();
    // Shared data: one body, 5 segmentations, 4 training views, 1 eval view.
    const GeneratedBody body = generate_body([] {
        BodySpec spec;
        spec.grid_resolution = 32;
        return spec;
    }());
    std::vector<Segmentation> candidates;
    for (int i = 0; i < 12; ++i) {
        candidates.push_back(random_segmentation(body.mesh, 12, 6, 600 + static_cast<std::uint64_t>(i)));
    }
    SelectionOptions options;
    options.max_count = 5;
    options.rng_seed = 9;
    const SegmentationSet set = select_segmentation_set(candidates, options);
    REQUIRE(set.size() == 5);

    const Eigen::Vector3d lo = body.mesh.vertices.colwise().minCoeff().transpose();
    const Eigen::Vector3d hi = body.mesh.vertices.colwise().maxCoeff().transpose();
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    const std::vector<Camera> cameras = sample_viewpoints(5, 1.5, center, M_PI / 3, 32, 32);

    std::vector<RenderResult> renders;
    for (const Camera& cam : cameras) renders.push_back(rasterize_depth(body.mesh, &set, {}, cam));
    const RenderResult& eval_view = renders.back();

    auto make_dataset = [&](int segmentations) {
        Dataset<double> dataset;
        for (int s = 0; s < segmentations; ++s) dataset.seg_class_counts.push_back(set[s].k);
        dataset.keypoint_classes = 0;
        for (size_t view = 0; view + 1 < renders.size(); ++view) {
            TrainImage<double> image;
            image.input = depth_to_input<double>(renders[view].image);
            for (int pix = 0; pix < 32 * 32; ++pix) {
                if (renders[view].image.mask[static_cast<size_t>(pix)]) {
                    image.foreground.push_back(pix);
                }
            }
            for (int s = 0; s < segmentations; ++s) {
                image.seg_labels.push_back(renders[view].labels[static_cast<size_t>(s)]);
            }
            dataset.images.push_back(std::move(image));
        }
        return dataset;
    };
    const Dataset<double> single = make_dataset(1);
    const Dataset<double> ensemble = make_dataset(5);

    // Boundary-discontinuity score on segmentation 0 of the eval view: mean
    // descriptor distance across label-crossing 4-neighbor pairs, normalized
    // by the same mean across non-crossing pairs.
    auto boundary_score = [&](const NetworkParams<double>& params) {
        const DescriptorField field = extract_pixel_descriptors(params, eval_view.image);
        const Eigen::VectorXi& labels = eval_view.labels[0];
        double boundary = 0, interior = 0;
        int boundary_count = 0, interior_count = 0;
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                const int pix = y * 32 + x;
                if (labels[pix] < 0) continue;
                for (const int other : {pix + 1, pix + 32}) {
                    if ((other == pix + 1 && x + 1 >= 32) || (other == pix + 32 && y + 1 >= 32)) {
                        continue;
                    }
                    if (labels[other] < 0) continue;
                    const double dist = (field.values.row(pix) - field.values.row(other)).norm();
                    if (labels[pix] != labels[other]) {
                        boundary += dist;
                        ++boundary_count;
                    } else {
                        interior += dist;
                        ++interior_count;
                    }
                }
            }
        }
        REQUIRE(boundary_count > 20);
        REQUIRE(interior_count > 100);
        return (boundary / boundary_count) / (interior / interior_count);
    };

    NetConfig cfg = NetConfig::desk(32, 8);
    cfg.learning_rate = 0.05;
    cfg.batch_size = 64;
    cfg.iterations = 1200;
    cfg.log_every = 1200;

    std::vector<double> single_scores, ensemble_scores;
    for (const std::uint64_t seed : {1, 2, 3, 4, 5}) {
        cfg.rng_seed = seed;
        single_scores.push_back(boundary_score(train(single, cfg).params));
        ensemble_scores.push_back(boundary_score(train(ensemble, cfg).params));
    }
    auto median = [](std::vector<double> values) {
        std::sort(values.begin(), values.end());
        return values[values.size() / 2];
    };
    const double single_median = median(single_scores);
    const double ensemble_median = median(ensemble_scores);

    const bool pass = ensemble_median < single_median;
    announce(5, pass,
             format("median boundary-discontinuity score: ensemble %.3f < single %.3f "
                    "(5 seeds, identical budgets), %.1fs",
                    ensemble_median, single_median, seconds_since(start)));
    CHECK(pass);
}

TEST_CASE("criterion 6: spatial filter discards planted far matches, keeps the block") {
    // 10x10 coherent block matched onto a smooth target line; five interior
    // pixels are re-pointed > 0.10 m away.
    Eigen::Matrix<double, Eigen::Dynamic, 3> targets(600, 3);
    for (int t = 0; t < 600; ++t) targets.row(t) = Eigen::RowVector3d(0.01 * t, 0, 0);

    const std::vector<int> planted = {13, 27, 55, 71, 88};  // no two adjacent
    CorrespondenceSet in;
    in.kind = MatchKind::Pixel;
    in.source_grid_width = 10;
    in.source_grid_height = 10;
    for (int pix = 0; pix < 100; ++pix) {
        const bool far = std::find(planted.begin(), planted.end(), pix) != planted.end();
        const int x = pix % 10, y = pix / 10;
        in.matches.push_back({pix, far ? 500 + pix : x + y, 0.0});
    }
    FilterConfig config;  // 0.10 m
    const CorrespondenceSet out = spatial_filter(in, targets, config);

    int planted_kept = 0, coherent_kept = 0;
    for (const Correspondence& c : out.matches) {
        if (std::find(planted.begin(), planted.end(), c.source_id) != planted.end()) {
            ++planted_kept;
        } else {
            ++coherent_kept;
        }
    }

    // Union-find oracle: output must be exactly the largest component.
    oracles::UnionFind uf(100);
    for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) {
            const int pix = y * 10 + x;
            auto target = [&](int p) { return targets.row(in.matches[static_cast<size_t>(p)].target_id); };
            if (x + 1 < 10 && (target(pix) - target(pix + 1)).norm() <= config.threshold) {
                uf.unite(pix, pix + 1);
            }
            if (y + 1 < 10 && (target(pix) - target(pix + 10)).norm() <= config.threshold) {
                uf.unite(pix, pix + 10);
            }
        }
    }
    std::map<int, int> sizes;
    for (int pix = 0; pix < 100; ++pix) sizes[uf.find(pix)]++;
    int largest = 0;
    for (const auto& [root, size] : sizes) largest = std::max(largest, size);
    bool subset_connected = static_cast<int>(out.matches.size()) == largest;
    if (!out.matches.empty()) {
        const int root = uf.find(out.matches.front().source_id);
        for (const Correspondence& c : out.matches) {
            if (uf.find(c.source_id) != root) subset_connected = false;
        }
    }

    const bool pass = planted_kept == 0 && coherent_kept == 95 && subset_connected;
    announce(6, pass,
             format("planted far matches discarded %d/5, coherent block kept %d/95, "
                    "union-find verified %s",
                    5 - planted_kept, coherent_kept, subset_connected ? "yes" : "NO"));
    CHECK(pass);
}

TEST_CASE("criterion 7: held-out matching beats the random baseline 3x") {
    const DeskRun& desk = desk_run();
    REQUIRE(desk.ok);
    const auto metrics = read_key_values(desk.config.out_dir + "/eval/metrics.txt");
    double ae = -1, baseline = -1;
    for (const auto& [key, value] : metrics) {
        if (key == "ae_cm") ae = std::stod(value);
        if (key == "baseline_ae_cm") baseline = std::stod(value);
    }
    REQUIRE(ae >= 0);
    REQUIRE(baseline >= 0);
    const bool pass = ae * 3.0 <= baseline && desk.pipeline_seconds < 1800.0;
    announce(7, pass,
             format("held-pose AE %.2f cm vs random baseline %.2f cm (ratio %.3f <= 1/3); "
                    "pipeline %.0fs (< 1800s)",
                    ae, baseline, ae / baseline, desk.pipeline_seconds));
    CHECK(pass);
}

TEST_CASE("criterion 8: metrics match brute-force recomputation on 1000 matches") {
    RandomStream rng(808);
    Eigen::Matrix<double, Eigen::Dynamic, 3> positions(300, 3);
    for (int v = 0; v < 300; ++v) {
        positions.row(v) = Eigen::RowVector3d(rng.normal(), rng.normal(), rng.normal());
    }
    CorrespondenceSet matches;
    matches.kind = MatchKind::Vertex;
    std::vector<int> truth(1000);
    for (int s = 0; s < 1000; ++s) {
        truth[static_cast<size_t>(s)] = rng.uniform_int(300);
        matches.matches.push_back({s, rng.uniform_int(300), 0.0});
    }
    const std::vector<double> errors = match_errors(matches, truth, positions);
    const std::vector<double> radii = {0, 5, 10, 25, 1000};
    const ErrorReport report = summarize({errors}, radii);

    double err = 0;
    double sum = 0;
    for (int s = 0; s < 1000; ++s) {
        const double direct =
            100.0 *
            (positions.row(truth[static_cast<size_t>(s)]) - positions.row(matches.matches[static_cast<size_t>(s)].target_id))
                .norm();
        err = std::max(err, std::abs(direct - errors[static_cast<size_t>(s)]));
        sum += direct;
    }
    err = std::max(err, std::abs(report.ae - sum / 1000.0));
    err = std::max(err, std::abs(report.worst_ae - sum / 1000.0));  // single pair
    for (size_t r = 0; r < radii.size(); ++r) {
        int within = 0;
        for (double e : errors) {
            if (e <= radii[r]) ++within;
        }
        err = std::max(err, std::abs(report.recall[r] - within / 1000.0));
    }
    bool monotone = true;
    for (size_t r = 1; r < report.recall.size(); ++r) {
        if (report.recall[r] < report.recall[r - 1]) monotone = false;
    }
    double cumulative_monotone = true;
    for (size_t i = 1; i < report.cumulative.size(); ++i) {
        if (report.cumulative[i].second < report.cumulative[i - 1].second) {
            cumulative_monotone = false;
        }
    }
    const bool pass = err < 1e-9 && monotone && cumulative_monotone &&
                      report.recall.back() == 1.0 && report.cumulative.back().second == 1.0;
    announce(8, pass,
             format("brute-force agreement %.1e (< 1e-9), recall monotone %s, recall@inf %.0f",
                    err, monotone && cumulative_monotone ? "yes" : "NO", report.recall.back()));
    CHECK(pass);
}

TEST_CASE("criterion 9: identical desk pipeline runs are byte-identical") {
    const auto start = Clock::now();
    auto configure = [](const std::string& dir) {
        RunConfig config = RunConfig::preset_desk();
        config.out_dir = dir;
        config.pose_count = 3;
        config.render_views = 6;
        config.seg_candidates = 25;
        config.seg_k = 12;
        config.net.iterations = 1500;
        config.net.log_every = 100;
        config.finalize();
        return config;
    };
    const std::string base = (fs::temp_directory_path() / "bodycorr_acceptance").string();
    const RunConfig a = configure(base + "/det_a");
    const RunConfig b = configure(base + "/det_b");
    fs::remove_all(a.out_dir);
    fs::remove_all(b.out_dir);
    run_all(a);
    run_all(b);

    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        REQUIRE(in.good());
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool identical = true;
    std::string first_difference;
    for (const std::string rel :
         {"/eval/errors_p000.csv", "/eval/errors_p001.csv", "/eval/baseline_p000.csv",
          "/eval/cumulative.csv", "/eval/summary.txt", "/net/loss_log.csv",
          "/match/vertex_p000.csv"}) {
        if (slurp(a.out_dir + rel) != slurp(b.out_dir + rel)) {
            identical = false;
            if (first_difference.empty()) first_difference = rel;
        }
    }
    const bool pass = identical;
    announce(9, pass,
             format("two pipeline runs compared over 7 report/CSV files: %s (%.0fs)",
                    identical ? "byte-identical" : ("DIFFER at " + first_difference).c_str(),
                    seconds_since(start)));
    CHECK(pass);
}
