#include "bodycorr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bodycorr/correspond.hpp"
#include "bodycorr/descriptor.hpp"
#include "bodycorr/io.hpp"
#include "bodycorr/metrics.hpp"
#include "bodycorr/render.hpp"
#include "bodycorr/train.hpp"

namespace fs = std::filesystem;

namespace bodycorr {

namespace {

std::string join(const std::string& a, const std::string& b) {
    return (fs::path(a) / b).string();
}

void ensure_dir(const std::string& path) { fs::create_directories(path); }

std::string pose_tag(int pose) {
    if (pose < 0) return "held";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%03d", pose);
    return buf;
}

std::string view_base(int pose, int view) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "_v%03d", view);
    return pose_tag(pose) + buf;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

void require_artifact(const std::string& path, const std::string& stage) {
    if (!fs::exists(path)) {
        throw StageError("missing upstream artifact " + path + "; run the '" + stage +
                         "' stage first");
    }
}

struct Paths {
    std::string out;
    explicit Paths(const RunConfig& config) : out(config.out_dir) {}

    std::string body_dir() const { return join(out, "body"); }
    std::string template_mesh() const { return join(body_dir(), "template.obj"); }
    std::string keypoint_file() const { return join(body_dir(), "keypoints.txt"); }
    std::string pose_file(int pose) const {
        return join(body_dir(), pose_tag(pose) + ".pose.txt");
    }
    std::string pose_mesh(int pose) const { return join(body_dir(), pose_tag(pose) + ".obj"); }

    std::string seg_dir() const { return join(out, "seg"); }
    std::string seg_file(int s) const {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "seg_%03d.txt", s);
        return join(seg_dir(), buf);
    }
    std::string seg_set_file() const { return join(seg_dir(), "set.txt"); }

    std::string render_dir() const { return join(out, "render"); }
    std::string view_path(int pose, int view, const std::string& suffix) const {
        return join(render_dir(), view_base(pose, view) + suffix);
    }

    std::string net_dir() const { return join(out, "net"); }
    std::string checkpoint() const { return join(net_dir(), "checkpoint.bin"); }
    std::string loss_log() const { return join(net_dir(), "loss_log.csv"); }

    std::string desc_dir() const { return join(out, "desc"); }
    std::string vertex_table(int pose) const {
        return join(desc_dir(), "verts_" + pose_tag(pose) + ".bin");
    }
    std::string demo_field(const std::string& which) const {
        return join(desc_dir(), "field_" + which + ".bin");
    }

    std::string match_dir() const { return join(out, "match"); }
    std::string vertex_matches(int pose) const {
        return join(match_dir(), "vertex_" + pose_tag(pose) + ".csv");
    }
    std::string pixel_matches_raw() const { return join(match_dir(), "pixel_raw.csv"); }
    std::string pixel_matches_filtered() const { return join(match_dir(), "pixel_filtered.csv"); }
    std::string match_manifest() const { return join(match_dir(), "manifest.txt"); }

    std::string eval_dir() const { return join(out, "eval"); }
    std::string errors_csv(int pose) const {
        return join(eval_dir(), "errors_" + pose_tag(pose) + ".csv");
    }
    std::string baseline_csv(int pose) const {
        return join(eval_dir(), "baseline_" + pose_tag(pose) + ".csv");
    }
    std::string summary() const { return join(eval_dir(), "summary.txt"); }
    std::string metrics_kv() const { return join(eval_dir(), "metrics.txt"); }
    std::string cumulative() const { return join(eval_dir(), "cumulative.csv"); }
    std::string report_txt() const { return join(eval_dir(), "report.txt"); }

    std::string manifest_dir() const { return join(out, "manifests"); }
    std::string manifest(const std::string& stage) const {
        return join(manifest_dir(), stage + ".txt");
    }
};

// ---- stage bodies ----------------------------------------------------------

void stage_synth(const RunConfig& config, const Paths& paths) {
    ensure_dir(paths.body_dir());
    const GeneratedBody body = generate_body(config.body);
    save_mesh(body.mesh, paths.template_mesh());
    write_keypoints(keypoints(body), paths.keypoint_file());

    RandomStream pose_rng = RandomStream(config.seed).fork(0x706f7365);
    for (int p = 0; p < config.pose_count; ++p) {
        const Pose pose = p == 0 ? Pose{} : random_pose(pose_rng, JointLimits(), config.pose_scale);
        write_pose(pose, paths.pose_file(p));
        save_mesh(pose_body(body, pose), paths.pose_mesh(p));
    }
    RandomStream held_rng = RandomStream(config.seed).fork(0x68656c64);
    const Pose held = random_pose(held_rng, JointLimits(), config.pose_scale);
    write_pose(held, paths.pose_file(-1));
    save_mesh(pose_body(body, held), paths.pose_mesh(-1));
}

void stage_segment(const RunConfig& config, const Paths& paths) {
    require_artifact(paths.template_mesh(), "synth");
    ensure_dir(paths.seg_dir());
    const TriMesh mesh = load_mesh(paths.template_mesh());

    RandomStream seg_rng = RandomStream(config.seed).fork(0x736567);
    std::vector<Segmentation> candidates;
    candidates.reserve(static_cast<size_t>(config.seg_candidates));
    for (int c = 0; c < config.seg_candidates; ++c) {
        candidates.push_back(
            random_segmentation(mesh, config.seg_k, config.seg_initial_seeds, seg_rng.raw()));
    }
    SelectionOptions options;
    options.max_count = config.seg_max_selected;
    options.min_gain = config.seg_min_gain;
    options.min_gain_fraction = config.seg_min_gain_fraction;
    options.rng_seed = seg_rng.raw();
    const SegmentationSet set = select_segmentation_set(candidates, options);

    for (int s = 0; s < set.size(); ++s) write_segmentation(set[s], paths.seg_file(s));
    write_key_values(paths.seg_set_file(),
                     {{"segmentations", std::to_string(set.size())},
                      {"k", std::to_string(config.seg_k)},
                      {"candidates", std::to_string(config.seg_candidates)},
                      {"intersection_region_count",
                       std::to_string(set.intersection_region_count())}});
}

SegmentationSet load_segmentation_set(const Paths& paths) {
    const auto meta = read_key_values(paths.seg_set_file());
    int count = -1;
    for (const auto& [key, value] : meta) {
        if (key == "segmentations") count = std::stoi(value);
    }
    if (count <= 0) throw StageError("segmentation set manifest is invalid");
    SegmentationSet set;
    for (int s = 0; s < count; ++s) set.append(read_segmentation(paths.seg_file(s)));
    return set;
}

void write_view_artifacts(const Paths& paths, int pose, int view, const RenderResult& r) {
    const int w = r.image.width, h = r.image.height;
    write_depth_image(r.image, paths.view_path(pose, view, ".pfm"));

    const int segs = static_cast<int>(r.labels.size());
    std::vector<std::int32_t> labels(static_cast<size_t>(w) * h * segs);
    for (Eigen::Index pix = 0; pix < static_cast<Eigen::Index>(w) * h; ++pix) {
        for (int s = 0; s < segs; ++s) {
            labels[static_cast<size_t>(pix) * segs + s] = r.labels[static_cast<size_t>(s)][pix];
        }
    }
    write_int_array(paths.view_path(pose, view, ".labels.bin"), labels,
                    static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(segs));

    std::vector<std::int32_t> nearest(r.buffers.nearest_vertex.data(),
                                      r.buffers.nearest_vertex.data() + r.buffers.nearest_vertex.size());
    write_int_array(paths.view_path(pose, view, ".nearest.bin"), nearest,
                    static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h), 1);

    std::vector<double> points(static_cast<size_t>(w) * h * 3);
    for (Eigen::Index pix = 0; pix < static_cast<Eigen::Index>(w) * h; ++pix) {
        for (int c = 0; c < 3; ++c) points[static_cast<size_t>(pix) * 3 + c] = r.buffers.point(pix, c);
    }
    write_double_array(paths.view_path(pose, view, ".points.bin"), points,
                       static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h), 3);

    std::ostringstream kp;
    for (const KeypointPixel& p : r.keypoint_pixels) {
        kp << p.keypoint << ' ' << p.x << ' ' << p.y << ' ' << p.vertex << "\n";
    }
    atomic_write_text(paths.view_path(pose, view, ".keyp.txt"), kp.str());
}

void stage_render(const RunConfig& config, const Paths& paths) {
    require_artifact(paths.template_mesh(), "synth");
    require_artifact(paths.seg_set_file(), "segment");
    ensure_dir(paths.render_dir());

    const TriMesh tmpl = load_mesh(paths.template_mesh());
    const SegmentationSet set = load_segmentation_set(paths);
    const std::vector<Keypoint> kps = read_keypoints(paths.keypoint_file());

    const Eigen::Vector3d lo = tmpl.vertices.colwise().minCoeff().transpose();
    const Eigen::Vector3d hi = tmpl.vertices.colwise().maxCoeff().transpose();
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    const double radius = config.camera_radius(hi.y() - lo.y());
    const std::vector<Camera> cameras =
        sample_viewpoints(config.render_views, radius, center, config.fov_radians(),
                          config.render_width, config.render_height);

    RandomStream noise_rng = RandomStream(config.seed).fork(0x6e6f6973);
    auto render_pose = [&](int pose) {
        const TriMesh mesh = load_mesh(paths.pose_mesh(pose));
        for (size_t v = 0; v < cameras.size(); ++v) {
            RasterOptions options;
            options.noise_fraction = config.render_noise;
            options.noise_seed = noise_rng.raw();
            const RenderResult r =
                rasterize_depth(mesh, &set, kps, cameras[v], options);
            write_view_artifacts(paths, pose, static_cast<int>(v), r);
        }
    };
    for (int p = 0; p < config.pose_count; ++p) render_pose(p);
    render_pose(-1);
}

RenderBuffers load_nearest_buffers(const std::string& path) {
    const ArrayFile array = read_array(path);
    if (array.dtype != 'i' || array.channels != 1) {
        throw StageError("unexpected layout in " + path);
    }
    RenderBuffers buffers;
    buffers.width = static_cast<int>(array.width);
    buffers.height = static_cast<int>(array.height);
    buffers.nearest_vertex.resize(static_cast<Eigen::Index>(array.width) * array.height);
    for (Eigen::Index i = 0; i < buffers.nearest_vertex.size(); ++i) {
        buffers.nearest_vertex[i] = array.ints[static_cast<size_t>(i)];
    }
    return buffers;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> load_points(const std::string& path) {
    const ArrayFile array = read_array(path);
    if (array.dtype != 'd' || array.channels != 3) {
        throw StageError("unexpected layout in " + path);
    }
    Eigen::Matrix<double, Eigen::Dynamic, 3> points(
        static_cast<Eigen::Index>(array.width) * array.height, 3);
    for (Eigen::Index pix = 0; pix < points.rows(); ++pix) {
        for (int c = 0; c < 3; ++c) points(pix, c) = array.doubles[static_cast<size_t>(pix) * 3 + c];
    }
    return points;
}

template <typename Scalar>
Dataset<Scalar> load_dataset(const RunConfig& config, const Paths& paths) {
    const SegmentationSet set = load_segmentation_set(paths);
    Dataset<Scalar> dataset;
    for (int s = 0; s < set.size(); ++s) dataset.seg_class_counts.push_back(set[s].k);
    dataset.keypoint_classes = 33;

    const double radius = config.net.keypoint_radius;
    for (int p = 0; p < config.pose_count; ++p) {
        for (int v = 0; v < config.render_views; ++v) {
            const DepthImage depth = read_depth_image(paths.view_path(p, v, ".pfm"));
            const ArrayFile labels = read_array(paths.view_path(p, v, ".labels.bin"));
            if (static_cast<int>(labels.channels) != set.size()) {
                throw StageError("label buffer does not match segmentation count");
            }
            TrainImage<Scalar> image;
            image.input = depth_to_input<Scalar>(depth);
            const Eigen::Index npix = static_cast<Eigen::Index>(depth.width) * depth.height;
            for (Eigen::Index pix = 0; pix < npix; ++pix) {
                if (depth.mask[static_cast<size_t>(pix)]) {
                    image.foreground.push_back(static_cast<int>(pix));
                }
            }
            image.seg_labels.resize(static_cast<size_t>(set.size()));
            for (int s = 0; s < set.size(); ++s) {
                Eigen::VectorXi grid(npix);
                for (Eigen::Index pix = 0; pix < npix; ++pix) {
                    grid[pix] = labels.ints[static_cast<size_t>(pix) * labels.channels +
                                            static_cast<size_t>(s)];
                }
                image.seg_labels[static_cast<size_t>(s)] = std::move(grid);
            }
            // Expand each visible keypoint into the supervised disc around it.
            std::ifstream kp(paths.view_path(p, v, ".keyp.txt"));
            int cls, kx, ky, vertex;
            while (kp >> cls >> kx >> ky >> vertex) {
                const int r = static_cast<int>(std::ceil(radius));
                for (int dy = -r; dy <= r; ++dy) {
                    for (int dx = -r; dx <= r; ++dx) {
                        if (dx * dx + dy * dy > radius * radius) continue;
                        const int x = kx + dx, y = ky + dy;
                        if (x < 0 || x >= depth.width || y < 0 || y >= depth.height) continue;
                        const Eigen::Index pix = static_cast<Eigen::Index>(y) * depth.width + x;
                        if (!depth.mask[static_cast<size_t>(pix)]) continue;
                        image.keypoint_pixels.emplace_back(static_cast<int>(pix), cls);
                    }
                }
            }
            dataset.images.push_back(std::move(image));
        }
    }
    return dataset;
}

void stage_train(const RunConfig& config, const Paths& paths) {
    require_artifact(paths.view_path(0, 0, ".pfm"), "render");
    ensure_dir(paths.net_dir());
    const Dataset<double> dataset = load_dataset<double>(config, paths);
    TrainResult<double> result = train(dataset, config.net);
    save_checkpoint(result.params, paths.checkpoint());
    write_loss_log(result.log, paths.loss_log());
}

template <typename Scalar>
NetworkParams<Scalar> load_params(const RunConfig& config, const Paths& paths) {
    NetworkParams<Scalar> params;
    params.tower = Tower<Scalar>(config.net);
    load_checkpoint(params, paths.checkpoint());
    return params;
}

void stage_extract(const RunConfig& config, const Paths& paths) {
    require_artifact(paths.checkpoint(), "train");
    ensure_dir(paths.desc_dir());
    const NetworkParams<double> params = load_params<double>(config, paths);
    const TriMesh tmpl = load_mesh(paths.template_mesh());

    auto table_for_pose = [&](int pose) {
        std::vector<DescriptorField> fields;
        std::vector<RenderBuffers> buffers;
        for (int v = 0; v < config.render_views; ++v) {
            const DepthImage depth = read_depth_image(paths.view_path(pose, v, ".pfm"));
            fields.push_back(extract_pixel_descriptors(params, depth));
            buffers.push_back(load_nearest_buffers(paths.view_path(pose, v, ".nearest.bin")));
        }
        write_vertex_table(per_vertex_descriptors(fields, buffers, tmpl.vertex_count()),
                           paths.vertex_table(pose));
        return fields.front();
    };
    for (int p = 0; p < config.eval_reference_poses; ++p) {
        const DescriptorField front = table_for_pose(p);
        if (p == 0) write_descriptor_field(front, paths.demo_field("ref_v000"));
    }
    const DescriptorField held_front = table_for_pose(-1);
    write_descriptor_field(held_front, paths.demo_field("held_v000"));
}

std::vector<std::uint8_t> usable_flags(const VertexDescriptorTable& table) {
    std::vector<std::uint8_t> flags(static_cast<size_t>(table.vertex_count()), 0);
    for (int v = 0; v < table.vertex_count(); ++v) flags[static_cast<size_t>(v)] = table.usable(v) ? 1 : 0;
    return flags;
}

void stage_match(const RunConfig& config, const Paths& paths) {
    require_artifact(paths.vertex_table(-1), "extract");
    ensure_dir(paths.match_dir());

    const VertexDescriptorTable held = read_vertex_table(paths.vertex_table(-1));
    for (int p = 0; p < config.eval_reference_poses; ++p) {
        const VertexDescriptorTable ref = read_vertex_table(paths.vertex_table(p));
        CorrespondenceSet matches =
            nn_match(held.values, usable_flags(held), ref.values, usable_flags(ref));
        matches.kind = MatchKind::Vertex;
        write_correspondences(matches, paths.vertex_matches(p));
    }

    // Pixel-level demonstration pair with the spatial-consistency filter.
    const DescriptorField held_field = read_descriptor_field(paths.demo_field("held_v000"));
    const DescriptorField ref_field = read_descriptor_field(paths.demo_field("ref_v000"));
    CorrespondenceSet pixel_matches = nn_match(held_field.values, held_field.mask,
                                               ref_field.values, ref_field.mask);
    pixel_matches.kind = MatchKind::Pixel;
    pixel_matches.source_grid_width = held_field.width;
    pixel_matches.source_grid_height = held_field.height;
    write_correspondences(pixel_matches, paths.pixel_matches_raw());

    const Eigen::Matrix<double, Eigen::Dynamic, 3> ref_points =
        load_points(paths.view_path(0, 0, ".points.bin"));
    FilterConfig filter;
    filter.threshold = config.match_threshold;
    const CorrespondenceSet filtered = spatial_filter(pixel_matches, ref_points, filter);
    write_correspondences(filtered, paths.pixel_matches_filtered());

    write_key_values(paths.match_manifest(),
                     {{"threshold_m", std::to_string(config.match_threshold)},
                      {"seed", std::to_string(config.seed)},
                      {"config_hash", hash_hex(config.stage_hash("match"))},
                      {"pixel_matches_raw", std::to_string(pixel_matches.matches.size())},
                      {"pixel_matches_filtered", std::to_string(filtered.matches.size())}});
}

void stage_eval(const RunConfig& config, const Paths& paths) {
    require_artifact(paths.vertex_matches(0), "match");
    ensure_dir(paths.eval_dir());

    RandomStream baseline_rng = RandomStream(config.seed).fork(0x62617365);
    std::vector<std::vector<double>> errors_per_pair;
    std::vector<std::vector<double>> baseline_per_pair;
    for (int p = 0; p < config.eval_reference_poses; ++p) {
        const TriMesh target = load_mesh(paths.pose_mesh(p));
        const CorrespondenceSet matches =
            read_correspondences(paths.vertex_matches(p), MatchKind::Vertex);
        std::vector<int> identity(static_cast<size_t>(target.vertex_count()));
        for (size_t v = 0; v < identity.size(); ++v) identity[v] = static_cast<int>(v);

        const std::vector<double> errors =
            match_errors(matches, identity, target.vertices, ErrorMetric::Euclidean);
        write_errors_csv(errors, paths.errors_csv(p));
        errors_per_pair.push_back(errors);

        // In-run random-matching baseline over the same sources and the same
        // usable target set.
        const VertexDescriptorTable ref = read_vertex_table(paths.vertex_table(p));
        std::vector<int> usable_targets;
        for (int v = 0; v < ref.vertex_count(); ++v) {
            if (ref.usable(v)) usable_targets.push_back(v);
        }
        CorrespondenceSet random_set;
        random_set.kind = MatchKind::Vertex;
        for (const Correspondence& c : matches.matches) {
            const int t = usable_targets[static_cast<size_t>(
                baseline_rng.uniform_int(static_cast<int>(usable_targets.size())))];
            random_set.matches.push_back({c.source_id, t, 0.0});
        }
        const std::vector<double> baseline =
            match_errors(random_set, identity, target.vertices, ErrorMetric::Euclidean);
        write_errors_csv(baseline, paths.baseline_csv(p));
        baseline_per_pair.push_back(baseline);
    }

    const ErrorReport report = summarize(errors_per_pair, config.eval_radii_cm);
    const ErrorReport baseline_report = summarize(baseline_per_pair, config.eval_radii_cm);
    atomic_write_text(paths.summary(), report_summary_text(report));
    write_cumulative_csv(report, paths.cumulative());

    char buf[64];
    std::vector<std::pair<std::string, std::string>> kv;
    std::snprintf(buf, sizeof(buf), "%.9f", report.ae);
    kv.emplace_back("ae_cm", buf);
    std::snprintf(buf, sizeof(buf), "%.9f", report.worst_ae);
    kv.emplace_back("worst_ae_cm", buf);
    std::snprintf(buf, sizeof(buf), "%.9f", baseline_report.ae);
    kv.emplace_back("baseline_ae_cm", buf);
    std::snprintf(buf, sizeof(buf), "%.9f", report.ae / baseline_report.ae);
    kv.emplace_back("ae_over_baseline", buf);
    for (size_t r = 0; r < report.radii_cm.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%.9f", report.recall[r]);
        kv.emplace_back("recall@" + std::to_string(static_cast<int>(report.radii_cm[r])) + "cm",
                        buf);
    }
    write_key_values(paths.metrics_kv(), kv);
}

using StageFn = void (*)(const RunConfig&, const Paths&);

StageFn stage_function(const std::string& stage) {
    if (stage == "synth") return stage_synth;
    if (stage == "segment") return stage_segment;
    if (stage == "render") return stage_render;
    if (stage == "train") return stage_train;
    if (stage == "extract") return stage_extract;
    if (stage == "match") return stage_match;
    if (stage == "eval") return stage_eval;
    return nullptr;
}

bool manifest_current(const RunConfig& config, const Paths& paths, const std::string& stage) {
    const std::string path = paths.manifest(stage);
    if (!fs::exists(path)) return false;
    try {
        for (const auto& [key, value] : read_key_values(path)) {
            if (key == "config_hash") {
                return value == hash_hex(config.stage_hash(stage));
            }
        }
    } catch (const std::exception&) {
        return false;
    }
    return false;
}

}  // namespace

std::string stage_manifest_path(const RunConfig& config, const std::string& stage) {
    return Paths(config).manifest(stage);
}

StageResult run_stage(const std::string& stage, const RunConfig& config, bool force) {
    const StageFn fn = stage_function(stage);
    if (fn == nullptr) throw ConfigError("unknown stage '" + stage + "'");
    const Paths paths(config);

    // Upstream manifests must exist and match the current config, otherwise
    // this stage would silently consume stale artifacts.
    for (const std::string& upstream : kStageOrder) {
        if (upstream == stage) break;
        if (!fs::exists(paths.manifest(upstream))) {
            throw StageError("stage '" + stage + "' requires '" + upstream + "' to run first");
        }
        if (!manifest_current(config, paths, upstream)) {
            throw StageError("stale artifacts: stage '" + upstream +
                             "' was produced with a different config; rerun it");
        }
    }

    StageResult result;
    if (!force && manifest_current(config, paths, stage)) {
        return result;  // up to date
    }
    fn(config, paths);
    ensure_dir(paths.manifest_dir());
    write_key_values(paths.manifest(stage), {{"stage", stage},
                                             {"config_hash", hash_hex(config.stage_hash(stage))},
                                             {"seed", std::to_string(config.seed)},
                                             {"completed", "1"}});
    result.ran = true;
    return result;
}

int run_all(const RunConfig& config, bool force) {
    int ran = 0;
    for (const std::string& stage : kStageOrder) {
        if (run_stage(stage, config, force).ran) ++ran;
    }
    return ran;
}

std::string report(const RunConfig& config) {
    const Paths paths(config);
    require_artifact(paths.summary(), "eval");
    require_artifact(paths.metrics_kv(), "eval");

    std::ifstream summary_in(paths.summary());
    std::stringstream summary;
    summary << summary_in.rdbuf();

    std::ostringstream out;
    out << "correspondence report\n";
    out << "=====================\n";
    out << summary.str();
    for (const auto& [key, value] : read_key_values(paths.metrics_kv())) {
        if (key == "baseline_ae_cm" || key == "ae_over_baseline") {
            out << key << " = " << value << "\n";
        }
    }
    out << "cumulative curve: " << paths.cumulative() << "\n";
    out << "\nfull-scale FAUST reference results (published; not comparable at desk scale):\n";
    char buf[160];
    out << "method                                        AE (cm)  worst AE  10cm-recall\n";
    for (const ReferenceResult& ref : kFullScaleReference) {
        std::snprintf(buf, sizeof(buf), "%-45s %7.2f %9.2f %12.3f\n", ref.label, ref.ae_cm,
                      ref.worst_ae_cm, ref.recall_10cm);
        out << buf;
    }
    atomic_write_text(paths.report_txt(), out.str());
    return out.str();
}

}  // namespace bodycorr
