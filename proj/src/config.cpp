#include "bodycorr/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bodycorr/io.hpp"

namespace bodycorr {

RunConfig RunConfig::preset_desk() {
    RunConfig cfg;
    cfg.preset = "desk";
    // Closer than the half-height framing: at 64x64 the limbs need the extra
    // pixels to be resolvable at all.
    cfg.render_radius = 1.5;
    cfg.net = NetConfig::desk(64, 8);
    cfg.net.iterations = 20000;
    return cfg;
}

RunConfig RunConfig::preset_paper() {
    RunConfig cfg;
    cfg.preset = "paper";
    cfg.out_dir = "runs/paper";
    cfg.body.grid_resolution = 96;
    cfg.pose_count = 16;
    cfg.seg_k = 500;
    cfg.seg_candidates = 100;
    cfg.seg_initial_seeds = 10;
    cfg.seg_max_selected = 5;
    cfg.render_width = 512;
    cfg.render_height = 512;
    cfg.render_views = 144;
    cfg.render_radius = 0;  // derived so the body spans half the image height
    cfg.net = NetConfig::paper();
    return cfg;
}

RunConfig RunConfig::from_preset(const std::string& name) {
    if (name == "desk") return preset_desk();
    if (name == "paper") return preset_paper();
    throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
    }
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "preset") {
        *this = from_preset(value);
    } else if (key == "seed") {
        seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "out") {
        out_dir = value;
    } else if (key == "body.grid_resolution") {
        body.grid_resolution = static_cast<int>(parse_int(key, value));
    } else if (key == "body.asymmetry") {
        body.asymmetry = parse_double(key, value);
    } else if (key == "body.rng_seed") {
        body.rng_seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "body.pose_count") {
        pose_count = static_cast<int>(parse_int(key, value));
    } else if (key == "body.pose_scale") {
        pose_scale = parse_double(key, value);
    } else if (key == "seg.k") {
        seg_k = static_cast<int>(parse_int(key, value));
    } else if (key == "seg.candidates") {
        seg_candidates = static_cast<int>(parse_int(key, value));
    } else if (key == "seg.initial_seeds") {
        seg_initial_seeds = static_cast<int>(parse_int(key, value));
    } else if (key == "seg.max_selected") {
        seg_max_selected = static_cast<int>(parse_int(key, value));
    } else if (key == "seg.min_gain") {
        seg_min_gain = static_cast<int>(parse_int(key, value));
    } else if (key == "seg.min_gain_fraction") {
        seg_min_gain_fraction = parse_double(key, value);
    } else if (key == "render.width") {
        render_width = static_cast<int>(parse_int(key, value));
    } else if (key == "render.height") {
        render_height = static_cast<int>(parse_int(key, value));
    } else if (key == "render.views") {
        render_views = static_cast<int>(parse_int(key, value));
    } else if (key == "render.fov_deg") {
        render_fov_deg = parse_double(key, value);
    } else if (key == "render.radius") {
        render_radius = parse_double(key, value);
    } else if (key == "render.noise") {
        render_noise = parse_double(key, value);
    } else if (key == "net.d") {
        net.descriptor_dim = static_cast<int>(parse_int(key, value));
    } else if (key == "net.lr") {
        net.learning_rate = parse_double(key, value);
    } else if (key == "net.momentum") {
        net.momentum = parse_double(key, value);
    } else if (key == "net.batch") {
        net.batch_size = static_cast<int>(parse_int(key, value));
    } else if (key == "net.iterations") {
        net.iterations = static_cast<int>(parse_int(key, value));
    } else if (key == "net.log_every") {
        net.log_every = static_cast<int>(parse_int(key, value));
    } else if (key == "net.keypoint_radius") {
        net.keypoint_radius = parse_double(key, value);
    } else if (key == "match.threshold") {
        match_threshold = parse_double(key, value);
    } else if (key == "eval.reference_poses") {
        eval_reference_poses = static_cast<int>(parse_int(key, value));
    } else if (key == "eval.radii") {
        eval_radii_cm = parse_list(key, value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

void RunConfig::apply_file(const std::string& path) {
    std::vector<std::pair<std::string, std::string>> entries;
    try {
        entries = read_key_values(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    // A preset line resets everything, so honor it first regardless of order.
    for (const auto& [key, value] : entries) {
        if (key == "preset") apply(key, value);
    }
    for (const auto& [key, value] : entries) {
        if (key != "preset") apply(key, value);
    }
}

void RunConfig::finalize() {
    if (pose_count < 1) throw ConfigError("config: body.pose_count must be at least 1");
    if (render_views < 1) throw ConfigError("config: render.views must be at least 1");
    if (seg_k < 1 || seg_candidates < 1 || seg_initial_seeds < 1 || seg_max_selected < 1) {
        throw ConfigError("config: segmentation counts must be positive");
    }
    if (seg_initial_seeds > seg_k) {
        throw ConfigError("config: seg.initial_seeds must not exceed seg.k");
    }
    if (!(match_threshold > 0)) throw ConfigError("config: match.threshold must be positive");
    eval_reference_poses = std::min(eval_reference_poses, pose_count);

    // Keep the network resolution in lockstep with the renderer; a rebuilt
    // schedule keeps the training hyperparameters.
    const bool upsample_matches = [&] {
        for (const LayerSpec& layer : net.layers) {
            if (layer.kind == LayerKind::Upsample && layer.out_channels != net.descriptor_dim) {
                return false;
            }
        }
        return true;
    }();
    if (net.input_width != render_width || net.input_height != render_height ||
        !upsample_matches) {
        if (render_width != render_height) {
            throw ConfigError("config: render image must be square for the desk schedule");
        }
        NetConfig rebuilt;
        try {
            rebuilt = NetConfig::desk(render_width, net.descriptor_dim);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: cannot build schedule: ") + e.what());
        }
        rebuilt.lrn = net.lrn;
        rebuilt.learning_rate = net.learning_rate;
        rebuilt.momentum = net.momentum;
        rebuilt.batch_size = net.batch_size;
        rebuilt.iterations = net.iterations;
        rebuilt.log_every = net.log_every;
        rebuilt.keypoint_radius = net.keypoint_radius;
        net = rebuilt;
    }
    net.rng_seed = seed;
    try {
        net.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

static void append_common(std::ostringstream& out, const RunConfig& c) {
    out << "preset " << c.preset << " seed " << c.seed << "\n";
}

std::string RunConfig::stage_config_text(const std::string& stage) const {
    std::ostringstream out;
    if (stage == "synth") {
        append_common(out, *this);
        out << "body " << body.torso_length << ' ' << body.torso_radius << ' ' << body.head_length
            << ' ' << body.head_radius << ' ' << body.upper_arm_length << ' '
            << body.upper_arm_radius << ' ' << body.forearm_length << ' ' << body.forearm_radius
            << ' ' << body.thigh_length << ' ' << body.thigh_radius << ' ' << body.shin_length
            << ' ' << body.shin_radius << ' ' << body.shoulder_width << ' ' << body.hip_width
            << ' ' << body.asymmetry << ' ' << body.grid_resolution << ' ' << body.rng_seed
            << "\n";
        out << "poses " << pose_count << ' ' << pose_scale << "\n";
        return out.str();
    }
    if (stage == "segment") {
        out << stage_config_text("synth");
        out << "seg " << seg_k << ' ' << seg_candidates << ' ' << seg_initial_seeds << ' '
            << seg_max_selected << ' ' << seg_min_gain << ' ' << seg_min_gain_fraction << "\n";
        return out.str();
    }
    if (stage == "render") {
        out << stage_config_text("segment");
        out << "render " << render_width << 'x' << render_height << ' ' << render_views << ' '
            << render_fov_deg << ' ' << render_radius << ' ' << render_noise << "\n";
        return out.str();
    }
    if (stage == "train") {
        out << stage_config_text("render");
        out << "net " << net.serialize();
        return out.str();
    }
    if (stage == "extract") {
        out << stage_config_text("train");
        out << "extract " << eval_reference_poses << "\n";
        return out.str();
    }
    if (stage == "match") {
        out << stage_config_text("extract");
        out << "match " << match_threshold << "\n";
        return out.str();
    }
    if (stage == "eval" || stage == "report") {
        out << stage_config_text("match");
        out << "eval";
        for (double r : eval_radii_cm) out << ' ' << r;
        out << "\n";
        return out.str();
    }
    throw ConfigError("config: unknown stage '" + stage + "'");
}

std::uint64_t RunConfig::stage_hash(const std::string& stage) const {
    return fnv1a_hash(stage_config_text(stage));
}

double RunConfig::fov_radians() const { return render_fov_deg * M_PI / 180.0; }

double RunConfig::camera_radius(double body_height) const {
    if (render_radius > 0) return render_radius;
    // Body spans roughly half the image height.
    return body_height / std::tan(fov_radians() / 2);
}

}  // namespace bodycorr
