#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bodycorr/body.hpp"
#include "bodycorr/network.hpp"
#include "bodycorr/segmentation.hpp"

namespace bodycorr {

// Flat run configuration for the pipeline. Presets fill every field; a config
// file then overrides individual keys ("key = value" lines, dotted sections).
struct RunConfig {
    std::string preset = "desk";
    std::uint64_t seed = 42;
    std::string out_dir = "runs/desk";

    BodySpec body;
    int pose_count = 8;       // training poses (pose 0 is the rest pose)
    double pose_scale = 0.8;  // fraction of the joint limits used when sampling

    int seg_k = 20;
    int seg_candidates = 100;
    int seg_initial_seeds = 10;
    int seg_max_selected = 5;
    int seg_min_gain = 1;
    double seg_min_gain_fraction = 0.01;

    int render_width = 64;
    int render_height = 64;
    int render_views = 16;
    double render_fov_deg = 60.0;
    double render_radius = 3.0;  // <= 0 derives it so the body spans half the image
    double render_noise = 0.0;

    NetConfig net;

    double match_threshold = 0.10;  // meters, spatial filter
    int eval_reference_poses = 2;
    std::vector<double> eval_radii_cm = {2, 5, 10, 20};

    static RunConfig preset_desk();
    static RunConfig preset_paper();
    static RunConfig from_preset(const std::string& name);

    // Applies "key = value" overrides; unknown keys throw.
    void apply(const std::string& key, const std::string& value);
    void apply_file(const std::string& path);

    // Reconciles derived fields (network resolution and seeds) and validates
    // ranges; call once after all overrides.
    void finalize();

    // Canonical serialization of the fields a stage depends on; upstream
    // stages are folded in so any upstream change invalidates downstream
    // artifacts.
    std::string stage_config_text(const std::string& stage) const;
    std::uint64_t stage_hash(const std::string& stage) const;

    double fov_radians() const;
    double camera_radius(double body_height) const;
};

// Thrown for malformed config files, unknown keys, or bad preset names;
// the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bodycorr
