#pragma once

#include <string>
#include <vector>

#include "bodycorr/config.hpp"

namespace bodycorr {

// Pipeline stages in execution order.
inline const std::vector<std::string> kStageOrder = {
    "synth", "segment", "render", "train", "extract", "match", "eval",
};

struct StageResult {
    bool ran = false;  // false when artifacts were already up to date
};

// Runs one stage: checks upstream manifests against the current config,
// skips when this stage's artifacts are already current (unless forced),
// writes artifacts atomically, and records a manifest with the config hash
// and seed. Throws StageError on missing or stale upstream artifacts.
StageResult run_stage(const std::string& stage, const RunConfig& config, bool force = false);

// Runs every stage in order; returns how many actually executed.
int run_all(const RunConfig& config, bool force = false);

// Renders the evaluation summary (pair table, recall rows, reference block);
// requires eval artifacts.
std::string report(const RunConfig& config);

struct StageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Artifact layout helpers (paths under config.out_dir).
std::string stage_manifest_path(const RunConfig& config, const std::string& stage);

}  // namespace bodycorr
