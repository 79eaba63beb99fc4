#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bodycorr/correspond.hpp"
#include "bodycorr/mesh.hpp"

namespace bodycorr {

enum class ErrorMetric { Euclidean, Geodesic };

// Per-match error in centimeters: distance between the matched target and the
// ground-truth target. Euclidean uses target positions; geodesic uses
// shortest paths on the target mesh (one Dijkstra per distinct true target).
std::vector<double> match_errors(const CorrespondenceSet& matches,
                                 const std::vector<int>& true_target,
                                 const Eigen::Matrix<double, Eigen::Dynamic, 3>& target_positions,
                                 ErrorMetric metric = ErrorMetric::Euclidean,
                                 const TriMesh* target_mesh = nullptr);

struct ErrorReport {
    std::vector<double> pair_ae;       // mean error per evaluated pair, cm
    double ae = 0;                     // mean over all matches of all pairs, cm
    double worst_ae = 0;               // max of pair_ae
    std::vector<double> radii_cm;      // recall radii
    std::vector<double> recall;        // fraction of matches within each radius
    std::vector<std::pair<double, double>> cumulative;  // (radius_cm, fraction), 1 cm steps
};

// Summary over one or more evaluated pairs.
ErrorReport summarize(const std::vector<std::vector<double>>& errors_per_pair,
                      const std::vector<double>& radii_cm);

void write_errors_csv(const std::vector<double>& errors_cm, const std::string& path);
void write_cumulative_csv(const ErrorReport& report, const std::string& path);
std::string report_summary_text(const ErrorReport& report);

// Published full-scale FAUST benchmark results for this pipeline family;
// annotation only. They require the original datasets and a full-length GPU
// training run, so nothing at this scale should be compared against them
// programmatically.
struct ReferenceResult {
    const char* label;
    double ae_cm;
    double worst_ae_cm;
    double recall_10cm;
};
inline constexpr ReferenceResult kFullScaleReference[] = {
    {"intra-subject, NN + registration refinement", 2.00, 9.98, 0.975},
    {"intra-subject, NN only", 5.65, 18.67, 0.918},
    {"inter-subject, NN + registration refinement", 2.35, 10.12, 0.972},
    {"inter-subject, NN only", 5.73, 18.03, 0.917},
};

}  // namespace bodycorr
