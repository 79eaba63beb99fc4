#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bodycorr/render.hpp"

namespace bodycorr {

enum class MatchKind { Pixel, Vertex };

struct Correspondence {
    int source_id;
    int target_id;
    double feature_distance;
};

struct CorrespondenceSet {
    MatchKind kind = MatchKind::Vertex;
    // Source pixel grid, needed by the spatial filter for pixel-kind matches.
    int source_grid_width = 0;
    int source_grid_height = 0;
    std::vector<Correspondence> matches;
};

enum class NnBackend { BruteForce, KdTree };

// For every usable source row, the target row minimizing Euclidean descriptor
// distance; ties go to the lowest target id. The kd-tree backend is exact and
// returns results identical to brute force.
CorrespondenceSet nn_match(const Eigen::MatrixXd& source,
                           const std::vector<std::uint8_t>& source_usable,
                           const Eigen::MatrixXd& target,
                           const std::vector<std::uint8_t>& target_usable,
                           NnBackend backend = NnBackend::BruteForce);

// Exact nearest-neighbor index over row vectors, with the same tie rule as the
// brute-force scan.
class KdTreeIndex {
public:
    KdTreeIndex(const Eigen::MatrixXd& points, const std::vector<std::uint8_t>& usable);
    // Returns (row id, squared distance).
    std::pair<int, double> nearest(const Eigen::RowVectorXd& query) const;

private:
    struct Node {
        int axis = -1;     // -1 marks a leaf
        double split = 0;
        int point = -1;    // leaf payload (row id), bulk leaves hold ranges
        int left = -1, right = -1;
        int begin = 0, end = 0;
    };
    int build(int begin, int end, int depth);
    void search(int node, const Eigen::RowVectorXd& query, int& best, double& best_dist) const;
    void consider(int row, const Eigen::RowVectorXd& query, int& best, double& best_dist) const;

    const Eigen::MatrixXd& points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

struct FilterConfig {
    double threshold = 0.10;  // meters
};

// Spatial-consistency filter for pixel-kind matches: a graph over matched
// source pixels connects horizontal/vertical neighbors whose matched targets
// lie within the threshold; only the largest connected component survives
// (ties: the component containing the lowest pixel index).
CorrespondenceSet spatial_filter(const CorrespondenceSet& matches,
                                 const Eigen::Matrix<double, Eigen::Dynamic, 3>& target_points,
                                 const FilterConfig& config);

// CSV with a "source_id,target_id,feature_distance" header line.
void write_correspondences(const CorrespondenceSet& set, const std::string& path);
CorrespondenceSet read_correspondences(const std::string& path, MatchKind kind);

}  // namespace bodycorr
