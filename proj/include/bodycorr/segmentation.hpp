#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bodycorr/mesh.hpp"
#include "bodycorr/random.hpp"

namespace bodycorr {

// Partition of a mesh into k regions, each the geodesic Voronoi cell of a seed.
struct Segmentation {
    std::vector<int> labels;  // per-vertex region id in [0, k)
    std::vector<int> seeds;   // region id -> seed vertex
    int k = 0;
    std::uint64_t rng_seed = 0;  // seed that generated this segmentation (0 if hand-built)
};

// Ordered collection of segmentations over one mesh; the number of distinct
// per-vertex label vectors is tracked incrementally.
class SegmentationSet {
public:
    SegmentationSet() = default;

    void append(Segmentation seg);
    int intersection_region_count() const { return region_count_; }
    // Region count the set would have after appending `seg`, without mutating.
    int intersection_region_count_with(const Segmentation& seg) const;

    const std::vector<Segmentation>& segmentations() const { return segs_; }
    bool empty() const { return segs_.empty(); }
    int size() const { return static_cast<int>(segs_.size()); }
    const Segmentation& operator[](int i) const { return segs_[static_cast<size_t>(i)]; }

private:
    std::vector<Segmentation> segs_;
    // Per-vertex equivalence class of the label vector seen so far.
    std::vector<int> region_id_;
    int region_count_ = 0;
};

// Appends seeds until `k` are chosen; each appended seed maximizes the minimum
// geodesic distance to all previously chosen seeds, ties broken by lowest
// vertex index. Initial seeds must be distinct and nonempty.
std::vector<int> farthest_point_sample(const TriMesh& mesh,
                                       const std::vector<int>& initial_seeds, int k);

// Labels every vertex with the index of its geodesically nearest seed, ties
// broken by lowest seed index.
Segmentation voronoi_segmentation(const TriMesh& mesh, const std::vector<int>& seeds);

// Random segmentation as one candidate: `initial_count` random distinct
// vertices, extended to k seeds by farthest-point sampling, then the Voronoi
// partition of the full seed set.
Segmentation random_segmentation(const TriMesh& mesh, int k, int initial_count,
                                 std::uint64_t rng_seed);

struct SelectionOptions {
    int max_count = 10;
    int min_gain = 1;                // absolute floor on the per-step region gain
    double min_gain_fraction = 0.01; // relative floor: fraction of the current count
    std::uint64_t rng_seed = 0;      // seeds the uniformly random first pick
};

// Greedy selection: first candidate uniformly at random, then each step picks
// the remaining candidate maximizing the intersection region count (ties by
// lowest candidate index). Stops at max_count or when the best gain drops
// below max(min_gain, ceil(min_gain_fraction * current count)).
SegmentationSet select_segmentation_set(const std::vector<Segmentation>& candidates,
                                        const SelectionOptions& options);

inline int intersection_region_count(const SegmentationSet& set) {
    return set.intersection_region_count();
}

// Text format: header lines with k, rng_seed and the seed vertices, then one
// "vertex_index label" pair per line.
void write_segmentation(const Segmentation& seg, const std::string& path);
Segmentation read_segmentation(const std::string& path);

}  // namespace bodycorr
