#include "bodycorr/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "bodycorr/io.hpp"

namespace bodycorr {

void SegmentationSet::append(Segmentation seg) {
    if (!segs_.empty() && seg.labels.size() != region_id_.size()) {
        throw std::invalid_argument("SegmentationSet: segmentations cover different meshes");
    }
    const int nv = static_cast<int>(seg.labels.size());
    if (segs_.empty()) {
        region_id_ = seg.labels;
        std::map<int, int> remap;
        for (int v = 0; v < nv; ++v) {
            auto [it, fresh] = remap.emplace(region_id_[v], static_cast<int>(remap.size()));
            region_id_[v] = it->second;
        }
        region_count_ = static_cast<int>(remap.size());
    } else {
        std::map<std::pair<int, int>, int> remap;
        for (int v = 0; v < nv; ++v) {
            auto [it, fresh] = remap.emplace(std::make_pair(region_id_[v], seg.labels[v]),
                                             static_cast<int>(remap.size()));
            region_id_[v] = it->second;
        }
        region_count_ = static_cast<int>(remap.size());
    }
    segs_.push_back(std::move(seg));
}

int SegmentationSet::intersection_region_count_with(const Segmentation& seg) const {
    if (segs_.empty()) {
        std::map<int, int> distinct;
        for (int l : seg.labels) distinct.emplace(l, 0);
        return static_cast<int>(distinct.size());
    }
    if (seg.labels.size() != region_id_.size()) {
        throw std::invalid_argument("SegmentationSet: segmentations cover different meshes");
    }
    std::map<std::pair<int, int>, int> distinct;
    for (size_t v = 0; v < region_id_.size(); ++v) {
        distinct.emplace(std::make_pair(region_id_[v], seg.labels[v]), 0);
    }
    return static_cast<int>(distinct.size());
}

std::vector<int> farthest_point_sample(const TriMesh& mesh,
                                       const std::vector<int>& initial_seeds, int k) {
    const int nv = mesh.vertex_count();
    if (initial_seeds.empty()) {
        throw std::invalid_argument("farthest_point_sample: initial seeds must be nonempty");
    }
    if (k > nv) {
        throw std::invalid_argument("farthest_point_sample: k exceeds vertex count");
    }
    if (static_cast<int>(initial_seeds.size()) > k) {
        throw std::invalid_argument("farthest_point_sample: more initial seeds than k");
    }
    std::vector<char> chosen(nv, 0);
    for (int s : initial_seeds) {
        if (s < 0 || s >= nv) {
            throw std::invalid_argument("farthest_point_sample: seed index out of range");
        }
        if (chosen[s]) {
            throw std::invalid_argument("farthest_point_sample: duplicate initial seeds");
        }
        chosen[s] = 1;
    }

    std::vector<int> seeds = initial_seeds;
    Eigen::VectorXd min_dist = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());
    for (int s : seeds) min_dist = min_dist.cwiseMin(geodesic_distances(mesh, s));

    while (static_cast<int>(seeds.size()) < k) {
        int best = -1;
        double best_dist = -1.0;
        for (int v = 0; v < nv; ++v) {
            if (chosen[v]) continue;
            if (min_dist[v] > best_dist) {
                best_dist = min_dist[v];
                best = v;
            }
        }
        seeds.push_back(best);
        chosen[best] = 1;
        min_dist = min_dist.cwiseMin(geodesic_distances(mesh, best));
    }
    return seeds;
}

Segmentation voronoi_segmentation(const TriMesh& mesh, const std::vector<int>& seeds) {
    const int nv = mesh.vertex_count();
    if (seeds.empty()) throw std::invalid_argument("voronoi_segmentation: empty seeds");
    {
        std::vector<char> seen(nv, 0);
        for (int s : seeds) {
            if (s < 0 || s >= nv) {
                throw std::invalid_argument("voronoi_segmentation: seed index out of range");
            }
            if (seen[s]) throw std::invalid_argument("voronoi_segmentation: duplicate seeds");
            seen[s] = 1;
        }
    }

    Segmentation seg;
    seg.k = static_cast<int>(seeds.size());
    seg.seeds = seeds;
    seg.labels.assign(nv, 0);
    Eigen::VectorXd best = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());
    for (int s = 0; s < seg.k; ++s) {
        const Eigen::VectorXd dist = geodesic_distances(mesh, seeds[s]);
        for (int v = 0; v < nv; ++v) {
            if (dist[v] < best[v]) {  // strict: ties keep the lower seed index
                best[v] = dist[v];
                seg.labels[v] = s;
            }
        }
    }
    return seg;
}

Segmentation random_segmentation(const TriMesh& mesh, int k, int initial_count,
                                 std::uint64_t rng_seed) {
    const int nv = mesh.vertex_count();
    if (initial_count < 1 || initial_count > k) {
        throw std::invalid_argument("random_segmentation: initial_count must be in [1, k]");
    }
    if (k > nv) throw std::invalid_argument("random_segmentation: k exceeds vertex count");

    RandomStream rng(rng_seed);
    std::vector<int> initial;
    std::vector<char> taken(nv, 0);
    while (static_cast<int>(initial.size()) < initial_count) {
        const int v = rng.uniform_int(nv);
        if (!taken[v]) {
            taken[v] = 1;
            initial.push_back(v);
        }
    }
    Segmentation seg = voronoi_segmentation(mesh, farthest_point_sample(mesh, initial, k));
    seg.rng_seed = rng_seed;
    return seg;
}

SegmentationSet select_segmentation_set(const std::vector<Segmentation>& candidates,
                                        const SelectionOptions& options) {
    if (candidates.empty()) {
        throw std::invalid_argument("select_segmentation_set: empty candidate list");
    }
    RandomStream rng(options.rng_seed);
    std::vector<char> used(candidates.size(), 0);

    SegmentationSet set;
    const int first = rng.uniform_int(static_cast<int>(candidates.size()));
    set.append(candidates[static_cast<size_t>(first)]);
    used[static_cast<size_t>(first)] = 1;

    while (set.size() < options.max_count) {
        int best = -1;
        int best_count = -1;
        for (size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            const int count = set.intersection_region_count_with(candidates[c]);
            if (count > best_count) {
                best_count = count;
                best = static_cast<int>(c);
            }
        }
        if (best < 0) break;  // pool exhausted
        const int current = set.intersection_region_count();
        const int threshold = std::max(
            options.min_gain,
            static_cast<int>(std::ceil(options.min_gain_fraction * current)));
        if (best_count - current < threshold) break;
        set.append(candidates[static_cast<size_t>(best)]);
        used[static_cast<size_t>(best)] = 1;
    }
    return set;
}

void write_segmentation(const Segmentation& seg, const std::string& path) {
    std::ostringstream out;
    out << "k " << seg.k << " rng_seed " << seg.rng_seed << "\n";
    out << "seeds";
    for (int s : seg.seeds) out << ' ' << s;
    out << "\n";
    for (size_t v = 0; v < seg.labels.size(); ++v) {
        out << v << ' ' << seg.labels[v] << "\n";
    }
    atomic_write_text(path, out.str());
}

Segmentation read_segmentation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("segmentation: cannot open " + path);
    Segmentation seg;
    std::string tag;
    if (!(in >> tag >> seg.k) || tag != "k") {
        throw std::runtime_error("segmentation: bad header in " + path);
    }
    if (!(in >> tag >> seg.rng_seed) || tag != "rng_seed") {
        throw std::runtime_error("segmentation: bad header in " + path);
    }
    if (!(in >> tag) || tag != "seeds") {
        throw std::runtime_error("segmentation: bad header in " + path);
    }
    seg.seeds.resize(static_cast<size_t>(seg.k));
    for (int s = 0; s < seg.k; ++s) {
        if (!(in >> seg.seeds[static_cast<size_t>(s)])) {
            throw std::runtime_error("segmentation: truncated seed list in " + path);
        }
    }
    long vertex, label;
    std::vector<std::pair<long, long>> rows;
    while (in >> vertex >> label) rows.emplace_back(vertex, label);
    seg.labels.assign(rows.size(), 0);
    for (const auto& [v, l] : rows) {
        if (v < 0 || v >= static_cast<long>(rows.size())) {
            throw std::runtime_error("segmentation: vertex index out of range in " + path);
        }
        seg.labels[static_cast<size_t>(v)] = static_cast<int>(l);
    }
    return seg;
}

}  // namespace bodycorr
