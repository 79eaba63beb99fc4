#include "bodycorr/correspond.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bodycorr/io.hpp"

namespace bodycorr {

namespace {

// Union-find with path halving.
struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(static_cast<size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
    }
};

}  // namespace

KdTreeIndex::KdTreeIndex(const Eigen::MatrixXd& points, const std::vector<std::uint8_t>& usable)
    : points_(points) {
    for (int i = 0; i < points.rows(); ++i) {
        if (usable.empty() || usable[static_cast<size_t>(i)]) order_.push_back(i);
    }
    if (!order_.empty()) root_ = build(0, static_cast<int>(order_.size()), 0);
}

int KdTreeIndex::build(int begin, int end, int depth) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= 8) {
        nodes_[static_cast<size_t>(node_id)].begin = begin;
        nodes_[static_cast<size_t>(node_id)].end = end;
        return node_id;
    }
    const int axis = depth % static_cast<int>(points_.cols());
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         const double va = points_(a, axis), vb = points_(b, axis);
                         return va < vb || (va == vb && a < b);
                     });
    Node node;
    node.axis = axis;
    node.split = points_(order_[static_cast<size_t>(mid)], axis);
    node.point = order_[static_cast<size_t>(mid)];
    nodes_[static_cast<size_t>(node_id)] = node;
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid + 1, end, depth + 1);
    nodes_[static_cast<size_t>(node_id)].left = left;
    nodes_[static_cast<size_t>(node_id)].right = right;
    return node_id;
}

void KdTreeIndex::consider(int row, const Eigen::RowVectorXd& query, int& best,
                           double& best_dist) const {
    const double d = (points_.row(row) - query).squaredNorm();
    if (d < best_dist || (d == best_dist && row < best)) {
        best_dist = d;
        best = row;
    }
}

void KdTreeIndex::search(int node_id, const Eigen::RowVectorXd& query, int& best,
                         double& best_dist) const {
    const Node& node = nodes_[static_cast<size_t>(node_id)];
    if (node.axis < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            consider(order_[static_cast<size_t>(i)], query, best, best_dist);
        }
        return;
    }
    consider(node.point, query, best, best_dist);
    const double delta = query[node.axis] - node.split;
    const int near = delta < 0 ? node.left : node.right;
    const int far = delta < 0 ? node.right : node.left;
    search(near, query, best, best_dist);
    // Equal-distance candidates with a lower id may sit on the far side.
    if (delta * delta <= best_dist) search(far, query, best, best_dist);
}

std::pair<int, double> KdTreeIndex::nearest(const Eigen::RowVectorXd& query) const {
    int best = std::numeric_limits<int>::max();
    double best_dist = std::numeric_limits<double>::infinity();
    if (root_ >= 0) search(root_, query, best, best_dist);
    return {best, best_dist};
}

CorrespondenceSet nn_match(const Eigen::MatrixXd& source,
                           const std::vector<std::uint8_t>& source_usable,
                           const Eigen::MatrixXd& target,
                           const std::vector<std::uint8_t>& target_usable, NnBackend backend) {
    if (source.cols() != target.cols()) {
        throw std::invalid_argument("nn_match: descriptor dimension mismatch");
    }
    int usable_targets = 0;
    for (int t = 0; t < target.rows(); ++t) {
        if (target_usable.empty() || target_usable[static_cast<size_t>(t)]) ++usable_targets;
    }
    if (usable_targets == 0) throw std::invalid_argument("nn_match: empty target set");

    CorrespondenceSet set;
    set.matches.reserve(static_cast<size_t>(source.rows()));

    if (backend == NnBackend::KdTree) {
        const KdTreeIndex index(target, target_usable);
        for (int s = 0; s < source.rows(); ++s) {
            if (!source_usable.empty() && !source_usable[static_cast<size_t>(s)]) continue;
            const auto [best, dist] = index.nearest(source.row(s));
            set.matches.push_back({s, best, std::sqrt(dist)});
        }
        return set;
    }
    for (int s = 0; s < source.rows(); ++s) {
        if (!source_usable.empty() && !source_usable[static_cast<size_t>(s)]) continue;
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int t = 0; t < target.rows(); ++t) {
            if (!target_usable.empty() && !target_usable[static_cast<size_t>(t)]) continue;
            const double d = (target.row(t) - source.row(s)).squaredNorm();
            if (d < best_dist) {  // strict: ties keep the lowest target id
                best_dist = d;
                best = t;
            }
        }
        set.matches.push_back({s, best, std::sqrt(best_dist)});
    }
    return set;
}

CorrespondenceSet spatial_filter(const CorrespondenceSet& matches,
                                 const Eigen::Matrix<double, Eigen::Dynamic, 3>& target_points,
                                 const FilterConfig& config) {
    if (matches.kind != MatchKind::Pixel) {
        throw std::invalid_argument("spatial_filter: requires pixel-kind matches");
    }
    if (!(config.threshold > 0)) {
        throw std::invalid_argument("spatial_filter: threshold must be positive");
    }
    const int w = matches.source_grid_width, h = matches.source_grid_height;
    if (w <= 0 || h <= 0) {
        throw std::invalid_argument("spatial_filter: matches carry no source grid");
    }
    std::vector<int> match_at(static_cast<size_t>(w) * h, -1);
    for (size_t m = 0; m < matches.matches.size(); ++m) {
        const int pix = matches.matches[m].source_id;
        if (pix < 0 || pix >= w * h) {
            throw std::invalid_argument("spatial_filter: source pixel out of grid");
        }
        match_at[static_cast<size_t>(pix)] = static_cast<int>(m);
    }
    auto target_point = [&](int m) {
        const int t = matches.matches[static_cast<size_t>(m)].target_id;
        if (t < 0 || t >= target_points.rows()) {
            throw std::invalid_argument("spatial_filter: missing geometry for matched target");
        }
        return target_points.row(t);
    };

    DisjointSets sets(static_cast<int>(matches.matches.size()));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int m = match_at[static_cast<size_t>(y) * w + x];
            if (m < 0) continue;
            // Horizontal and vertical neighbors only.
            if (x + 1 < w) {
                const int m2 = match_at[static_cast<size_t>(y) * w + x + 1];
                if (m2 >= 0 && (target_point(m) - target_point(m2)).norm() <= config.threshold) {
                    sets.unite(m, m2);
                }
            }
            if (y + 1 < h) {
                const int m2 = match_at[(static_cast<size_t>(y) + 1) * w + x];
                if (m2 >= 0 && (target_point(m) - target_point(m2)).norm() <= config.threshold) {
                    sets.unite(m, m2);
                }
            }
        }
    }

    // Largest component; ties resolved toward the lowest contained pixel index.
    std::vector<int> size(matches.matches.size(), 0);
    std::vector<int> lowest_pixel(matches.matches.size(), std::numeric_limits<int>::max());
    for (size_t m = 0; m < matches.matches.size(); ++m) {
        const int root = sets.find(static_cast<int>(m));
        size[static_cast<size_t>(root)] += 1;
        lowest_pixel[static_cast<size_t>(root)] =
            std::min(lowest_pixel[static_cast<size_t>(root)], matches.matches[m].source_id);
    }
    int best_root = -1;
    for (size_t r = 0; r < matches.matches.size(); ++r) {
        if (size[r] == 0) continue;
        if (best_root < 0 || size[r] > size[static_cast<size_t>(best_root)] ||
            (size[r] == size[static_cast<size_t>(best_root)] &&
             lowest_pixel[r] < lowest_pixel[static_cast<size_t>(best_root)])) {
            best_root = static_cast<int>(r);
        }
    }

    CorrespondenceSet out;
    out.kind = matches.kind;
    out.source_grid_width = w;
    out.source_grid_height = h;
    for (size_t m = 0; m < matches.matches.size(); ++m) {
        if (sets.find(static_cast<int>(m)) == best_root) out.matches.push_back(matches.matches[m]);
    }
    return out;
}

void write_correspondences(const CorrespondenceSet& set, const std::string& path) {
    std::ostringstream out;
    out << "source_id,target_id,feature_distance\n";
    char buf[64];
    for (const Correspondence& c : set.matches) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.9e\n", c.source_id, c.target_id,
                      c.feature_distance);
        out << buf;
    }
    atomic_write_text(path, out.str());
}

CorrespondenceSet read_correspondences(const std::string& path, MatchKind kind) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("correspondences: cannot open " + path);
    CorrespondenceSet set;
    set.kind = kind;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("correspondences: empty file " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Correspondence c;
        if (std::sscanf(line.c_str(), "%d,%d,%lf", &c.source_id, &c.target_id,
                        &c.feature_distance) != 3) {
            throw std::runtime_error("correspondences: bad row in " + path);
        }
        set.matches.push_back(c);
    }
    return set;
}

}  // namespace bodycorr
