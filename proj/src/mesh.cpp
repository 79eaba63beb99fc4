#include "bodycorr/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "bodycorr/io.hpp"

namespace bodycorr {

namespace {

void check_faces(const Eigen::Matrix<double, Eigen::Dynamic, 3>& vertices,
                 const Eigen::Matrix<int, Eigen::Dynamic, 3>& faces) {
    const int nv = static_cast<int>(vertices.rows());
    for (int f = 0; f < faces.rows(); ++f) {
        const int a = faces(f, 0), b = faces(f, 1), c = faces(f, 2);
        if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv) {
            throw std::runtime_error("mesh: face " + std::to_string(f) +
                                     " has vertex index out of range");
        }
        if (a == b || b == c || a == c) {
            throw std::runtime_error("mesh: face " + std::to_string(f) +
                                     " is degenerate (repeated vertex index)");
        }
    }
}

}  // namespace

TriMesh make_mesh(Eigen::Matrix<double, Eigen::Dynamic, 3> vertices,
                  Eigen::Matrix<int, Eigen::Dynamic, 3> faces) {
    check_faces(vertices, faces);

    TriMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.faces = std::move(faces);

    const int nv = mesh.vertex_count();
    std::vector<std::vector<int>> neighbor_sets(nv);
    auto add_edge = [&](int a, int b) {
        auto& set = neighbor_sets[a];
        if (std::find(set.begin(), set.end(), b) == set.end()) set.push_back(b);
    };
    for (int f = 0; f < mesh.faces.rows(); ++f) {
        const int idx[3] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
        for (int e = 0; e < 3; ++e) {
            add_edge(idx[e], idx[(e + 1) % 3]);
            add_edge(idx[(e + 1) % 3], idx[e]);
        }
    }

    mesh.adjacency.resize(nv);
    mesh.edge_count = 0;
    for (int v = 0; v < nv; ++v) {
        auto& set = neighbor_sets[v];
        std::sort(set.begin(), set.end());
        mesh.adjacency[v].reserve(set.size());
        for (int u : set) {
            const double len = (mesh.vertices.row(v) - mesh.vertices.row(u)).norm();
            mesh.adjacency[v].push_back({u, len});
            if (u > v) ++mesh.edge_count;
        }
    }

    // Geodesics need a single connected component; isolated vertices count as
    // disconnected too.
    if (nv > 0) {
        std::vector<char> seen(nv, 0);
        std::vector<int> stack = {0};
        seen[0] = 1;
        int reached = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (const auto& nb : mesh.adjacency[v]) {
                if (!seen[nb.vertex]) {
                    seen[nb.vertex] = 1;
                    ++reached;
                    stack.push_back(nb.vertex);
                }
            }
        }
        if (reached != nv) {
            throw std::runtime_error("mesh: edge graph is disconnected (" +
                                     std::to_string(reached) + " of " +
                                     std::to_string(nv) + " vertices reachable)");
        }
    }
    return mesh;
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("mesh: cannot open " + path);

    std::vector<Eigen::RowVector3d> verts;
    std::vector<Eigen::RowVector3i> faces;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) {
                throw std::runtime_error("mesh: parse failure at line " +
                                         std::to_string(line_no) + " of " + path);
            }
            verts.emplace_back(x, y, z);
        } else if (tag == "f") {
            long a, b, c;
            if (!(ss >> a >> b >> c)) {
                throw std::runtime_error("mesh: parse failure at line " +
                                         std::to_string(line_no) + " of " + path);
            }
            // 1-based on disk
            faces.emplace_back(static_cast<int>(a - 1), static_cast<int>(b - 1),
                               static_cast<int>(c - 1));
        } else {
            throw std::runtime_error("mesh: parse failure at line " +
                                     std::to_string(line_no) + " of " + path +
                                     " (unknown tag '" + tag + "')");
        }
    }

    Eigen::Matrix<double, Eigen::Dynamic, 3> V(verts.size(), 3);
    for (size_t i = 0; i < verts.size(); ++i) V.row(static_cast<int>(i)) = verts[i];
    Eigen::Matrix<int, Eigen::Dynamic, 3> F(faces.size(), 3);
    for (size_t i = 0; i < faces.size(); ++i) F.row(static_cast<int>(i)) = faces[i];
    return make_mesh(std::move(V), std::move(F));
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
    std::ostringstream out;
    char buf[128];
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", mesh.vertices(v, 0),
                      mesh.vertices(v, 1), mesh.vertices(v, 2));
        out << buf;
    }
    for (int f = 0; f < mesh.face_count(); ++f) {
        out << "f " << mesh.faces(f, 0) + 1 << ' ' << mesh.faces(f, 1) + 1 << ' '
            << mesh.faces(f, 2) + 1 << '\n';
    }
    atomic_write_text(path, out.str());
}

Eigen::VectorXd geodesic_distances(const TriMesh& mesh, int source) {
    const int nv = mesh.vertex_count();
    if (source < 0 || source >= nv) {
        throw std::invalid_argument("geodesic_distances: source index " +
                                    std::to_string(source) + " out of range");
    }
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());
    dist[source] = 0.0;

    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, v] = queue.top();
        queue.pop();
        if (d > dist[v]) continue;
        for (const auto& nb : mesh.adjacency[v]) {
            const double cand = d + nb.length;
            if (cand < dist[nb.vertex]) {
                dist[nb.vertex] = cand;
                queue.emplace(cand, nb.vertex);
            }
        }
    }
    return dist;
}

}  // namespace bodycorr
