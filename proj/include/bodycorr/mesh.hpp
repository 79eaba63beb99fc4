#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace bodycorr {

// Triangle mesh with the derived undirected edge graph used for geodesics.
// Vertices are rows of `vertices` (meters); faces index into them.
struct TriMesh {
    Eigen::Matrix<double, Eigen::Dynamic, 3> vertices;
    Eigen::Matrix<int, Eigen::Dynamic, 3> faces;

    struct Neighbor {
        int vertex;
        double length;  // Euclidean edge length, meters
    };
    // adjacency[v] lists neighbors of v sorted by vertex index.
    std::vector<std::vector<Neighbor>> adjacency;
    int edge_count = 0;

    int vertex_count() const { return static_cast<int>(vertices.rows()); }
    int face_count() const { return static_cast<int>(faces.rows()); }
};

// Builds the edge graph and validates: face indices in range, no degenerate
// face, edge graph connected. Throws std::runtime_error with a distinct
// message per failure.
TriMesh make_mesh(Eigen::Matrix<double, Eigen::Dynamic, 3> vertices,
                  Eigen::Matrix<int, Eigen::Dynamic, 3> faces);

// Plain-text indexed triangle format: "v x y z" and "f i j k" lines with
// 1-based face indices, '#' comments. Same validation as make_mesh.
TriMesh load_mesh(const std::string& path);
void save_mesh(const TriMesh& mesh, const std::string& path);

// Shortest-path distances on the edge graph from `source` (Dijkstra).
Eigen::VectorXd geodesic_distances(const TriMesh& mesh, int source);

}  // namespace bodycorr
