#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bodycorr/mesh.hpp"
#include "bodycorr/random.hpp"

namespace bodycorr {

// Capsule-skeleton humanoid. All lengths and radii in meters; the mesh is
// extracted from the union of the bone capsules, so identical topology is
// shared by every pose of the same spec.
struct BodySpec {
    double torso_length = 0.60, torso_radius = 0.14;
    double head_length = 0.22, head_radius = 0.095;
    double upper_arm_length = 0.30, upper_arm_radius = 0.048;
    double forearm_length = 0.28, forearm_radius = 0.042;
    double thigh_length = 0.42, thigh_radius = 0.065;
    double shin_length = 0.42, shin_radius = 0.05;
    double shoulder_width = 0.32;  // distance between the two shoulder joints
    // Wide enough that the legs never fuse on the extraction grid.
    double hip_width = 0.23;
    // Left/right limb proportion skew (left scaled by 1+a, right by 1-a).
    // Real bodies are not mirror-perfect; a perfectly symmetric shape makes
    // depth-only left/right assignment ill-posed. 0 gives an exact mirror.
    double asymmetry = 0.08;
    // Surface-extraction grid cells along the vertical axis; higher is denser.
    int grid_resolution = 48;
    std::uint64_t rng_seed = 0;

    void validate() const;  // throws on non-positive dimensions
    // Proportions jittered by up to +-10% with the spec's rng_seed; stands in
    // for different subjects.
    BodySpec varied() const;
};

enum BoneId : int {
    kTorso = 0,
    kHead,
    kUpperArmLeft,
    kUpperArmRight,
    kForearmLeft,
    kForearmRight,
    kThighLeft,
    kThighRight,
    kShinLeft,
    kShinRight,
    kBoneCount,
};

struct Bone {
    std::string name;
    int parent;               // -1 for the torso root
    Eigen::Vector3d joint;    // rest-pose pivot the bone rotates about
    Eigen::Vector3d head;     // rest-pose capsule endpoints
    Eigen::Vector3d tail;
    double radius;
};

struct Skeleton {
    std::array<Bone, kBoneCount> bones;
};

// Per-joint rotation as intrinsic ZYX Euler angles (radians). The root
// rotation/translation moves the whole body rigidly.
struct Pose {
    Eigen::Vector3d root = Eigen::Vector3d::Zero();
    Eigen::Vector3d root_translation = Eigen::Vector3d::Zero();
    Eigen::Vector3d neck = Eigen::Vector3d::Zero();
    Eigen::Vector3d shoulder_left = Eigen::Vector3d::Zero();
    Eigen::Vector3d shoulder_right = Eigen::Vector3d::Zero();
    Eigen::Vector3d elbow_left = Eigen::Vector3d::Zero();
    Eigen::Vector3d elbow_right = Eigen::Vector3d::Zero();
    Eigen::Vector3d hip_left = Eigen::Vector3d::Zero();
    Eigen::Vector3d hip_right = Eigen::Vector3d::Zero();
    Eigen::Vector3d knee_left = Eigen::Vector3d::Zero();
    Eigen::Vector3d knee_right = Eigen::Vector3d::Zero();
};

// Component-wise angle limits. They keep poses free of gross
// self-intersection and keep linear-blend skinning near-isometric: within
// these ranges geodesic distances move by well under 15%.
struct JointLimits {
    Eigen::Vector3d neck = Eigen::Vector3d(0.18, 0.2, 0.18);
    Eigen::Vector3d shoulder = Eigen::Vector3d(0.35, 0.2, 0.45);
    Eigen::Vector3d elbow = Eigen::Vector3d(0.1, 0.65, 0.1);
    Eigen::Vector3d hip = Eigen::Vector3d(0.3, 0.12, 0.22);
    Eigen::Vector3d knee = Eigen::Vector3d(0.65, 0.1, 0.1);
};

struct GeneratedBody {
    TriMesh mesh;  // rest pose
    Skeleton skeleton;
    Eigen::MatrixXd weights;  // vertex_count x kBoneCount, rows sum to 1
};

struct Keypoint {
    std::string name;
    int vertex;
};

// Deterministic rest-pose mesh plus skinning weights for the spec.
GeneratedBody generate_body(const BodySpec& spec);

// Linear-blend skinning; faces are shared with the rest mesh, so vertex i in
// any pose corresponds to vertex i at rest. Throws if any angle exceeds the
// limits or the binding does not match the mesh.
TriMesh pose_body(const GeneratedBody& body, const Pose& pose,
                  const JointLimits& limits = JointLimits());

// 33 named landmark vertices (joints, extremities, midpoints), all distinct.
std::vector<Keypoint> keypoints(const GeneratedBody& body);

// Uniform pose within scale*limits on every joint component; root fixed.
Pose random_pose(RandomStream& rng, const JointLimits& limits = JointLimits(),
                 double scale = 0.8);

// Flat key-value pose files.
void write_pose(const Pose& pose, const std::string& path);
Pose read_pose(const std::string& path);

void write_keypoints(const std::vector<Keypoint>& points, const std::string& path);
std::vector<Keypoint> read_keypoints(const std::string& path);

}  // namespace bodycorr
