#include <doctest.h>

#include <Eigen/Geometry>
#include <filesystem>
#include <set>

#include "bodycorr/body.hpp"
#include "oracles.hpp"

using namespace bodycorr;

namespace {

BodySpec test_spec() {
    BodySpec spec;
    spec.grid_resolution = 40;  // keeps the suite fast
    return spec;
}

}  // namespace

TEST_CASE("generation is deterministic and density scales") {
    const BodySpec spec = test_spec();
    const GeneratedBody a = generate_body(spec);
    const GeneratedBody b = generate_body(spec);
    REQUIRE(a.mesh.vertex_count() == b.mesh.vertex_count());
    CHECK((a.mesh.vertices - b.mesh.vertices).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.mesh.faces - b.mesh.faces).cwiseAbs().maxCoeff() == 0);
    CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() == 0.0);

    BodySpec denser = spec;
    denser.grid_resolution *= 2;
    CHECK(generate_body(denser).mesh.vertex_count() > a.mesh.vertex_count());
}

TEST_CASE("generated surface is a single connected component") {
    const GeneratedBody body = generate_body(test_spec());
    oracles::UnionFind uf(body.mesh.vertex_count());
    for (int f = 0; f < body.mesh.face_count(); ++f) {
        uf.unite(body.mesh.faces(f, 0), body.mesh.faces(f, 1));
        uf.unite(body.mesh.faces(f, 0), body.mesh.faces(f, 2));
    }
    const int root = uf.find(0);
    for (int v = 0; v < body.mesh.vertex_count(); ++v) CHECK(uf.find(v) == root);
}

TEST_CASE("invalid specs are rejected") {
    BodySpec spec = test_spec();
    spec.thigh_radius = 0.0;
    CHECK_THROWS_AS(generate_body(spec), std::invalid_argument);
    spec = test_spec();
    spec.grid_resolution = 4;
    CHECK_THROWS_AS(generate_body(spec), std::invalid_argument);
}

TEST_CASE("skinning weights are a partition of unity") {
    const GeneratedBody body = generate_body(test_spec());
    const Eigen::VectorXd sums = body.weights.rowwise().sum();
    CHECK(std::abs(sums.minCoeff() - 1.0) < 1e-9);
    CHECK(std::abs(sums.maxCoeff() - 1.0) < 1e-9);
    CHECK(body.weights.minCoeff() >= 0.0);
}

TEST_CASE("zero pose reproduces the rest mesh") {
    const GeneratedBody body = generate_body(test_spec());
    const TriMesh posed = pose_body(body, Pose{});
    CHECK((posed.vertices - body.mesh.vertices).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((posed.faces - body.mesh.faces).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("whole-body rotation is an isometry") {
    const GeneratedBody body = generate_body(test_spec());
    Pose pose;
    pose.root = Eigen::Vector3d(0.3, 1.1, -0.4);
    pose.root_translation = Eigen::Vector3d(0.5, -0.2, 1.0);
    const TriMesh posed = pose_body(body, pose);
    RandomStream rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const int a = rng.uniform_int(body.mesh.vertex_count());
        const int b = rng.uniform_int(body.mesh.vertex_count());
        const double rest = (body.mesh.vertices.row(a) - body.mesh.vertices.row(b)).norm();
        const double after = (posed.vertices.row(a) - posed.vertices.row(b)).norm();
        CHECK(std::abs(rest - after) < 1e-9);
    }
}

TEST_CASE("topology is invariant under posing") {
    const GeneratedBody body = generate_body(test_spec());
    RandomStream rng(3);
    for (int trial = 0; trial < 3; ++trial) {
        const TriMesh posed = pose_body(body, random_pose(rng));
        CHECK((posed.faces - body.mesh.faces).cwiseAbs().maxCoeff() == 0);
    }
}

TEST_CASE("a bent elbow moves pure forearm vertices rigidly") {
    const GeneratedBody body = generate_body(test_spec());
    JointLimits wide;  // limits are configuration; widen for a right-angle bend
    wide.elbow = Eigen::Vector3d(0.2, M_PI / 2, 0.2);
    Pose pose;
    pose.elbow_left = Eigen::Vector3d(0, M_PI / 2, 0);
    const TriMesh posed = pose_body(body, pose, wide);

    const Bone& forearm = body.skeleton.bones[kForearmLeft];
    const Eigen::Matrix3d rotation =
        Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitY()).toRotationMatrix();
    int pure = 0;
    for (int v = 0; v < body.mesh.vertex_count(); ++v) {
        if (body.weights(v, kForearmLeft) != 1.0) continue;
        ++pure;
        const Eigen::Vector3d rest = body.mesh.vertices.row(v).transpose();
        const Eigen::Vector3d expected = rotation * (rest - forearm.joint) + forearm.joint;
        CHECK((posed.vertices.row(v).transpose() - expected).norm() < 1e-12);
    }
    CHECK(pure > 20);  // the mid-forearm band binds rigidly
}

TEST_CASE("pose angles outside the limits are rejected") {
    const GeneratedBody body = generate_body(test_spec());
    Pose pose;
    pose.knee_right = Eigen::Vector3d(2.5, 0, 0);
    CHECK_THROWS_AS(pose_body(body, pose), std::invalid_argument);

    GeneratedBody broken = body;
    broken.weights = Eigen::MatrixXd::Zero(3, kBoneCount);
    CHECK_THROWS_AS(pose_body(broken, Pose{}), std::invalid_argument);
}

TEST_CASE("geodesics stay within 15% under default joint-limit poses") {
    const GeneratedBody body = generate_body(test_spec());
    RandomStream rng(5);
    for (int trial = 0; trial < 3; ++trial) {
        const Pose pose = random_pose(rng, JointLimits(), 1.0);
        const TriMesh posed = pose_body(body, pose);
        RandomStream pair_rng(trial + 100);
        for (int i = 0; i < 8; ++i) {
            const int a = pair_rng.uniform_int(body.mesh.vertex_count());
            const Eigen::VectorXd rest = geodesic_distances(body.mesh, a);
            const Eigen::VectorXd after = geodesic_distances(posed, a);
            for (int j = 0; j < 30; ++j) {
                const int b = pair_rng.uniform_int(body.mesh.vertex_count());
                if (rest[b] < 0.2) continue;
                CHECK(std::abs(after[b] - rest[b]) / rest[b] < 0.15);
            }
        }
    }
}

TEST_CASE("33 distinct keypoints at stable indices") {
    const GeneratedBody body = generate_body(test_spec());
    const std::vector<Keypoint> points = keypoints(body);
    REQUIRE(points.size() == 33);
    std::set<int> distinct;
    for (const Keypoint& kp : points) distinct.insert(kp.vertex);
    CHECK(distinct.size() == 33);

    // Indices are a property of the topology, not of the pose.
    const std::vector<Keypoint> again = keypoints(body);
    for (size_t i = 0; i < points.size(); ++i) CHECK(points[i].vertex == again[i].vertex);
}

TEST_CASE("left/right keypoints mirror across the sagittal plane") {
    BodySpec spec = test_spec();
    spec.asymmetry = 0.0;  // mirror symmetry is only promised for symmetric specs
    const GeneratedBody body = generate_body(spec);
    const std::vector<Keypoint> points = keypoints(body);
    const double tolerance = 2.2 / spec.grid_resolution;  // about one grid cell

    for (const Keypoint& kp : points) {
        if (kp.name.rfind("l_", 0) != 0) continue;
        const std::string mirror_name = "r_" + kp.name.substr(2);
        const auto mirror = std::find_if(points.begin(), points.end(), [&](const Keypoint& other) {
            return other.name == mirror_name;
        });
        REQUIRE(mirror != points.end());
        Eigen::Vector3d left = body.mesh.vertices.row(kp.vertex).transpose();
        const Eigen::Vector3d right = body.mesh.vertices.row(mirror->vertex).transpose();
        left.x() = -left.x();
        CHECK((left - right).norm() < tolerance);
    }
}

TEST_CASE("varied specs stay valid and produce different bodies") {
    BodySpec spec = test_spec();
    spec.rng_seed = 909;
    const BodySpec varied = spec.varied();
    varied.validate();
    CHECK(varied.torso_length != spec.torso_length);
    const GeneratedBody body = generate_body(varied);
    CHECK(body.mesh.vertex_count() > 500);
}

TEST_CASE("pose and keypoint files round trip") {
    RandomStream rng(77);
    const Pose pose = random_pose(rng);
    const std::string pose_path =
        (std::filesystem::temp_directory_path() / "pose_roundtrip.txt").string();
    write_pose(pose, pose_path);
    const Pose again = read_pose(pose_path);
    CHECK((again.shoulder_left - pose.shoulder_left).norm() == 0.0);
    CHECK((again.knee_right - pose.knee_right).norm() == 0.0);
    CHECK((again.root_translation - pose.root_translation).norm() == 0.0);

    const GeneratedBody body = generate_body(test_spec());
    const std::vector<Keypoint> points = keypoints(body);
    const std::string kp_path =
        (std::filesystem::temp_directory_path() / "keypoints_roundtrip.txt").string();
    write_keypoints(points, kp_path);
    const std::vector<Keypoint> loaded = read_keypoints(kp_path);
    REQUIRE(loaded.size() == points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        CHECK(loaded[i].name == points[i].name);
        CHECK(loaded[i].vertex == points[i].vertex);
    }
}
