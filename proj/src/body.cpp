#include "bodycorr/body.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "bodycorr/io.hpp"

namespace bodycorr {

namespace {

double point_segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                              const Eigen::Vector3d& b) {
    const Eigen::Vector3d ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double body_sdf(const Skeleton& skel, const Eigen::Vector3d& p) {
    double d = std::numeric_limits<double>::infinity();
    for (const Bone& bone : skel.bones) {
        d = std::min(d, point_segment_distance(p, bone.head, bone.tail) - bone.radius);
    }
    return d;
}

Eigen::Matrix3d euler_zyx(const Eigen::Vector3d& angles) {
    return (Eigen::AngleAxisd(angles.z(), Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(angles.y(), Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(angles.x(), Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

// Field table shared by pose I/O and random sampling.
struct PoseField {
    const char* name;
    Eigen::Vector3d Pose::*member;
};
constexpr int kPoseFieldCount = 11;
const PoseField kPoseFields[kPoseFieldCount] = {
    {"root", &Pose::root},
    {"root_translation", &Pose::root_translation},
    {"neck", &Pose::neck},
    {"shoulder_left", &Pose::shoulder_left},
    {"shoulder_right", &Pose::shoulder_right},
    {"elbow_left", &Pose::elbow_left},
    {"elbow_right", &Pose::elbow_right},
    {"hip_left", &Pose::hip_left},
    {"hip_right", &Pose::hip_right},
    {"knee_left", &Pose::knee_left},
    {"knee_right", &Pose::knee_right},
};

// Marching tetrahedra over a regular grid. The six-tet split below shares the
// cube's main diagonal, which makes face diagonals agree between neighboring
// cubes, so the extracted surface is crack-free.
constexpr int kTets[6][4] = {
    {0, 5, 1, 6}, {0, 1, 2, 6}, {0, 2, 3, 6},
    {0, 3, 7, 6}, {0, 7, 4, 6}, {0, 4, 5, 6},
};
constexpr int kCubeCorner[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};

struct SurfaceBuilder {
    std::unordered_map<std::uint64_t, int> edge_vertex;
    std::vector<Eigen::RowVector3d> vertices;
    std::vector<Eigen::RowVector3i> triangles;

    int crossing(std::int64_t ca, std::int64_t cb, const Eigen::Vector3d& pa,
                 const Eigen::Vector3d& pb, double sa, double sb) {
        if (ca > cb) return crossing(cb, ca, pb, pa, sb, sa);
        const std::uint64_t key =
            (static_cast<std::uint64_t>(ca) << 32) | static_cast<std::uint64_t>(cb);
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;
        const double t = sa / (sa - sb);
        const Eigen::Vector3d p = pa + t * (pb - pa);
        const int id = static_cast<int>(vertices.size());
        vertices.emplace_back(p.transpose());
        edge_vertex.emplace(key, id);
        return id;
    }
};

}  // namespace

void BodySpec::validate() const {
    const double dims[] = {torso_length, torso_radius, head_length, head_radius,
                           upper_arm_length, upper_arm_radius, forearm_length,
                           forearm_radius, thigh_length, thigh_radius, shin_length,
                           shin_radius, shoulder_width, hip_width};
    for (double d : dims) {
        if (!(d > 0.0)) throw std::invalid_argument("BodySpec: all dimensions must be positive");
    }
    if (grid_resolution < 8) {
        throw std::invalid_argument("BodySpec: grid_resolution must be at least 8");
    }
    if (std::abs(asymmetry) >= 0.5) {
        throw std::invalid_argument("BodySpec: asymmetry must lie in (-0.5, 0.5)");
    }
}

BodySpec BodySpec::varied() const {
    RandomStream rng(rng_seed);
    BodySpec out = *this;
    auto jitter = [&](double v) { return v * (1.0 + 0.1 * rng.uniform(-1.0, 1.0)); };
    out.torso_length = jitter(torso_length);
    out.torso_radius = jitter(torso_radius);
    out.head_length = jitter(head_length);
    out.head_radius = jitter(head_radius);
    out.upper_arm_length = jitter(upper_arm_length);
    out.upper_arm_radius = jitter(upper_arm_radius);
    out.forearm_length = jitter(forearm_length);
    out.forearm_radius = jitter(forearm_radius);
    out.thigh_length = jitter(thigh_length);
    out.thigh_radius = jitter(thigh_radius);
    out.shin_length = jitter(shin_length);
    out.shin_radius = jitter(shin_radius);
    out.shoulder_width = jitter(shoulder_width);
    out.hip_width = jitter(hip_width);
    return out;
}

static Skeleton build_skeleton(const BodySpec& s) {
    const double hip_y = s.shin_length + s.thigh_length;
    const double neck_y = hip_y + s.torso_length;
    const double shoulder_y = neck_y - 0.06;
    const Eigen::Vector3d pelvis(0, hip_y, 0);
    const Eigen::Vector3d neck_base(0, neck_y, 0);
    // Left is +x. Arm capsules start slightly inside the torso so the surface
    // stays connected at the shoulder even on coarse grids.
    const double arm_inset = std::min(0.05, 0.15 * s.upper_arm_length);

    Skeleton skel;
    auto set = [&](BoneId id, const char* name, int parent, Eigen::Vector3d joint,
                   Eigen::Vector3d head, Eigen::Vector3d tail, double radius) {
        skel.bones[id] = Bone{name, parent, joint, head, tail, radius};
    };
    set(kTorso, "torso", -1, pelvis, pelvis, neck_base, s.torso_radius);
    set(kHead, "head", kTorso, neck_base, neck_base + Eigen::Vector3d(0, 0.03, 0),
        neck_base + Eigen::Vector3d(0, 0.03 + s.head_length, 0), s.head_radius);
    for (int side = 0; side < 2; ++side) {
        const double sx = side == 0 ? 1.0 : -1.0;  // left, right
        const double skew = 1.0 + sx * s.asymmetry;
        const Eigen::Vector3d shoulder(sx * s.shoulder_width / 2, shoulder_y, 0);
        const Eigen::Vector3d elbow =
            shoulder + Eigen::Vector3d(sx * s.upper_arm_length * skew, 0, 0);
        const Eigen::Vector3d wrist = elbow + Eigen::Vector3d(sx * s.forearm_length * skew, 0, 0);
        set(side == 0 ? kUpperArmLeft : kUpperArmRight, side == 0 ? "upper_arm_left" : "upper_arm_right",
            kTorso, shoulder, shoulder - Eigen::Vector3d(sx * arm_inset, 0, 0), elbow,
            s.upper_arm_radius * skew);
        set(side == 0 ? kForearmLeft : kForearmRight, side == 0 ? "forearm_left" : "forearm_right",
            side == 0 ? kUpperArmLeft : kUpperArmRight, elbow, elbow, wrist,
            s.forearm_radius * skew);

        const Eigen::Vector3d hip(sx * s.hip_width / 2, hip_y, 0);
        const Eigen::Vector3d knee = hip - Eigen::Vector3d(0, s.thigh_length * skew, 0);
        const Eigen::Vector3d ankle = knee - Eigen::Vector3d(0, s.shin_length * skew, 0);
        set(side == 0 ? kThighLeft : kThighRight, side == 0 ? "thigh_left" : "thigh_right",
            kTorso, hip, hip, knee, s.thigh_radius * skew);
        set(side == 0 ? kShinLeft : kShinRight, side == 0 ? "shin_left" : "shin_right",
            side == 0 ? kThighLeft : kThighRight, knee, knee, ankle, s.shin_radius * skew);
    }
    return skel;
}

GeneratedBody generate_body(const BodySpec& spec) {
    spec.validate();
    GeneratedBody body;
    body.skeleton = build_skeleton(spec);
    const Skeleton& skel = body.skeleton;

    // Grid symmetric about the x=0 and z=0 planes so a symmetric spec yields a
    // mirror-symmetric surface.
    Eigen::Vector3d lo(1e30, 1e30, 1e30), hi(-1e30, -1e30, -1e30);
    for (const Bone& bone : skel.bones) {
        for (const Eigen::Vector3d* p : {&bone.head, &bone.tail}) {
            lo = lo.cwiseMin(*p - Eigen::Vector3d::Constant(bone.radius));
            hi = hi.cwiseMax(*p + Eigen::Vector3d::Constant(bone.radius));
        }
    }
    const double h = (hi.y() - lo.y() + 0.1) / spec.grid_resolution;
    const double margin = 2.0 * h;
    lo -= Eigen::Vector3d::Constant(margin);
    hi += Eigen::Vector3d::Constant(margin);
    const double xmax = std::max(std::abs(lo.x()), std::abs(hi.x()));
    const double zmax = std::max(std::abs(lo.z()), std::abs(hi.z()));
    lo.x() = -xmax;
    hi.x() = xmax;
    lo.z() = -zmax;
    hi.z() = zmax;
    const int nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / h));
    const int ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / h));
    const int nz = static_cast<int>(std::ceil((hi.z() - lo.z()) / h));
    lo.x() = -0.5 * nx * h;
    lo.z() = -0.5 * nz * h;

    auto corner_pos = [&](int ix, int iy, int iz) {
        return Eigen::Vector3d(lo.x() + ix * h, lo.y() + iy * h, lo.z() + iz * h);
    };
    auto corner_id = [&](int ix, int iy, int iz) {
        return (static_cast<std::int64_t>(ix) * (ny + 1) + iy) * (nz + 1) + iz;
    };

    std::vector<double> sdf(static_cast<size_t>((nx + 1) * (ny + 1) * (nz + 1)));
    for (int ix = 0; ix <= nx; ++ix) {
        for (int iy = 0; iy <= ny; ++iy) {
            for (int iz = 0; iz <= nz; ++iz) {
                double s = body_sdf(skel, corner_pos(ix, iy, iz));
                if (std::abs(s) < 1e-12) s = 1e-12;  // keep crossings off the corners
                sdf[static_cast<size_t>(corner_id(ix, iy, iz))] = s;
            }
        }
    }

    SurfaceBuilder builder;
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            for (int iz = 0; iz < nz; ++iz) {
                std::int64_t cid[8];
                Eigen::Vector3d pos[8];
                double val[8];
                for (int c = 0; c < 8; ++c) {
                    const int cx = ix + kCubeCorner[c][0];
                    const int cy = iy + kCubeCorner[c][1];
                    const int cz = iz + kCubeCorner[c][2];
                    cid[c] = corner_id(cx, cy, cz);
                    pos[c] = corner_pos(cx, cy, cz);
                    val[c] = sdf[static_cast<size_t>(cid[c])];
                }
                for (const auto& tet : kTets) {
                    int inside[4], outside[4];
                    int ni = 0, no = 0;
                    for (int t = 0; t < 4; ++t) {
                        if (val[tet[t]] < 0)
                            inside[ni++] = tet[t];
                        else
                            outside[no++] = tet[t];
                    }
                    if (ni == 0 || ni == 4) continue;
                    auto cross = [&](int a, int b) {
                        return builder.crossing(cid[a], cid[b], pos[a], pos[b], val[a], val[b]);
                    };
                    if (ni == 1) {
                        builder.triangles.emplace_back(cross(inside[0], outside[0]),
                                                       cross(inside[0], outside[1]),
                                                       cross(inside[0], outside[2]));
                    } else if (ni == 3) {
                        builder.triangles.emplace_back(cross(outside[0], inside[0]),
                                                       cross(outside[0], inside[1]),
                                                       cross(outside[0], inside[2]));
                    } else {  // 2 in, 2 out: quad split into two triangles
                        const int v00 = cross(inside[0], outside[0]);
                        const int v01 = cross(inside[0], outside[1]);
                        const int v10 = cross(inside[1], outside[0]);
                        const int v11 = cross(inside[1], outside[1]);
                        builder.triangles.emplace_back(v00, v01, v11);
                        builder.triangles.emplace_back(v00, v11, v10);
                    }
                }
            }
        }
    }

    Eigen::Matrix<double, Eigen::Dynamic, 3> V(builder.vertices.size(), 3);
    for (size_t i = 0; i < builder.vertices.size(); ++i) V.row(static_cast<int>(i)) = builder.vertices[i];
    Eigen::Matrix<int, Eigen::Dynamic, 3> F(builder.triangles.size(), 3);
    for (size_t i = 0; i < builder.triangles.size(); ++i) F.row(static_cast<int>(i)) = builder.triangles[i];
    body.mesh = make_mesh(std::move(V), std::move(F));

    // Skinning weights: quadratic falloff of the distance to each capsule
    // surface, finite support so vertices away from joints bind rigidly.
    // Blending is restricted to the nearest bone and its skeleton neighbors;
    // without that, the narrow gap between the legs bleeds weight across
    // limbs and posing tears the inner thighs.
    const double blend = 0.14;
    std::vector<std::vector<int>> allowed(kBoneCount);
    for (int b = 0; b < kBoneCount; ++b) {
        allowed[static_cast<size_t>(b)].push_back(b);
        const int parent = skel.bones[static_cast<size_t>(b)].parent;
        if (parent >= 0) {
            allowed[static_cast<size_t>(b)].push_back(parent);
            allowed[static_cast<size_t>(parent)].push_back(b);
        }
    }

    const int nv = body.mesh.vertex_count();
    body.weights.setZero(nv, kBoneCount);
    for (int v = 0; v < nv; ++v) {
        const Eigen::Vector3d p = body.mesh.vertices.row(v).transpose();
        double dist[kBoneCount];
        int primary = 0;
        for (int b = 0; b < kBoneCount; ++b) {
            const Bone& bone = skel.bones[static_cast<size_t>(b)];
            dist[b] = std::max(0.0, point_segment_distance(p, bone.head, bone.tail) - bone.radius);
            if (dist[b] < dist[primary]) primary = b;
        }
        double total = 0;
        for (int b : allowed[static_cast<size_t>(primary)]) {
            const double d = dist[b];
            const double w = d >= blend ? 0.0 : (1.0 - d / blend) * (1.0 - d / blend);
            body.weights(v, b) = w;
            total += w;
        }
        if (total <= 0) {
            body.weights(v, primary) = 1.0;  // surface vertex off every capsule; bind rigidly
        } else {
            body.weights.row(v) /= total;
        }
    }
    return body;
}

TriMesh pose_body(const GeneratedBody& body, const Pose& pose, const JointLimits& limits) {
    if (body.weights.rows() != body.mesh.vertex_count() || body.weights.cols() != kBoneCount) {
        throw std::invalid_argument("pose_body: binding does not match mesh");
    }
    auto check = [&](const Eigen::Vector3d& angles, const Eigen::Vector3d& lim,
                     const char* joint) {
        for (int i = 0; i < 3; ++i) {
            if (std::abs(angles[i]) > lim[i] + 1e-12) {
                throw std::invalid_argument(std::string("pose_body: ") + joint +
                                            " angle out of limits");
            }
        }
    };
    check(pose.neck, limits.neck, "neck");
    check(pose.shoulder_left, limits.shoulder, "shoulder_left");
    check(pose.shoulder_right, limits.shoulder, "shoulder_right");
    check(pose.elbow_left, limits.elbow, "elbow_left");
    check(pose.elbow_right, limits.elbow, "elbow_right");
    check(pose.hip_left, limits.hip, "hip_left");
    check(pose.hip_right, limits.hip, "hip_right");
    check(pose.knee_left, limits.knee, "knee_left");
    check(pose.knee_right, limits.knee, "knee_right");

    const Eigen::Vector3d* local_angles[kBoneCount] = {
        &pose.root,       &pose.neck,       &pose.shoulder_left, &pose.shoulder_right,
        &pose.elbow_left, &pose.elbow_right, &pose.hip_left,      &pose.hip_right,
        &pose.knee_left,  &pose.knee_right,
    };

    // Forward kinematics; bones are declared parent-before-child.
    std::array<Eigen::Matrix3d, kBoneCount> rot;
    std::array<Eigen::Vector3d, kBoneCount> joint_posed;
    for (int b = 0; b < kBoneCount; ++b) {
        const Bone& bone = body.skeleton.bones[static_cast<size_t>(b)];
        const Eigen::Matrix3d local = euler_zyx(*local_angles[b]);
        if (bone.parent < 0) {
            rot[b] = local;
            joint_posed[b] = bone.joint + pose.root_translation;
        } else {
            const int p = bone.parent;
            rot[b] = rot[p] * local;
            const Bone& parent = body.skeleton.bones[static_cast<size_t>(p)];
            joint_posed[b] = rot[p] * (bone.joint - parent.joint) + joint_posed[p];
        }
    }

    TriMesh posed = body.mesh;
    const int nv = posed.vertex_count();
    for (int v = 0; v < nv; ++v) {
        const Eigen::Vector3d rest = body.mesh.vertices.row(v).transpose();
        Eigen::Vector3d out = Eigen::Vector3d::Zero();
        for (int b = 0; b < kBoneCount; ++b) {
            const double w = body.weights(v, b);
            if (w == 0.0) continue;
            const Bone& bone = body.skeleton.bones[static_cast<size_t>(b)];
            out += w * (rot[b] * (rest - bone.joint) + joint_posed[b]);
        }
        posed.vertices.row(v) = out.transpose();
    }
    // Positions moved; refresh edge lengths.
    for (int v = 0; v < nv; ++v) {
        for (auto& nb : posed.adjacency[static_cast<size_t>(v)]) {
            nb.length = (posed.vertices.row(v) - posed.vertices.row(nb.vertex)).norm();
        }
    }
    return posed;
}

std::vector<Keypoint> keypoints(const GeneratedBody& body) {
    const Skeleton& s = body.skeleton;
    const Bone& torso = s.bones[kTorso];
    const Bone& head = s.bones[kHead];
    const double tr = torso.radius;

    std::vector<std::pair<std::string, Eigen::Vector3d>> sites;
    auto add = [&](const std::string& name, const Eigen::Vector3d& p) {
        sites.emplace_back(name, p);
    };
    const Eigen::Vector3d head_mid = 0.5 * (head.head + head.tail);
    add("head_top", head.tail + Eigen::Vector3d(0, head.radius, 0));
    add("chin", head.head + Eigen::Vector3d(0, 0, head.radius));
    add("chest", torso.head + Eigen::Vector3d(0, 0.75 * (torso.tail.y() - torso.head.y()), tr));
    add("navel", torso.head + Eigen::Vector3d(0, 0.25 * (torso.tail.y() - torso.head.y()), tr));
    add("sacrum", torso.head + Eigen::Vector3d(0, 0.25 * (torso.tail.y() - torso.head.y()), -tr));
    for (int side = 0; side < 2; ++side) {
        const std::string prefix = side == 0 ? "l_" : "r_";
        const double sx = side == 0 ? 1.0 : -1.0;
        const Bone& ua = s.bones[side == 0 ? kUpperArmLeft : kUpperArmRight];
        const Bone& fa = s.bones[side == 0 ? kForearmLeft : kForearmRight];
        const Bone& th = s.bones[side == 0 ? kThighLeft : kThighRight];
        const Bone& sh = s.bones[side == 0 ? kShinLeft : kShinRight];
        add(prefix + "ear", head_mid + Eigen::Vector3d(sx * head.radius, 0, 0));
        add(prefix + "shoulder", ua.joint + Eigen::Vector3d(0, ua.radius, 0));
        add(prefix + "upper_arm", 0.5 * (ua.joint + ua.tail) + Eigen::Vector3d(0, ua.radius, 0));
        add(prefix + "elbow", fa.joint + Eigen::Vector3d(0, 0, -fa.radius));
        add(prefix + "forearm", 0.5 * (fa.head + fa.tail) + Eigen::Vector3d(0, fa.radius, 0));
        add(prefix + "wrist", fa.tail + Eigen::Vector3d(0, fa.radius, 0));
        add(prefix + "hand_tip", fa.tail + Eigen::Vector3d(sx * fa.radius, 0, 0));
        add(prefix + "scapula", Eigen::Vector3d(sx * 0.10, ua.joint.y() - 0.02, -tr));
        add(prefix + "hip", th.joint + Eigen::Vector3d(sx * th.radius, 0, 0));
        add(prefix + "thigh", 0.5 * (th.head + th.tail) + Eigen::Vector3d(0, 0, th.radius));
        add(prefix + "knee", sh.joint + Eigen::Vector3d(0, 0, sh.radius));
        add(prefix + "shin", 0.5 * (sh.head + sh.tail) + Eigen::Vector3d(0, 0, sh.radius));
        add(prefix + "ankle", sh.tail + Eigen::Vector3d(sx * sh.radius, 0, 0));
        add(prefix + "foot_tip", sh.tail + Eigen::Vector3d(0, -sh.radius, 0));
    }

    std::vector<Keypoint> points;
    std::vector<char> taken(static_cast<size_t>(body.mesh.vertex_count()), 0);
    for (const auto& [name, site] : sites) {
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int v = 0; v < body.mesh.vertex_count(); ++v) {
            if (taken[static_cast<size_t>(v)]) continue;
            const double d = (body.mesh.vertices.row(v).transpose() - site).squaredNorm();
            if (d < best_dist) {
                best_dist = d;
                best = v;
            }
        }
        taken[static_cast<size_t>(best)] = 1;
        points.push_back({name, best});
    }
    return points;
}

Pose random_pose(RandomStream& rng, const JointLimits& limits, double scale) {
    Pose pose;
    auto sample = [&](const Eigen::Vector3d& lim) {
        return Eigen::Vector3d(rng.uniform(-lim.x(), lim.x()) * scale,
                               rng.uniform(-lim.y(), lim.y()) * scale,
                               rng.uniform(-lim.z(), lim.z()) * scale);
    };
    pose.neck = sample(limits.neck);
    pose.shoulder_left = sample(limits.shoulder);
    pose.shoulder_right = sample(limits.shoulder);
    pose.elbow_left = sample(limits.elbow);
    pose.elbow_right = sample(limits.elbow);
    pose.hip_left = sample(limits.hip);
    pose.hip_right = sample(limits.hip);
    pose.knee_left = sample(limits.knee);
    pose.knee_right = sample(limits.knee);
    return pose;
}

void write_pose(const Pose& pose, const std::string& path) {
    std::vector<std::pair<std::string, std::string>> entries;
    char buf[64];
    for (const auto& field : kPoseFields) {
        const Eigen::Vector3d& v = pose.*(field.member);
        const char* axis[3] = {"x", "y", "z"};
        for (int i = 0; i < 3; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
            entries.emplace_back(std::string(field.name) + "." + axis[i], buf);
        }
    }
    write_key_values(path, entries);
}

Pose read_pose(const std::string& path) {
    Pose pose;
    for (const auto& [key, value] : read_key_values(path)) {
        const auto dot = key.rfind('.');
        if (dot == std::string::npos) throw std::runtime_error("pose: bad key " + key);
        const std::string base = key.substr(0, dot);
        const std::string axis = key.substr(dot + 1);
        const int i = axis == "x" ? 0 : axis == "y" ? 1 : axis == "z" ? 2 : -1;
        if (i < 0) throw std::runtime_error("pose: bad axis in key " + key);
        bool found = false;
        for (const auto& field : kPoseFields) {
            if (base == field.name) {
                (pose.*(field.member))[i] = std::stod(value);
                found = true;
                break;
            }
        }
        if (!found) throw std::runtime_error("pose: unknown joint " + base);
    }
    return pose;
}

void write_keypoints(const std::vector<Keypoint>& points, const std::string& path) {
    std::ostringstream out;
    for (const auto& kp : points) out << kp.name << ' ' << kp.vertex << "\n";
    atomic_write_text(path, out.str());
}

std::vector<Keypoint> read_keypoints(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("keypoints: cannot open " + path);
    std::vector<Keypoint> points;
    std::string name;
    int vertex;
    while (in >> name >> vertex) points.push_back({name, vertex});
    return points;
}

}  // namespace bodycorr
