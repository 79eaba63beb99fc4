#pragma once

#include <Eigen/Core>
#include <vector>

namespace bodycorr {

// Perspective pinhole camera. Depth is camera-space z (distance to the image
// plane), not ray length.
struct Camera {
    Eigen::Vector3d eye = Eigen::Vector3d(0, 0, 3);
    Eigen::Vector3d look_at = Eigen::Vector3d::Zero();
    Eigen::Vector3d up = Eigen::Vector3d(0, 1, 0);
    double fov_y = 1.0471975511965976;  // vertical field of view, radians (60 deg)
    int width = 64;
    int height = 64;

    void validate() const;  // throws on degenerate geometry or tiny images

    // View basis: x right, y up, z forward (into the scene).
    Eigen::Matrix3d basis() const;
    // Camera-space coordinates of a world point; z > 0 is in front.
    Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const;
    // Continuous pixel coordinates (x right, y down); pixel centers at +0.5.
    Eigen::Vector2d project(const Eigen::Vector3d& camera_point) const;
};

// Deterministic azimuth x elevation grid on a sphere of the given radius, all
// cameras looking at the center. n = 1 yields a single frontal view.
std::vector<Camera> sample_viewpoints(int n, double radius, const Eigen::Vector3d& center,
                                      double fov_y, int width, int height);

}  // namespace bodycorr
