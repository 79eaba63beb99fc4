#include "bodycorr/camera.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

namespace bodycorr {

void Camera::validate() const {
    if ((eye - look_at).norm() < 1e-12) {
        throw std::invalid_argument("camera: eye coincides with look-at point");
    }
    if (!(fov_y > 0.0 && fov_y < M_PI)) {
        throw std::invalid_argument("camera: fov must lie in (0, pi)");
    }
    if (width < 16 || height < 16) {
        throw std::invalid_argument("camera: image must be at least 16x16");
    }
}

Eigen::Matrix3d Camera::basis() const {
    const Eigen::Vector3d forward = (look_at - eye).normalized();
    Eigen::Vector3d right = forward.cross(up);
    if (right.norm() < 1e-12) {
        throw std::invalid_argument("camera: up vector parallel to view direction");
    }
    right.normalize();
    const Eigen::Vector3d true_up = right.cross(forward);
    Eigen::Matrix3d basis;
    basis.row(0) = right.transpose();
    basis.row(1) = true_up.transpose();
    basis.row(2) = forward.transpose();
    return basis;
}

Eigen::Vector3d Camera::to_camera(const Eigen::Vector3d& world) const {
    return basis() * (world - eye);
}

Eigen::Vector2d Camera::project(const Eigen::Vector3d& camera_point) const {
    const double tan_half = std::tan(fov_y / 2);
    const double aspect = static_cast<double>(width) / height;
    const double xn = camera_point.x() / (camera_point.z() * tan_half * aspect);
    const double yn = camera_point.y() / (camera_point.z() * tan_half);
    return Eigen::Vector2d((xn * 0.5 + 0.5) * width, (1.0 - (yn * 0.5 + 0.5)) * height);
}

std::vector<Camera> sample_viewpoints(int n, double radius, const Eigen::Vector3d& center,
                                      double fov_y, int width, int height) {
    if (n < 1) throw std::invalid_argument("sample_viewpoints: n must be at least 1");
    if (!(radius > 0)) throw std::invalid_argument("sample_viewpoints: radius must be positive");

    const int rings = std::max(1, static_cast<int>(std::lround(std::sqrt(n / 6.0))));
    const int columns = (n + rings - 1) / rings;
    const double max_elevation = M_PI / 4;

    std::vector<Camera> cameras;
    cameras.reserve(static_cast<size_t>(n));
    for (int r = 0; r < rings && static_cast<int>(cameras.size()) < n; ++r) {
        const double elevation =
            rings == 1 ? 0.0 : -max_elevation + 2 * max_elevation * (r + 0.5) / rings;
        for (int c = 0; c < columns && static_cast<int>(cameras.size()) < n; ++c) {
            const double azimuth = 2 * M_PI * c / columns;
            Camera cam;
            cam.eye = center + radius * Eigen::Vector3d(std::sin(azimuth) * std::cos(elevation),
                                                        std::sin(elevation),
                                                        std::cos(azimuth) * std::cos(elevation));
            cam.look_at = center;
            cam.up = Eigen::Vector3d(0, 1, 0);
            cam.fov_y = fov_y;
            cam.width = width;
            cam.height = height;
            cameras.push_back(cam);
        }
    }
    return cameras;
}

}  // namespace bodycorr
