#include "bodycorr/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bodycorr/io.hpp"
#include "bodycorr/random.hpp"

namespace bodycorr {

RenderResult rasterize_depth(const TriMesh& mesh, const SegmentationSet* segmentations,
                             const std::vector<Keypoint>& keypoint_vertices,
                             const Camera& camera, const RasterOptions& options) {
    camera.validate();
    const int w = camera.width, h = camera.height;
    const Eigen::Index npix = static_cast<Eigen::Index>(w) * h;

    RenderResult result;
    result.image.width = w;
    result.image.height = h;
    result.image.depth = Eigen::VectorXd::Zero(npix);
    result.image.mask.assign(static_cast<size_t>(npix), 0);
    result.buffers.width = w;
    result.buffers.height = h;
    result.buffers.nearest_vertex = Eigen::VectorXi::Constant(npix, -1);
    result.buffers.face = Eigen::VectorXi::Constant(npix, -1);
    result.buffers.point = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(npix, 3);
    result.buffers.bary = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(npix, 3);

    Eigen::VectorXd zbuf = Eigen::VectorXd::Constant(npix, std::numeric_limits<double>::infinity());

    const int nv = mesh.vertex_count();
    Eigen::Matrix<double, Eigen::Dynamic, 3> cam_pts(nv, 3);
    Eigen::Matrix<double, Eigen::Dynamic, 2> screen(nv, 2);
    const Eigen::Matrix3d basis = camera.basis();
    for (int v = 0; v < nv; ++v) {
        const Eigen::Vector3d c = basis * (mesh.vertices.row(v).transpose() - camera.eye);
        cam_pts.row(v) = c.transpose();
        if (c.z() > options.near_clip) {
            screen.row(v) = camera.project(c).transpose();
        }
    }

    for (int f = 0; f < mesh.face_count(); ++f) {
        const int ia = mesh.faces(f, 0), ib = mesh.faces(f, 1), ic = mesh.faces(f, 2);
        const double za = cam_pts(ia, 2), zb = cam_pts(ib, 2), zc = cam_pts(ic, 2);
        if (za <= options.near_clip || zb <= options.near_clip || zc <= options.near_clip) {
            continue;  // no near-plane clipping at desk scale; drop the face
        }
        const Eigen::Vector2d a = screen.row(ia), b = screen.row(ib), c = screen.row(ic);
        const double area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        if (std::abs(area) < 1e-12) continue;

        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}) - 0.5)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}) - 0.5)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}))));
        for (int py = y0; py <= y1; ++py) {
            for (int px = x0; px <= x1; ++px) {
                const Eigen::Vector2d p(px + 0.5, py + 0.5);
                // Screen-space barycentrics, normalized by the signed area so
                // either winding works.
                const double wa = ((b - p).x() * (c - p).y() - (b - p).y() * (c - p).x()) / area;
                const double wb = ((c - p).x() * (a - p).y() - (c - p).y() * (a - p).x()) / area;
                const double wc = 1.0 - wa - wb;
                if (wa < 0 || wb < 0 || wc < 0) continue;

                // Perspective-correct weights recover the true surface point.
                const double sa = wa / za, sb = wb / zb, sc = wc / zc;
                const double inv = sa + sb + sc;
                const double depth = 1.0 / inv;
                const Eigen::Index pix = static_cast<Eigen::Index>(py) * w + px;
                if (depth >= zbuf[pix]) continue;
                zbuf[pix] = depth;

                const double ua = sa / inv, ub = sb / inv, uc = sc / inv;
                result.image.depth[pix] = depth;
                result.image.mask[static_cast<size_t>(pix)] = 1;
                result.buffers.face[pix] = f;
                result.buffers.bary.row(pix) = Eigen::RowVector3d(ua, ub, uc);
                result.buffers.point.row(pix) = ua * mesh.vertices.row(ia) +
                                                ub * mesh.vertices.row(ib) +
                                                uc * mesh.vertices.row(ic);
                int nearest = ia;
                double best = ua;
                if (ub > best || (ub == best && ib < nearest)) { best = ub; nearest = ib; }
                if (uc > best || (uc == best && ic < nearest)) { nearest = ic; }
                result.buffers.nearest_vertex[pix] = nearest;
            }
        }
    }

    if (segmentations != nullptr) {
        result.labels.reserve(static_cast<size_t>(segmentations->size()));
        for (int s = 0; s < segmentations->size(); ++s) {
            const Segmentation& seg = (*segmentations)[s];
            Eigen::VectorXi grid = Eigen::VectorXi::Constant(npix, -1);
            for (Eigen::Index pix = 0; pix < npix; ++pix) {
                const int v = result.buffers.nearest_vertex[pix];
                if (v >= 0) grid[pix] = seg.labels[static_cast<size_t>(v)];
            }
            result.labels.push_back(std::move(grid));
        }
    }

    for (size_t k = 0; k < keypoint_vertices.size(); ++k) {
        const int v = keypoint_vertices[k].vertex;
        const double z = cam_pts(v, 2);
        if (z <= options.near_clip) continue;
        const Eigen::Vector2d s = screen.row(v);
        const int px = static_cast<int>(std::floor(s.x()));
        const int py = static_cast<int>(std::floor(s.y()));
        if (px < 0 || px >= w || py < 0 || py >= h) continue;
        const Eigen::Index pix = static_cast<Eigen::Index>(py) * w + px;
        if (!result.image.mask[static_cast<size_t>(pix)]) continue;
        if (z <= zbuf[pix] * (1.0 + 1e-4) + 2e-3) {
            result.keypoint_pixels.push_back({static_cast<int>(k), v, px, py});
        }
    }

    if (options.noise_fraction > 0.0) {
        std::vector<Eigen::Index> fg;
        for (Eigen::Index pix = 0; pix < npix; ++pix) {
            if (result.image.mask[static_cast<size_t>(pix)]) fg.push_back(pix);
        }
        if (!fg.empty()) {
            const double lo = result.image.depth.minCoeff();
            double hi = 0;
            for (Eigen::Index pix : fg) hi = std::max(hi, result.image.depth[pix]);
            RandomStream rng(options.noise_seed);
            const int count = static_cast<int>(options.noise_fraction * fg.size());
            for (int i = 0; i < count; ++i) {
                const Eigen::Index pix = fg[static_cast<size_t>(rng.uniform_int(static_cast<int>(fg.size())))];
                result.image.depth[pix] = rng.uniform() < 0.5 ? std::max(lo * 0.5, 0.01) : hi * 1.5;
            }
        }
    }
    return result;
}

DepthImage normalize_depth(const DepthImage& image) {
    double sum = 0;
    Eigen::Index count = 0;
    for (Eigen::Index pix = 0; pix < image.depth.size(); ++pix) {
        if (image.mask[static_cast<size_t>(pix)]) {
            sum += image.depth[pix];
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("normalize_depth: all-background image");
    const double mean = sum / static_cast<double>(count);
    DepthImage out = image;
    for (Eigen::Index pix = 0; pix < out.depth.size(); ++pix) {
        if (out.mask[static_cast<size_t>(pix)]) out.depth[pix] -= mean;
    }
    return out;
}

void write_depth_image(const DepthImage& image, const std::string& path) {
    Eigen::MatrixXf m(image.height, image.width);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            m(y, x) = static_cast<float>(image.at(y, x));
        }
    }
    write_pfm(path, m);
}

DepthImage read_depth_image(const std::string& path) {
    const Eigen::MatrixXf m = read_pfm(path);
    DepthImage image;
    image.height = static_cast<int>(m.rows());
    image.width = static_cast<int>(m.cols());
    image.depth.resize(static_cast<Eigen::Index>(image.width) * image.height);
    image.mask.assign(static_cast<size_t>(image.depth.size()), 0);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const double d = m(y, x);
            image.at(y, x) = d;
            image.mask[static_cast<size_t>(y) * image.width + x] = d != 0.0f ? 1 : 0;
        }
    }
    return image;
}

}  // namespace bodycorr
