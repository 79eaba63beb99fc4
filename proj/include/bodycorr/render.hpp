#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "bodycorr/body.hpp"
#include "bodycorr/camera.hpp"
#include "bodycorr/mesh.hpp"
#include "bodycorr/segmentation.hpp"

namespace bodycorr {

// Simulated scan. Depth in meters; 0 marks background in raw renders, the
// mask stays authoritative after normalization shifts foreground values.
struct DepthImage {
    int width = 0, height = 0;
    Eigen::VectorXd depth;          // row-major, height*width
    std::vector<std::uint8_t> mask; // 1 = foreground

    double& at(int y, int x) { return depth[static_cast<Eigen::Index>(y) * width + x]; }
    double at(int y, int x) const { return depth[static_cast<Eigen::Index>(y) * width + x]; }
    bool foreground(int y, int x) const {
        return mask[static_cast<size_t>(y) * width + x] != 0;
    }
};

// Per-pixel geometry references; -1 sentinels on background.
struct RenderBuffers {
    int width = 0, height = 0;
    Eigen::VectorXi nearest_vertex;                 // height*width
    Eigen::VectorXi face;                           // height*width
    Eigen::Matrix<double, Eigen::Dynamic, 3> point; // surface point p(x), rows = pixels
    Eigen::Matrix<double, Eigen::Dynamic, 3> bary;  // perspective-correct weights
};

struct KeypointPixel {
    int keypoint;  // index into the keypoint list
    int vertex;
    int x, y;
};

struct RenderResult {
    DepthImage image;
    RenderBuffers buffers;
    // labels[s] is the height*width label grid under segmentation s; -1 on background.
    std::vector<Eigen::VectorXi> labels;
    std::vector<KeypointPixel> keypoint_pixels;
};

struct RasterOptions {
    double near_clip = 0.05;
    // Salt-and-pepper corruption: this fraction of foreground pixels is pushed
    // to the frame's depth extremes. Off by default.
    double noise_fraction = 0.0;
    std::uint64_t noise_seed = 0;
};

// Z-buffered perspective rasterization; nearest surface wins per pixel, the
// background is zero-filled. A pixel's label under each segmentation is the
// label of its nearest-barycentric vertex; keypoint pixels are the projections
// of keypoint vertices that pass the depth test.
RenderResult rasterize_depth(const TriMesh& mesh, const SegmentationSet* segmentations,
                             const std::vector<Keypoint>& keypoint_vertices,
                             const Camera& camera, const RasterOptions& options = {});

// Subtracts the mean foreground depth; the background keeps its sentinel and
// no per-frame scale is applied. Throws on all-background images.
DepthImage normalize_depth(const DepthImage& image);

void write_depth_image(const DepthImage& image, const std::string& path);
DepthImage read_depth_image(const std::string& path);

}  // namespace bodycorr
