#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bodycorr/network.hpp"
#include "bodycorr/render.hpp"
#include "bodycorr/train.hpp"

namespace bodycorr {

// Per-pixel descriptors of one depth image; undefined (zero) on background.
struct DescriptorField {
    int width = 0, height = 0, d = 0;
    Eigen::MatrixXd values;          // (height*width) x d
    std::vector<std::uint8_t> mask;  // 1 = foreground

    bool foreground(int pixel) const { return mask[static_cast<size_t>(pixel)] != 0; }
};

// Multi-view average of pixel descriptors per mesh vertex. Vertices never seen
// by any view are unusable and excluded from matching.
struct VertexDescriptorTable {
    Eigen::MatrixXd values;     // vertex_count x d
    Eigen::VectorXi visibility; // views in which the vertex was visible

    int vertex_count() const { return static_cast<int>(values.rows()); }
    bool usable(int v) const { return visibility[v] > 0; }
};

// One forward pass of the frozen tower; input is normalized internally with
// the same zero-mean rule used in training.
template <typename Scalar>
DescriptorField extract_pixel_descriptors(const NetworkParams<Scalar>& params,
                                          const DepthImage& image) {
    const NetConfig& cfg = params.tower.config();
    if (image.width != cfg.input_width || image.height != cfg.input_height) {
        throw std::invalid_argument("extract_pixel_descriptors: resolution mismatch");
    }
    DescriptorField field;
    field.width = image.width;
    field.height = image.height;
    field.d = cfg.descriptor_dim;
    field.mask = image.mask;
    const Eigen::Index npix = static_cast<Eigen::Index>(image.width) * image.height;
    field.values.setZero(npix, field.d);

    bool any_foreground = false;
    for (auto m : image.mask) {
        if (m) {
            any_foreground = true;
            break;
        }
    }
    if (!any_foreground) return field;  // nothing to describe

    const Tensor<Scalar> input = depth_to_input<Scalar>(image);
    const Tensor<Scalar> descriptors = params.tower.forward(input);
    for (Eigen::Index pix = 0; pix < npix; ++pix) {
        if (!field.mask[static_cast<size_t>(pix)]) continue;
        for (int c = 0; c < field.d; ++c) {
            field.values(pix, c) =
                static_cast<double>(descriptors.data[static_cast<Eigen::Index>(c) * npix + pix]);
        }
    }
    return field;
}

// Arithmetic mean over all pixels (across all views) whose nearest vertex is
// v; visibility counts the views contributing at least one pixel.
VertexDescriptorTable per_vertex_descriptors(const std::vector<DescriptorField>& fields,
                                             const std::vector<RenderBuffers>& buffers,
                                             int vertex_count);

void write_descriptor_field(const DescriptorField& field, const std::string& path);
DescriptorField read_descriptor_field(const std::string& path);
void write_vertex_table(const VertexDescriptorTable& table, const std::string& path);
VertexDescriptorTable read_vertex_table(const std::string& path);

}  // namespace bodycorr
