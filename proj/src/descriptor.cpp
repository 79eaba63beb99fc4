#include "bodycorr/descriptor.hpp"

#include <stdexcept>

#include "bodycorr/io.hpp"

namespace bodycorr {

VertexDescriptorTable per_vertex_descriptors(const std::vector<DescriptorField>& fields,
                                             const std::vector<RenderBuffers>& buffers,
                                             int vertex_count) {
    if (fields.size() != buffers.size()) {
        throw std::invalid_argument("per_vertex_descriptors: fields and buffers misaligned");
    }
    if (fields.empty()) {
        throw std::invalid_argument("per_vertex_descriptors: no views");
    }
    const int d = fields.front().d;

    VertexDescriptorTable table;
    table.values.setZero(vertex_count, d);
    table.visibility.setZero(vertex_count);
    Eigen::VectorXi pixel_count = Eigen::VectorXi::Zero(vertex_count);

    for (size_t view = 0; view < fields.size(); ++view) {
        const DescriptorField& field = fields[view];
        const RenderBuffers& buf = buffers[view];
        if (field.width != buf.width || field.height != buf.height || field.d != d) {
            throw std::invalid_argument("per_vertex_descriptors: view shape mismatch");
        }
        std::vector<char> seen(static_cast<size_t>(vertex_count), 0);
        const Eigen::Index npix = static_cast<Eigen::Index>(field.width) * field.height;
        for (Eigen::Index pix = 0; pix < npix; ++pix) {
            const int v = buf.nearest_vertex[pix];
            if (v < 0) continue;
            if (v >= vertex_count) {
                throw std::invalid_argument("per_vertex_descriptors: vertex id out of range");
            }
            table.values.row(v) += field.values.row(pix);
            pixel_count[v] += 1;
            if (!seen[static_cast<size_t>(v)]) {
                seen[static_cast<size_t>(v)] = 1;
                table.visibility[v] += 1;
            }
        }
    }
    for (int v = 0; v < vertex_count; ++v) {
        if (pixel_count[v] > 0) table.values.row(v) /= pixel_count[v];
    }
    return table;
}

void write_descriptor_field(const DescriptorField& field, const std::string& path) {
    ArrayFile array;
    array.dtype = 'd';
    array.width = static_cast<std::uint32_t>(field.width);
    array.height = static_cast<std::uint32_t>(field.height);
    array.channels = static_cast<std::uint32_t>(field.d + 1);  // +1 mask channel
    array.doubles.resize(array.element_count());
    const Eigen::Index npix = static_cast<Eigen::Index>(field.width) * field.height;
    for (Eigen::Index pix = 0; pix < npix; ++pix) {
        for (int c = 0; c < field.d; ++c) {
            array.doubles[static_cast<size_t>(pix) * (field.d + 1) + c] = field.values(pix, c);
        }
        array.doubles[static_cast<size_t>(pix) * (field.d + 1) + field.d] =
            field.mask[static_cast<size_t>(pix)] ? 1.0 : 0.0;
    }
    write_array(path, array);
}

DescriptorField read_descriptor_field(const std::string& path) {
    const ArrayFile array = read_array(path);
    if (array.dtype != 'd' || array.channels < 2) {
        throw std::runtime_error("descriptor field: unexpected layout in " + path);
    }
    DescriptorField field;
    field.width = static_cast<int>(array.width);
    field.height = static_cast<int>(array.height);
    field.d = static_cast<int>(array.channels) - 1;
    const Eigen::Index npix = static_cast<Eigen::Index>(field.width) * field.height;
    field.values.setZero(npix, field.d);
    field.mask.assign(static_cast<size_t>(npix), 0);
    for (Eigen::Index pix = 0; pix < npix; ++pix) {
        for (int c = 0; c < field.d; ++c) {
            field.values(pix, c) = array.doubles[static_cast<size_t>(pix) * array.channels + c];
        }
        field.mask[static_cast<size_t>(pix)] =
            array.doubles[static_cast<size_t>(pix) * array.channels + field.d] != 0.0 ? 1 : 0;
    }
    return field;
}

void write_vertex_table(const VertexDescriptorTable& table, const std::string& path) {
    ArrayFile array;
    array.dtype = 'd';
    array.width = static_cast<std::uint32_t>(table.values.rows());
    array.height = 1;
    array.channels = static_cast<std::uint32_t>(table.values.cols() + 1);  // +1 visibility
    array.doubles.resize(array.element_count());
    for (Eigen::Index v = 0; v < table.values.rows(); ++v) {
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            array.doubles[static_cast<size_t>(v * array.channels + c)] = table.values(v, c);
        }
        array.doubles[static_cast<size_t>(v * array.channels) + table.values.cols()] =
            static_cast<double>(table.visibility[v]);
    }
    write_array(path, array);
}

VertexDescriptorTable read_vertex_table(const std::string& path) {
    const ArrayFile array = read_array(path);
    if (array.dtype != 'd' || array.height != 1 || array.channels < 2) {
        throw std::runtime_error("vertex table: unexpected layout in " + path);
    }
    VertexDescriptorTable table;
    const int d = static_cast<int>(array.channels) - 1;
    table.values.setZero(array.width, d);
    table.visibility.setZero(array.width);
    for (Eigen::Index v = 0; v < table.values.rows(); ++v) {
        for (int c = 0; c < d; ++c) {
            table.values(v, c) = array.doubles[static_cast<size_t>(v * array.channels + c)];
        }
        table.visibility[v] =
            static_cast<int>(array.doubles[static_cast<size_t>(v * array.channels) + d]);
    }
    return table;
}

}  // namespace bodycorr
